//! States, Hermitian observables, and reproducible random sampling over
//! small finite-dimensional Hilbert spaces.
//!
//! Conventions, fixed project-wide:
//! - ⟨a|b⟩ conjugates the left argument.
//! - Spectra are sorted ascending; eigenvector column `k` pairs with
//!   `spectrum[k]`. Inside a degenerate eigenspace no particular basis is
//!   promised, and nothing downstream may depend on the choice.
//! - Tensor products are system-major: in `tensor(a, b)` the index of `a`
//!   varies slowest.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol;
use crate::C64;

/// Seed for the reproducible sampling entry points. The same seed yields a
/// bit-identical sample sequence on every platform and every run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Deterministic generator for this seed.
    pub fn rng(self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }

    /// Independent deterministic generator for sub-experiment `idx` of this
    /// seed (one stream per fuzz trial, all derived from one master seed).
    pub fn stream(self, idx: u64) -> ChaCha12Rng {
        let mut rng = self.rng();
        rng.set_stream(idx);
        rng
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

/// A normalized pure state: a complex amplitude vector with Σ|a_k|² = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    amps: DVector<C64>,
}

impl State {
    /// Builds a state from raw amplitudes, normalizing them.
    ///
    /// Fails with [`Error::InvalidDimension`] for fewer than two amplitudes
    /// and [`Error::ZeroNorm`] when the vector cannot be normalized.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amps))
    }

    /// Like [`State::new`] but from an owned nalgebra vector.
    pub fn from_vector(amps: DVector<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidDimension { dim: amps.len() });
        }
        let norm_sq = amps.norm_squared();
        if norm_sq.is_nan() || norm_sq <= 1e-300 {
            return Err(Error::ZeroNorm);
        }
        // Vectors that already satisfy the normalization invariant are kept
        // bit-for-bit, so serialize → parse round-trips are exact.
        if (norm_sq - 1.0).abs() <= tol::CONSTRUCTION {
            return Ok(State { amps });
        }
        let norm = norm_sq.sqrt();
        Ok(State {
            amps: amps / C64::new(norm, 0.0),
        })
    }

    /// Convenience constructor for real amplitude lists.
    pub fn from_reals(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The computational basis state |k⟩ in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim });
        }
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: k,
            });
        }
        let mut amps = DVector::from_element(dim, C64::new(0.0, 0.0));
        amps[k] = C64::new(1.0, 0.0);
        Ok(State { amps })
    }

    /// Internal constructor for vectors already known to be unit norm.
    pub(crate) fn from_normalized(amps: DVector<C64>) -> Self {
        debug_assert!((amps.norm() - 1.0).abs() < 1e-9);
        State { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.amps[k]
    }

    /// The same ray with a global phase e^{iα} applied.
    pub fn with_global_phase(&self, alpha: f64) -> State {
        let phase = C64::from_polar(1.0, alpha);
        State {
            amps: &self.amps * phase,
        }
    }

    /// Whether two states describe the same physical ray: |⟨a|b⟩| = 1 within
    /// `tolerance`. States of different dimension never do.
    pub fn is_same_ray(&self, other: &State, tolerance: f64) -> bool {
        self.dim() == other.dim()
            && (inner(self, other).map(|o| (o.norm() - 1.0).abs() < tolerance)).unwrap_or(false)
    }
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.amps.iter().map(|z| [z.re, z.im]))
    }
}

/// A Hermitian observable with its eigensystem computed at construction.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: DMatrix<C64>,
    spectrum: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl Observable {
    /// Builds an observable, checking Hermiticity within 1e-12 and
    /// eagerly eigendecomposing (spectrum sorted ascending).
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if matrix.nrows() < 2 {
            return Err(Error::InvalidDimension {
                dim: matrix.nrows(),
            });
        }
        let residual = hermiticity_residual(&matrix);
        if residual.is_nan() || residual >= tol::CONSTRUCTION {
            return Err(Error::HermiticityViolation { residual });
        }
        // Eigendecompose the symmetrized copy so the solver never sees the
        // sub-tolerance asymmetry.
        let symmetrized = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        let eigen = symmetrized
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::ConvergenceFailure)?;
        let (spectrum, eigenvectors) = sort_eigensystem(eigen.eigenvalues, eigen.eigenvectors);
        Ok(Observable {
            matrix,
            spectrum,
            eigenvectors,
        })
    }

    /// Builds from a row-major list of entries.
    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, entries))
    }

    /// Internal constructor for matrices whose eigensystem is already known
    /// analytically (grid operators). `spectrum` must be ascending and
    /// `eigenvectors` orthonormal with column k paired to spectrum[k].
    pub(crate) fn from_parts(
        matrix: DMatrix<C64>,
        spectrum: DVector<f64>,
        eigenvectors: DMatrix<C64>,
    ) -> Self {
        debug_assert!(spectrum.as_slice().windows(2).all(|w| w[0] <= w[1]));
        Observable {
            matrix,
            spectrum,
            eigenvectors,
        }
    }

    /// Pauli σ_x.
    pub fn pauli_x() -> Observable {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Observable::new(DMatrix::from_row_slice(2, 2, &[o, l, l, o])).unwrap()
    }

    /// Pauli σ_y.
    pub fn pauli_y() -> Observable {
        let o = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        Observable::new(DMatrix::from_row_slice(2, 2, &[o, -i, i, o])).unwrap()
    }

    /// Pauli σ_z.
    pub fn pauli_z() -> Observable {
        Observable::diagonal(&[1.0, -1.0]).unwrap()
    }

    /// Diagonal observable with the given real entries.
    pub fn diagonal(entries: &[f64]) -> Result<Observable> {
        let dim = entries.len();
        let matrix = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Observable::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> &[f64] {
        self.spectrum.as_slice()
    }

    /// Orthonormal eigenvectors; column k pairs with `spectrum()[k]`.
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.spectrum[self.spectrum.len() - 1]
    }

    /// A|ψ⟩ as a raw vector.
    pub fn apply(&self, psi: &State) -> Result<DVector<C64>> {
        check_dims(self.dim(), psi.dim())?;
        Ok(&self.matrix * psi.amplitudes())
    }
}

impl Serialize for Observable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.matrix.nrows()))?;
        for row in self.matrix.row_iter() {
            seq.serialize_element(&row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())?;
        }
        seq.end()
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let r = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(r);
        }
    }
    worst
}

fn sort_eigensystem(values: DVector<f64>, vectors: DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = DVector::from_iterator(values.len(), order.iter().map(|&k| values[k]));
    let mut sorted_vectors = DMatrix::zeros(vectors.nrows(), vectors.ncols());
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    (sorted_values, sorted_vectors)
}

/// ⟨a|b⟩ = Σ_k conj(a_k)·b_k.
pub fn inner(a: &State, b: &State) -> Result<C64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.amplitudes().dotc(b.amplitudes()))
}

/// ⟨ψ|A|ψ⟩. The imaginary residue is checked against 1e-10 (a larger one
/// means the matrix was not Hermitian to begin with) and discarded.
pub fn expectation(a: &Observable, psi: &State) -> Result<f64> {
    let value = expectation_complex(a, psi)?;
    if value.im.abs() >= tol::DERIVED {
        return Err(Error::HermiticityViolation {
            residual: value.im.abs(),
        });
    }
    Ok(value.re)
}

fn expectation_complex(a: &Observable, psi: &State) -> Result<C64> {
    let image = a.apply(psi)?;
    Ok(psi.amplitudes().dotc(&image))
}

/// ΔA = ‖(A − ⟨A⟩)ψ‖, the uncertainty of `a` in `psi`.
pub fn uncertainty(a: &Observable, psi: &State) -> Result<f64> {
    Ok(deviation_vector(a, psi)?.1)
}

/// ((A − ⟨A⟩)|ψ⟩, ΔA, ⟨A⟩) in one pass; shared with the Vaidman split.
pub(crate) fn deviation_vector(a: &Observable, psi: &State) -> Result<(DVector<C64>, f64, f64)> {
    let mean = expectation(a, psi)?;
    let mut residual = a.apply(psi)?;
    residual.axpy(C64::new(-mean, 0.0), psi.amplitudes(), C64::new(1.0, 0.0));
    let radicand = residual.norm_squared();
    let delta = clamp_radicand(radicand)?;
    Ok((residual, delta, mean))
}

/// √radicand with the contract clamp: tiny negative values round to zero,
/// anything below −1e-10 is corruption.
pub(crate) fn clamp_radicand(radicand: f64) -> Result<f64> {
    if radicand < -tol::DERIVED {
        return Err(Error::NegativeVariance { radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// AB − BA. Anti-Hermitian by construction for Hermitian inputs.
pub fn commutator(a: &Observable, b: &Observable) -> Result<DMatrix<C64>> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

/// |a⟩⊗|b⟩ with the index of `a` slowest-varying.
pub fn tensor(a: &State, b: &State) -> State {
    State::from_normalized(a.amplitudes().kronecker(b.amplitudes()))
}

/// A⊗B. The eigensystem is composed from the factors' eigensystems instead
/// of rerunning the solver on the product.
pub fn tensor_op(a: &Observable, b: &Observable) -> Observable {
    let matrix = a.matrix().kronecker(b.matrix());
    let (da, db) = (a.dim(), b.dim());
    let mut values = DVector::zeros(da * db);
    let mut vectors = DMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            let k = i * db + j;
            values[k] = a.spectrum()[i] * b.spectrum()[j];
            let column = a
                .eigenvectors()
                .column(i)
                .kronecker(&b.eigenvectors().column(j));
            vectors.set_column(k, &column);
        }
    }
    let (values, vectors) = sort_eigensystem(values, vectors);
    Observable::from_parts(matrix, values, vectors)
}

/// Haar-uniform random state: i.i.d. standard complex Gaussian amplitudes,
/// normalized. Deterministic for a fixed seed.
pub fn random_state(dim: usize, seed: RngSeed) -> Result<State> {
    random_state_from(dim, &mut seed.rng())
}

/// [`random_state`] drawing from a caller-owned generator.
pub fn random_state_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<State> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    loop {
        let amps = DVector::from_fn(dim, |_, _| sample_complex_normal(rng));
        if amps.norm() > 1e-100 {
            return State::from_vector(amps);
        }
    }
}

/// GUE-style random Hermitian matrix: (G + G†)/2 for G with i.i.d. standard
/// complex Gaussian entries. Deterministic for a fixed seed.
pub fn random_hermitian(dim: usize, seed: RngSeed) -> Result<Observable> {
    random_hermitian_from(dim, &mut seed.rng())
}

/// [`random_hermitian`] drawing from a caller-owned generator.
pub fn random_hermitian_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Observable> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| sample_complex_normal(rng));
    let h = (&g + g.adjoint()).map(|z| z * 0.5);
    Observable::new(h)
}

/// Haar-distributed orthonormal basis: QR of a square complex Gaussian
/// matrix, columns returned as states.
pub fn random_orthonormal_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<State>> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| sample_complex_normal(rng));
    let q = g.qr().q();
    Ok(q.column_iter()
        .map(|c| State::from_normalized(c.into_owned()))
        .collect())
}

fn sample_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}
