//! Weak values and their anatomy.
//!
//! For a pre-selection |ψ⟩, post-selection |φ⟩ and observable A, the weak
//! value ⟨A⟩_w = ⟨φ|A|ψ⟩/⟨φ|ψ⟩ splits exactly as
//!
//! ```text
//! ⟨A⟩_w = ⟨A⟩ + ΔA·⟨φ|ψ̄⟩/⟨φ|ψ⟩
//! ```
//!
//! where |ψ̄⟩ is the normalized component of A|ψ⟩ orthogonal to |ψ⟩ (defined
//! whenever ΔA > 0). The second term is the anomalous part: it vanishes iff
//! the post-selection cannot interfere with |ψ̄⟩, which is the necessary and
//! sufficient condition for the weak value to stay at the ordinary average.
//! Everything else in this module — phase analysis, resolution-of-identity
//! averages, the bound chain and the tradeoff relation — is bookkeeping on
//! top of that split.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cser;
use crate::error::{Error, Result};
use crate::hilbert::{self, commutator, expectation, inner, Observable, State};
use crate::tol;
use crate::C64;

/// A pre- and post-selected ensemble: the pair (|ψ⟩, |φ⟩) with the overlap
/// ⟨φ|ψ⟩ cached. Construction fails when the overlap modulus does not clear
/// the threshold, since every post-selected quantity divides by it.
#[derive(Debug, Clone)]
pub struct PpsEnsemble {
    pre: State,
    post: State,
    overlap: C64,
    overlap_threshold: f64,
}

impl PpsEnsemble {
    /// Builds an ensemble with the default overlap threshold of 1e-9.
    pub fn new(pre: State, post: State) -> Result<Self> {
        Self::with_threshold(pre, post, tol::OVERLAP_THRESHOLD)
    }

    /// Builds an ensemble with a caller-chosen overlap threshold.
    pub fn with_threshold(pre: State, post: State, overlap_threshold: f64) -> Result<Self> {
        let overlap = inner(&post, &pre)?;
        let modulus = overlap.norm();
        if modulus.is_nan() || modulus <= overlap_threshold {
            return Err(Error::OrthogonalPostSelection {
                overlap: overlap.norm(),
                threshold: overlap_threshold,
            });
        }
        Ok(PpsEnsemble {
            pre,
            post,
            overlap,
            overlap_threshold,
        })
    }

    pub fn pre(&self) -> &State {
        &self.pre
    }

    pub fn post(&self) -> &State {
        &self.post
    }

    /// ⟨φ|ψ⟩, cached at construction.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    pub fn overlap_threshold(&self) -> f64 {
        self.overlap_threshold
    }

    pub fn dim(&self) -> usize {
        self.pre.dim()
    }

    /// True when |⟨φ|ψ⟩| < 1e-6: the anomalous part then amplifies rounding
    /// by more than a factor of a million and results deserve suspicion.
    pub fn poorly_conditioned(&self) -> bool {
        self.overlap.norm() < tol::OVERLAP_WARN
    }
}

/// ⟨A⟩_w = ⟨φ|A|ψ⟩ / ⟨φ|ψ⟩.
pub fn weak_value(a: &Observable, e: &PpsEnsemble) -> Result<C64> {
    if e.overlap.norm() <= e.overlap_threshold {
        return Err(Error::OrthogonalPostSelection {
            overlap: e.overlap.norm(),
            threshold: e.overlap_threshold,
        });
    }
    let numerator = e.post.amplitudes().dotc(&a.apply(&e.pre)?);
    Ok(numerator / e.overlap)
}

/// The exact split A|ψ⟩ = ⟨A⟩|ψ⟩ + ΔA|ψ̄⟩.
#[derive(Debug, Clone)]
pub struct VaidmanSplit {
    /// ⟨A⟩ in |ψ⟩.
    pub average: f64,
    /// ΔA in |ψ⟩.
    pub delta: f64,
    /// |ψ̄⟩, the unit vector orthogonal to |ψ⟩ carrying the deviation;
    /// absent when ΔA < 1e-10 (|ψ⟩ is then an eigenstate).
    pub psi_bar: Option<State>,
}

/// Splits A|ψ⟩ into its component along |ψ⟩ and the orthogonal remainder.
pub fn vaidman_decompose(a: &Observable, psi: &State) -> Result<VaidmanSplit> {
    let (residual, delta, average) = hilbert::deviation_vector(a, psi)?;
    let psi_bar = if delta >= tol::EIGENSTATE_DELTA {
        Some(State::from_normalized(residual / C64::new(delta, 0.0)))
    } else {
        None
    };
    Ok(VaidmanSplit {
        average,
        delta,
        psi_bar,
    })
}

/// Full anatomy of one weak value.
///
/// `weak_value` is always computed directly from ⟨φ|A|ψ⟩/⟨φ|ψ⟩ while
/// `anomalous` comes from the ΔA·⟨φ|ψ̄⟩/⟨φ|ψ⟩ route, so the identity
/// `weak_value = average + anomalous` genuinely cross-checks two
/// independent computations (see [`WeakValueReport::identity_residual`]).
#[derive(Debug, Clone, Serialize)]
pub struct WeakValueReport {
    #[serde(with = "cser::c64")]
    pub weak_value: C64,
    /// ⟨A⟩ in the pre-selected state.
    pub average: f64,
    /// ΔA in the pre-selected state.
    pub delta_a: f64,
    /// The Vaidman state |ψ̄⟩; absent for eigenstates.
    pub psi_bar: Option<State>,
    /// δ⟨A⟩_w = ΔA·⟨φ|ψ̄⟩/⟨φ|ψ⟩, exactly zero for eigenstates.
    #[serde(with = "cser::c64")]
    pub anomalous: C64,
    /// True iff ΔA < 1e-10.
    pub eigenstate_flag: bool,
    /// Φ = arg⟨φ|ψ⟩ in (−π, π].
    pub phase_phi: f64,
    /// Φ̄ = arg⟨φ|ψ̄⟩ in (−π, π]; absent when |ψ̄⟩ is absent or ⟨φ|ψ̄⟩ = 0.
    pub phase_phi_bar: Option<f64>,
    /// ⟨φ|ψ⟩ carried along so the report stays self-contained.
    #[serde(with = "cser::c64")]
    pub overlap: C64,
}

impl WeakValueReport {
    /// Componentwise residual of weak_value = average + anomalous.
    pub fn identity_residual(&self) -> f64 {
        let diff = self.weak_value - (C64::new(self.average, 0.0) + self.anomalous);
        diff.re.abs().max(diff.im.abs())
    }
}

/// Computes the weak value and its average/anomalous split, with phases.
pub fn decompose_weak_value(a: &Observable, e: &PpsEnsemble) -> Result<WeakValueReport> {
    let wv = weak_value(a, e)?;
    let split = vaidman_decompose(a, &e.pre)?;
    let overlap = e.overlap();
    let (anomalous, phase_phi_bar) = match &split.psi_bar {
        Some(psi_bar) => {
            let interference = inner(&e.post, psi_bar)?;
            let anomalous = interference / overlap * split.delta;
            let phase = if interference.norm() > 0.0 {
                Some(principal_arg(interference))
            } else {
                None
            };
            (anomalous, phase)
        }
        None => (C64::new(0.0, 0.0), None),
    };
    Ok(WeakValueReport {
        weak_value: wv,
        average: split.average,
        delta_a: split.delta,
        psi_bar: split.psi_bar,
        anomalous,
        eigenstate_flag: split.delta < tol::EIGENSTATE_DELTA,
        phase_phi: principal_arg(overlap),
        phase_phi_bar,
        overlap,
    })
}

/// The weak value rebuilt from moduli and relative phases, plus the
/// Pancharatnam in-phase verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseAnalysis {
    /// ⟨A⟩ + ΔA·(|⟨φ|ψ̄⟩|/|⟨φ|ψ⟩|)·cos(Φ̄ − Φ).
    pub re_predicted: f64,
    /// ΔA·(|⟨φ|ψ̄⟩|/|⟨φ|ψ⟩|)·sin(Φ̄ − Φ).
    pub im_predicted: f64,
    /// True iff ⟨φ|ψ̄⟩ is real (|Im| < 1e-10) and strictly positive:
    /// the two interfering states are in phase.
    pub in_phase: bool,
}

/// Reconstructs Re/Im of the weak value from the relative phases of the
/// report. Fails with [`Error::PhaseUndefined`] when Φ̄ does not exist.
pub fn phase_analysis(report: &WeakValueReport) -> Result<PhaseAnalysis> {
    let phase_phi_bar = report.phase_phi_bar.ok_or(Error::PhaseUndefined)?;
    let dphi = wrap_phase(phase_phi_bar - report.phase_phi);
    // ΔA·|⟨φ|ψ̄⟩|/|⟨φ|ψ⟩| is exactly the modulus of the anomalous part.
    let magnitude = report.anomalous.norm();
    // ⟨φ|ψ̄⟩ recovered from the report; ΔA > 0 whenever the phase exists.
    let interference = report.anomalous * report.overlap / C64::new(report.delta_a, 0.0);
    Ok(PhaseAnalysis {
        re_predicted: report.average + magnitude * dphi.cos(),
        im_predicted: magnitude * dphi.sin(),
        in_phase: interference.im.abs() < tol::DERIVED && interference.re > 0.0,
    })
}

/// One term of a resolution-of-identity average.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionTerm {
    /// |⟨ψ|ψ_k⟩|².
    pub weight: f64,
    /// ⟨A⟩_w for post-selection on |ψ_k⟩; absent for skipped terms.
    #[serde(with = "cser::c64_opt")]
    pub weak_value: Option<C64>,
    /// True when the weight fell below 1e-14: the intermediate weak value is
    /// then undefined but its weighted contribution tends to zero, so the
    /// term enters the sums as exactly zero.
    pub skipped: bool,
}

/// The average ⟨A⟩ rebuilt as a weight of intermediate weak values.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResolution {
    /// Σ_k |⟨ψ|ψ_k⟩|²·⟨A⟩_w^(k); equals ⟨A⟩ (real part reported).
    pub weighted_sum: f64,
    /// Σ_k |⟨ψ|ψ_k⟩|²·δ⟨A⟩_w^(k); zero up to rounding — the anomalous
    /// parts of the intermediate weak values interfere away exactly.
    #[serde(with = "cser::c64")]
    pub anomalous_weighted_sum: C64,
    pub terms: Vec<ResolutionTerm>,
}

/// Expands ⟨A⟩ over a complete orthonormal set of post-selections.
pub fn identity_resolution_average(
    a: &Observable,
    psi: &State,
    basis: &[State],
) -> Result<IdentityResolution> {
    let dim = psi.dim();
    for b in basis {
        if b.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: b.dim(),
            });
        }
    }
    let mut ortho_residual = 0.0f64;
    for (j, bj) in basis.iter().enumerate() {
        for (k, bk) in basis.iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            let got = inner(bj, bk)?;
            ortho_residual = ortho_residual.max((got - C64::new(target, 0.0)).norm());
        }
    }
    if ortho_residual >= tol::DERIVED {
        return Err(Error::NonOrthonormalBasis {
            residual: ortho_residual,
        });
    }
    let mut projector_sum = DMatrix::<C64>::zeros(dim, dim);
    for b in basis {
        let v = b.amplitudes();
        projector_sum += v * v.adjoint();
    }
    let completeness_residual = (projector_sum - DMatrix::<C64>::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if completeness_residual >= tol::DERIVED {
        return Err(Error::IncompleteBasis {
            residual: completeness_residual,
        });
    }

    let mean = expectation(a, psi)?;
    let image = a.apply(psi)?;
    let mut weighted_sum = C64::new(0.0, 0.0);
    let mut anomalous_weighted_sum = C64::new(0.0, 0.0);
    let mut terms = Vec::with_capacity(basis.len());
    for b in basis {
        let overlap = b.amplitudes().dotc(psi.amplitudes());
        let weight = overlap.norm_sqr();
        if weight < tol::WEIGHT_SKIP {
            terms.push(ResolutionTerm {
                weight,
                weak_value: None,
                skipped: true,
            });
            continue;
        }
        let wv = b.amplitudes().dotc(&image) / overlap;
        weighted_sum += wv * weight;
        anomalous_weighted_sum += (wv - C64::new(mean, 0.0)) * weight;
        terms.push(ResolutionTerm {
            weight,
            weak_value: Some(wv),
            skipped: false,
        });
    }
    Ok(IdentityResolution {
        weighted_sum: weighted_sum.re,
        anomalous_weighted_sum,
        terms,
    })
}

/// The bound chain around one anomalous part.
///
/// `anomaly_modulus` is |⟨A⟩_w − ⟨A⟩| from the direct weak value, while
/// `lower` comes from the interference route, so the chain compares two
/// independent computations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundsReport {
    /// |δ⟨A⟩_w| = |⟨A⟩_w − ⟨A⟩|.
    pub anomaly_modulus: f64,
    /// ΔA·|⟨φ|ψ̄⟩| — never exceeds the anomaly modulus.
    pub lower: f64,
    /// ΔA/|⟨φ|ψ⟩| — never exceeded by the anomaly modulus.
    pub upper: f64,
    /// Re⟨A⟩_w − λ_max(A).
    pub lambda_max_gap: f64,
    /// ΔA/|⟨φ|ψ⟩| again, as the cap on the gap above the top eigenvalue.
    pub lambda_gap_bound: f64,
}

/// Evaluates the two-sided anomaly bound and the largest-eigenvalue gap
/// bound, failing with [`Error::InequalityViolation`] if either is broken
/// beyond 1e-9 slack (which a correct computation cannot produce).
pub fn anomaly_bounds(a: &Observable, e: &PpsEnsemble) -> Result<BoundsReport> {
    let report = decompose_weak_value(a, e)?;
    let anomaly_modulus = (report.weak_value - C64::new(report.average, 0.0)).norm();
    let lower = match &report.psi_bar {
        Some(psi_bar) => report.delta_a * inner(&e.post, psi_bar)?.norm(),
        None => 0.0,
    };
    let upper = report.delta_a / report.overlap.norm();
    let lambda_max_gap = report.weak_value.re - a.lambda_max();
    let bounds = BoundsReport {
        anomaly_modulus,
        lower,
        upper,
        lambda_max_gap,
        lambda_gap_bound: upper,
    };
    if bounds.lower > bounds.anomaly_modulus + tol::INEQUALITY_SLACK {
        return Err(Error::InequalityViolation {
            name: "anomaly_lower_bound",
            lhs: bounds.lower,
            rhs: bounds.anomaly_modulus,
        });
    }
    if bounds.anomaly_modulus > bounds.upper + tol::INEQUALITY_SLACK {
        return Err(Error::InequalityViolation {
            name: "anomaly_upper_bound",
            lhs: bounds.anomaly_modulus,
            rhs: bounds.upper,
        });
    }
    if bounds.lambda_max_gap > bounds.lambda_gap_bound + tol::INEQUALITY_SLACK {
        return Err(Error::InequalityViolation {
            name: "max_eigenvalue_gap",
            lhs: bounds.lambda_max_gap,
            rhs: bounds.lambda_gap_bound,
        });
    }
    Ok(bounds)
}

/// Product-of-anomalies tradeoff for two observables on one ensemble.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TradeoffReport {
    /// |δ⟨A⟩_w|·|δ⟨B⟩_w|.
    pub lhs: f64,
    /// ½|⟨ψ|[A,B]|ψ⟩|·|⟨φ|ψ̄_A⟩|·|⟨φ|ψ̄_B⟩|.
    pub rhs: f64,
    /// lhs ≥ rhs − 1e-9.
    pub satisfied: bool,
}

/// Checks that the product of two anomalous parts clears its commutator
/// floor. When either uncertainty vanishes the matching interference factor
/// is set to zero; the commutator expectation must then vanish too, which
/// is verified as a cross-check.
pub fn tradeoff_check(a: &Observable, b: &Observable, e: &PpsEnsemble) -> Result<TradeoffReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let report_a = decompose_weak_value(a, e)?;
    let report_b = decompose_weak_value(b, e)?;
    let lhs = (report_a.weak_value - C64::new(report_a.average, 0.0)).norm()
        * (report_b.weak_value - C64::new(report_b.average, 0.0)).norm();

    let factor = |report: &WeakValueReport| -> Result<f64> {
        match &report.psi_bar {
            Some(psi_bar) => Ok(inner(&e.post, psi_bar)?.norm()),
            None => Ok(0.0),
        }
    };
    let factor_a = factor(&report_a)?;
    let factor_b = factor(&report_b)?;

    let comm = commutator(a, b)?;
    let psi = e.pre().amplitudes();
    let comm_expect = psi.dotc(&(&comm * psi));

    if report_a.eigenstate_flag || report_b.eigenstate_flag {
        // Δ = 0 on either side forces ⟨ψ|[A,B]|ψ⟩ = 0 (Robertson); anything
        // bigger than accumulated rounding means corruption.
        let scale = (1.0 + spectral_radius(a)) * (1.0 + spectral_radius(b));
        if comm_expect.norm() > tol::PHYSICAL * scale {
            return Err(Error::InequalityViolation {
                name: "tradeoff_degenerate_commutator",
                lhs: comm_expect.norm(),
                rhs: tol::PHYSICAL * scale,
            });
        }
    }

    let rhs = 0.5 * comm_expect.norm() * factor_a * factor_b;
    Ok(TradeoffReport {
        lhs,
        rhs,
        satisfied: lhs >= rhs - tol::INEQUALITY_SLACK,
    })
}

fn spectral_radius(a: &Observable) -> f64 {
    a.lambda_min().abs().max(a.lambda_max().abs())
}

/// Rotates the pre-selection by the unit phase ⟨ψ|φ⟩/|⟨ψ|φ⟩|, producing the
/// equivalent ensemble whose overlap ⟨φ|χ⟩ is real and positive. Weak values
/// are invariant under the swap.
pub fn equivalent_pps(e: &PpsEnsemble) -> Result<PpsEnsemble> {
    let unit = e.overlap().conj() / C64::new(e.overlap().norm(), 0.0);
    let chi = State::from_normalized(e.pre().amplitudes() * unit);
    let equivalent = PpsEnsemble::with_threshold(chi, e.post().clone(), e.overlap_threshold())?;
    let overlap = equivalent.overlap();
    if overlap.im.abs() >= tol::CONSTRUCTION || overlap.re <= 0.0 {
        return Err(Error::InequalityViolation {
            name: "equivalent_ensemble_real_overlap",
            lhs: overlap.im.abs(),
            rhs: tol::CONSTRUCTION,
        });
    }
    Ok(equivalent)
}

/// arg in (−π, π]: atan2 maps negative-real with −0 imaginary to −π, which
/// is folded back to +π.
pub(crate) fn principal_arg(z: C64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Reduces a phase difference into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::TAU);
    if y > std::f64::consts::PI {
        y - std::f64::consts::TAU
    } else {
        y
    }
}
