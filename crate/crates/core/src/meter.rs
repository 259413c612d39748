//! Exact simulation of the von Neumann measurement protocol.
//!
//! The meter is a Gaussian wavepacket on a uniform periodic grid over
//! [−L, L). The coupling e^{−igA⊗M} is applied exactly: |ψ⟩ is expanded in
//! the eigenbasis of A and each branch's meter factor is multiplied by
//! e^{−igλk} in the Fourier basis, where the meter observable M is diagonal
//! with wavenumbers {πm/L : m ∈ [−n/2, n/2)}. Every branch evolution is an
//! exact circular translation of the wavepacket by g·λ, so there is no
//! Trotter or finite-difference error anywhere — the only approximation in
//! the whole pipeline is the periodic truncation of the Gaussian tails,
//! which the configuration invariants keep below 1e-12 in mass.
//!
//! Position moments are plain grid-weighted means (valid while the tails
//! stay confined), so the simulated pointer shifts can be compared against
//! the first-order weak-value predictions at spectral accuracy.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Observable;
use crate::tol;
use crate::weakvalue::{weak_value, PpsEnsemble};
use crate::{State, C64};

/// Meter grid and wavepacket parameters.
///
/// The invariants (`n_grid` a power of two ≥ 64, L ≥ 8σ, |x0| + 6σ < L)
/// keep the truncated tail mass below 1e-12 so that periodic wraparound
/// cannot contaminate the pointer moments.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct MeterConfig {
    /// Number of grid points (power of two).
    pub n_grid: usize,
    /// Half width L of the grid: positions span [−L, L).
    pub half_width: f64,
    /// Gaussian width σ of the envelope exp(−(x−x0)²/(4σ²)).
    pub sigma: f64,
    /// Initial momentum offset: a phase factor exp(i·k0·x).
    pub k0: f64,
    /// Initial position offset.
    pub x0: f64,
}

impl Default for MeterConfig {
    fn default() -> Self {
        MeterConfig {
            n_grid: 512,
            half_width: 10.0,
            sigma: 1.0,
            k0: 0.0,
            x0: 0.0,
        }
    }
}

impl MeterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid < 64 || !self.n_grid.is_power_of_two() {
            return Err(Error::ConfigInvalid {
                reason: format!("n_grid must be a power of two >= 64, got {}", self.n_grid),
            });
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::ConfigInvalid {
                reason: format!("sigma must be positive, got {}", self.sigma),
            });
        }
        if self.half_width.is_nan() || self.half_width < 8.0 * self.sigma {
            return Err(Error::ConfigInvalid {
                reason: format!(
                    "half_width {} < 8·sigma = {}: truncated tails would exceed 1e-14",
                    self.half_width,
                    8.0 * self.sigma
                ),
            });
        }
        if self.x0.is_nan() || self.x0.abs() + 6.0 * self.sigma >= self.half_width {
            return Err(Error::ConfigInvalid {
                reason: format!(
                    "|x0| + 6·sigma = {} must stay below half_width {}",
                    self.x0.abs() + 6.0 * self.sigma,
                    self.half_width
                ),
            });
        }
        Ok(())
    }
}

/// Post-selected pointer statistics for one coupling strength.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointerResult {
    /// Probability that the post-selection succeeds.
    pub p_select: f64,
    pub mean_x_before: f64,
    pub mean_x_after: f64,
    pub mean_m_before: f64,
    pub mean_m_after: f64,
    /// Momentum variance of the *initial* meter (enters the first-order
    /// momentum-shift prediction).
    pub var_m: f64,
    /// Coupling strength used.
    pub g: f64,
}

/// Discretized meter: grid, wavepacket, and FFT plans.
struct Meter {
    n: usize,
    positions: Vec<f64>,
    /// Wavenumbers in FFT index order: k[m] = (π/L)·m for m in [0, n/2),
    /// then the negative half.
    wavenumbers: Vec<f64>,
    /// Normalized initial wavepacket, position representation.
    initial: Vec<C64>,
    /// Forward FFT of `initial`.
    initial_hat: Vec<C64>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl Meter {
    fn new(cfg: &MeterConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_grid;
        let l = cfg.half_width;
        let dx = 2.0 * l / n as f64;
        let positions: Vec<f64> = (0..n).map(|j| -l + j as f64 * dx).collect();
        let wavenumbers: Vec<f64> = (0..n)
            .map(|m| {
                let signed = if m < n / 2 {
                    m as i64
                } else {
                    m as i64 - n as i64
                };
                std::f64::consts::PI / l * signed as f64
            })
            .collect();

        let mut initial: Vec<C64> = positions
            .iter()
            .map(|&x| {
                let envelope = (-(x - cfg.x0).powi(2) / (4.0 * cfg.sigma * cfg.sigma)).exp();
                C64::from_polar(envelope, cfg.k0 * x)
            })
            .collect();
        let norm = initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut initial {
            *z /= norm;
        }

        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        let mut initial_hat = initial.clone();
        fft_fwd.process(&mut initial_hat);

        Ok(Meter {
            n,
            positions,
            wavenumbers,
            initial,
            initial_hat,
            fft_inv,
        })
    }

    fn position_mean(&self, amps: &[C64]) -> f64 {
        let mut total = 0.0;
        let mut weighted = 0.0;
        for (z, &x) in amps.iter().zip(&self.positions) {
            let p = z.norm_sqr();
            total += p;
            weighted += x * p;
        }
        weighted / total
    }

    /// (mean, variance) of the meter observable from a Fourier-space
    /// representation; two-pass so the variance cannot round negative.
    fn momentum_moments(&self, hat: &[C64]) -> (f64, f64) {
        let mut total = 0.0;
        let mut weighted = 0.0;
        for (z, &k) in hat.iter().zip(&self.wavenumbers) {
            let p = z.norm_sqr();
            total += p;
            weighted += k * p;
        }
        let mean = weighted / total;
        let mut spread = 0.0;
        for (z, &k) in hat.iter().zip(&self.wavenumbers) {
            spread += (k - mean) * (k - mean) * z.norm_sqr();
        }
        (mean, spread / total)
    }

    /// e^{−i·shift·M} applied in the Fourier basis: an exact circular
    /// translation of the position wavepacket by `shift`.
    fn translate_hat(&self, hat: &[C64], shift: f64) -> Vec<C64> {
        hat.iter()
            .zip(&self.wavenumbers)
            .map(|(z, &k)| z * C64::from_polar(1.0, -shift * k))
            .collect()
    }

    fn to_position(&self, hat: &[C64]) -> Vec<C64> {
        let mut out = hat.to_vec();
        self.fft_inv.process(&mut out);
        let scale = 1.0 / self.n as f64;
        for z in &mut out {
            *z *= scale;
        }
        out
    }

    fn position_observable(&self) -> Observable {
        let n = self.n;
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.positions[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        // Grid order is already ascending, so the eigensystem is trivial.
        let spectrum = DVector::from_vec(self.positions.clone());
        let eigenvectors = DMatrix::identity(n, n);
        Observable::from_parts(matrix, spectrum, eigenvectors)
    }

    fn momentum_observable(&self) -> Observable {
        let n = self.n;
        let table = phase_table(n);
        // Circulant first row: M_{jl} = c[(j−l) mod n] with
        // c_r = (1/n)·Σ_m k_m·e^{2πi·m·r/n}. Conjugate symmetry is imposed
        // explicitly so Hermiticity is exact, not merely within rounding.
        let mut c = vec![C64::new(0.0, 0.0); n];
        for r in 0..=n / 2 {
            let mut acc = C64::new(0.0, 0.0);
            for (m, &k) in self.wavenumbers.iter().enumerate() {
                acc += table[(m * r) % n] * k;
            }
            c[r] = acc / n as f64;
            if r != 0 && r != n / 2 {
                c[n - r] = c[r].conj();
            } else {
                // Self-paired offsets (r = 0 and r = n/2) are mathematically
                // real; drop the sin(π) rounding dust so Hermiticity is exact.
                c[r].im = 0.0;
            }
        }
        let matrix = DMatrix::from_fn(n, n, |j, l| c[(n + j - l) % n]);

        // Eigensystem: plane waves, ordered by ascending wavenumber.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.wavenumbers[a].total_cmp(&self.wavenumbers[b]));
        let spectrum = DVector::from_iterator(n, order.iter().map(|&m| self.wavenumbers[m]));
        let scale = 1.0 / (n as f64).sqrt();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (col, &m) in order.iter().enumerate() {
            for j in 0..n {
                eigenvectors[(j, col)] = table[(j * m) % n] * scale;
            }
        }
        Observable::from_parts(matrix, spectrum, eigenvectors)
    }
}

fn phase_table(n: usize) -> Vec<C64> {
    (0..n)
        .map(|s| C64::from_polar(1.0, std::f64::consts::TAU * s as f64 / n as f64))
        .collect()
}

/// Builds the discretized meter: the initial wavepacket, the position
/// observable X (diagonal on the grid) and the meter observable M
/// (spectral, diagonal in the Fourier basis).
pub fn build_meter(cfg: &MeterConfig) -> Result<(State, Observable, Observable)> {
    let meter = Meter::new(cfg)?;
    let state = State::from_normalized(DVector::from_vec(meter.initial.clone()));
    let x_op = meter.position_observable();
    let m_op = meter.momentum_observable();
    Ok((state, x_op, m_op))
}

/// Evolves |ψ⟩⊗|Φ⟩ under e^{−igA⊗M} exactly, post-selects the system on φ,
/// and reports the pointer statistics of the surviving meter state.
pub fn evolve_and_postselect(
    a: &Observable,
    e: &PpsEnsemble,
    cfg: &MeterConfig,
    g: f64,
) -> Result<PointerResult> {
    if a.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: e.dim(),
        });
    }
    let spectral_radius = a.lambda_min().abs().max(a.lambda_max().abs());
    if g.abs() * spectral_radius > cfg.half_width / 4.0 {
        return Err(Error::ConfigInvalid {
            reason: format!(
                "|g|·max|λ| = {} exceeds half_width/4 = {}: branches would wrap around the grid",
                g.abs() * spectral_radius,
                cfg.half_width / 4.0
            ),
        });
    }
    let meter = Meter::new(cfg)?;

    let mean_x_before = meter.position_mean(&meter.initial);
    let (mean_m_before, var_m) = meter.momentum_moments(&meter.initial_hat);

    // ψ and φ expanded in the eigenbasis of A; branch a carries
    // ⟨v_a|ψ⟩·⟨φ|v_a⟩ and its meter factor translates by g·λ_a.
    let coeffs = a.eigenvectors().adjoint() * e.pre().amplitudes();
    let post_components = a.eigenvectors().adjoint() * e.post().amplitudes();

    let mut selected_hat = vec![C64::new(0.0, 0.0); meter.n];
    for (idx, &lambda) in a.spectrum().iter().enumerate() {
        let weight = coeffs[idx] * post_components[idx].conj();
        let branch = meter.translate_hat(&meter.initial_hat, g * lambda);
        for (out, z) in selected_hat.iter_mut().zip(&branch) {
            *out += weight * z;
        }
    }

    let selected = meter.to_position(&selected_hat);
    let p_select = selected.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if p_select < tol::P_SELECT_MIN {
        return Err(Error::ZeroSelectionProbability);
    }
    let mean_x_after = meter.position_mean(&selected);
    let (mean_m_after, _) = meter.momentum_moments(&selected_hat);

    Ok(PointerResult {
        p_select: p_select.clamp(0.0, 1.0),
        mean_x_before,
        mean_x_after,
        mean_m_before,
        mean_m_after,
        var_m,
        g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// Reported but not asserted (the x-shift check for k0 ≠ 0, where the
    /// first-order shift picks up covariance terms outside the model).
    Skipped,
}

/// One first-order prediction compared against the exact simulation at g
/// and g/2.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceCheck {
    pub name: &'static str,
    /// First-order prediction at g.
    pub predicted: f64,
    /// Exact simulated value at g.
    pub observed: f64,
    /// |observed − predicted| at g.
    pub residual: f64,
    /// Same at g/2.
    pub residual_half: f64,
    /// residual / residual_half; absent when the residual sits at the
    /// rounding floor.
    pub ratio: Option<f64>,
    pub status: CheckStatus,
}

/// Residuals of the three first-order predictions under coupling halving.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub g: f64,
    pub checks: Vec<ConvergenceCheck>,
    pub at_g: PointerResult,
    pub at_half_g: PointerResult,
}

impl ConvergenceReport {
    /// True when no asserted check failed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Failed)
    }

    /// Flat table: `g,residual_x,residual_m,residual_p`, one row per
    /// coupling.
    pub fn to_csv(&self) -> String {
        let find = |name: &str| self.checks.iter().find(|c| c.name == name).unwrap();
        let x = find("x_shift");
        let m = find("m_shift");
        let p = find("p_select");
        let mut out = String::from("g,residual_x,residual_m,residual_p\n");
        out.push_str(&format!(
            "{},{},{},{}\n",
            self.g, x.residual, m.residual, p.residual
        ));
        out.push_str(&format!(
            "{},{},{},{}\n",
            self.g / 2.0,
            x.residual_half,
            m.residual_half,
            p.residual_half
        ));
        out
    }
}

/// Runs the exact simulation at g and g/2 and checks that the residuals of
/// the three first-order predictions shrink at second order:
///
/// - x-shift g·Re⟨A⟩_w (asserted only for k0 = 0, real envelope);
/// - momentum shift 2g·Var(M)·Im⟨A⟩_w;
/// - p_select = |⟨φ|ψ⟩|²·(1 + 2g·Im⟨A⟩_w·k0).
///
/// A residual above the rounding floor must show r(g)/r(g/2) in [3.5, 4.5].
pub fn first_order_checks(
    a: &Observable,
    e: &PpsEnsemble,
    cfg: &MeterConfig,
    g: f64,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let wv = weak_value(a, e)?;
    let var_continuum = 1.0 / (4.0 * cfg.sigma * cfg.sigma);

    // Guard: each prediction must be a small relative correction, otherwise
    // "first order in g" is not a meaningful description of the regime.
    let guards: [(&'static str, f64); 3] = [
        ("x_shift", (g * wv.re).abs() / cfg.sigma),
        ("m_shift", 2.0 * (g * wv.im).abs() * var_continuum.sqrt()),
        ("p_select", 2.0 * (g * wv.im * cfg.k0).abs()),
    ];
    for (check, predicted) in guards {
        if predicted >= tol::WEAK_GUARD {
            return Err(Error::GuardViolated { check, predicted });
        }
    }

    let at_g = evolve_and_postselect(a, e, cfg, g)?;
    let at_half_g = evolve_and_postselect(a, e, cfg, g / 2.0)?;
    let overlap_sq = e.overlap().norm_sqr();

    let x_pred = |gg: f64| gg * wv.re;
    let m_pred = |gg: f64, r: &PointerResult| 2.0 * gg * r.var_m * wv.im;
    let p_pred = |gg: f64| overlap_sq * (1.0 + 2.0 * gg * wv.im * cfg.k0);

    let x_obs = |r: &PointerResult| r.mean_x_after - r.mean_x_before;
    let m_obs = |r: &PointerResult| r.mean_m_after - r.mean_m_before;

    let checks = vec![
        make_check(
            "x_shift",
            x_pred(g),
            x_obs(&at_g),
            (x_pred(g / 2.0) - x_obs(&at_half_g)).abs(),
            cfg.k0 == 0.0,
        ),
        make_check(
            "m_shift",
            m_pred(g, &at_g),
            m_obs(&at_g),
            (m_pred(g / 2.0, &at_half_g) - m_obs(&at_half_g)).abs(),
            true,
        ),
        make_check(
            "p_select",
            p_pred(g),
            at_g.p_select,
            (p_pred(g / 2.0) - at_half_g.p_select).abs(),
            true,
        ),
    ];

    Ok(ConvergenceReport {
        g,
        checks,
        at_g,
        at_half_g,
    })
}

fn make_check(
    name: &'static str,
    predicted: f64,
    observed: f64,
    residual_half: f64,
    asserted: bool,
) -> ConvergenceCheck {
    let residual = (observed - predicted).abs();
    let (ratio, converged) = if residual <= tol::RESIDUAL_FLOOR {
        (None, true)
    } else {
        let ratio = residual / residual_half;
        (
            Some(ratio),
            (tol::RATIO_LO..=tol::RATIO_HI).contains(&ratio),
        )
    };
    let status = if !asserted {
        CheckStatus::Skipped
    } else if converged {
        CheckStatus::Passed
    } else {
        CheckStatus::Failed
    };
    ConvergenceCheck {
        name,
        predicted,
        observed,
        residual,
        residual_half,
        ratio,
        status,
    }
}
