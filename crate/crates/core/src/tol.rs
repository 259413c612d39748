//! Central numerical tolerances.
//!
//! Three tiers, by how much rounding a quantity can have accumulated:
//! representation error at construction, single-operation error in derived
//! identities, and multi-operation accumulation in physical-property checks.

/// Construction-level checks: normalization, Hermiticity residues.
pub const CONSTRUCTION: f64 = 1e-12;

/// Derived identities that involve one or two exact operations
/// (eigen-reconstruction, orthonormality, decomposition identities).
pub const DERIVED: f64 = 1e-10;

/// Physical-property checks where error accumulates over many operations
/// (eigenstate detection through ‖Aψ − ⟨A⟩ψ‖, grid moments).
pub const PHYSICAL: f64 = 1e-8;

/// Slack allowed when checking the analytical inequalities; looser than
/// [`DERIVED`] because both sides are themselves derived quantities.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// ΔA below this counts as an eigenstate: the orthogonal Vaidman state is
/// undefined and the anomalous part is exactly zero.
pub const EIGENSTATE_DELTA: f64 = 1e-10;

/// Default minimum |⟨φ|ψ⟩| accepted when building a PPS ensemble.
pub const OVERLAP_THRESHOLD: f64 = 1e-9;

/// Below this overlap the anomalous part amplifies rounding as 1/|⟨φ|ψ⟩|
/// enough to deserve a conditioning warning.
pub const OVERLAP_WARN: f64 = 1e-6;

/// Resolution-of-identity terms with weight |⟨ψ|ψ_k⟩|² below this are
/// recorded as skipped with contribution exactly zero (limit convention:
/// weight·value → 0 as the overlap vanishes).
pub const WEIGHT_SKIP: f64 = 1e-14;

/// Convergence ratio band asserted for the first-order meter residuals:
/// r(g)/r(g/2) of a second-order residual sits at 4.
pub const RATIO_LO: f64 = 3.5;
pub const RATIO_HI: f64 = 4.5;

/// Residuals at or below this pass the convergence check outright; the
/// ratio of two rounding-dominated residuals is meaningless.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Guard for the first-order checks: predicted relative corrections must
/// stay below this for "weak coupling" to be a meaningful description.
pub const WEAK_GUARD: f64 = 0.5;

/// Post-selection probabilities below this are treated as numerically null.
pub const P_SELECT_MIN: f64 = 1e-300;
