//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dimension {dim}: need at least 2")]
    InvalidDimension { dim: usize },

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    HermiticityViolation { residual: f64 },

    #[error("negative variance radicand {radicand:.3e} signals numerical corruption")]
    NegativeVariance { radicand: f64 },

    #[error("eigendecomposition did not converge")]
    ConvergenceFailure,

    #[error("post-selection is orthogonal to pre-selection (|overlap| {overlap:.3e} <= threshold {threshold:.3e})")]
    OrthogonalPostSelection { overlap: f64, threshold: f64 },

    #[error("relative phase is undefined: the pre-selection is an eigenstate or the interference overlap vanishes")]
    PhaseUndefined,

    #[error("basis is not orthonormal (residual {residual:.3e})")]
    NonOrthonormalBasis { residual: f64 },

    #[error("basis does not resolve the identity (residual {residual:.3e})")]
    IncompleteBasis { residual: f64 },

    #[error("meter configuration invalid: {reason}")]
    ConfigInvalid { reason: String },

    #[error("post-selected state is numerically null (p_select < 1e-300)")]
    ZeroSelectionProbability,

    #[error("weak-coupling guard violated for {check}: predicted relative correction {predicted:.3e} >= 0.5")]
    GuardViolated { check: &'static str, predicted: f64 },

    #[error("inequality '{name}' violated: lhs {lhs:.17e} vs rhs {rhs:.17e}")]
    InequalityViolation {
        name: &'static str,
        lhs: f64,
        rhs: f64,
    },
}
