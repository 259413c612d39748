//! Weak values of quantum observables in pre- and post-selected (PPS) ensembles.
//!
//! A weak value ⟨A⟩_w = ⟨φ|A|ψ⟩/⟨φ|ψ⟩ is the complex quantity that governs the
//! first-order pointer response when an observable `A` is coupled weakly to a
//! meter between preparation of |ψ⟩ and post-selection on |φ⟩. Unlike an
//! expectation value it can be complex and can lie far outside the spectrum
//! of `A`.
//!
//! The crate is organised in three layers:
//!
//! - [`hilbert`] — states, Hermitian observables with cached eigensystems,
//!   tensor products, and seeded random sampling over small dense Hilbert
//!   spaces.
//! - [`weakvalue`] — the analytical core: the split of a weak value into the
//!   ordinary average plus an anomalous interference term, the phase analysis
//!   of that term, resolution-of-identity averages, two-sided anomaly bounds,
//!   and the tradeoff relation for non-commuting observables.
//! - [`meter`] — an exact von Neumann pointer simulation (joint evolution
//!   under e^{−igA⊗M} on a periodic grid, post-selection, pointer moments)
//!   used to validate the first-order weak-value predictions against exact
//!   dynamics.
//!
//! All types are immutable after construction and all operations are pure
//! functions, so everything here is safe to share across threads.

#![forbid(unsafe_code)]

pub(crate) mod cser;
pub mod error;
pub mod hilbert;
pub mod meter;
pub mod tol;
pub mod weakvalue;

pub use error::{Error, Result};
pub use hilbert::{Observable, RngSeed, State};
pub use weakvalue::PpsEnsemble;

/// Complex scalar used throughout: double-precision `a + bi`.
pub type C64 = num_complex::Complex64;
