//! Probabilistic description of experiments on finite information spaces.
//!
//! A system is specified before an experiment by an *information state*: a
//! finite labeled space together with a normalization class of nonnegative
//! weight vectors. An experiment is a *generalized observable*: a
//! column-stochastic Markov kernel from information points to outcomes.
//! On top of that substrate the crate builds:
//!
//! - the kernel calculus (image, trivial, marginal, product, pullback,
//!   pushforward observables) in [`observable`];
//! - non-destructive experiments with compound outcomes, posterior
//!   conditioning and sequential composition in [`instrument`];
//! - mean-state statistics over vector-embedded spaces in [`mean_state`];
//! - a finite-dimensional quantum specialization (density matrices, POVMs,
//!   Kraus instruments, Choi-matrix positivity) in [`quantum`];
//! - a seeded Monte Carlo sampler and a JSON pipeline runner that
//!   cross-checks every closed form against empirical frequencies in
//!   [`sampling`] and [`harness`].
//!
//! All spaces are finite; every value is immutable after construction and
//! safe to share between threads.

// kernel arithmetic reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod harness;
pub mod instrument;
pub mod mean_state;
pub mod measure;
pub mod observable;
pub mod quantum;
pub mod sampling;
pub mod space;
pub mod testing;

pub use error::Error;
pub use instrument::{ExtendedObservable, InstrumentMap};
pub use mean_state::{ConvexRelation, EmbeddedSpace, MeanState};
pub use measure::{FiniteMeasure, InformationState};
pub use observable::{ExperimentOracle, GeneralizedObservable};
pub use space::{Event, FiniteSpace};

pub type Result<T> = std::result::Result<T, Error>;

use std::sync::atomic::{AtomicU64, Ordering};

/// Default absolute tolerance for normalization and equality checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3D719799812DEA11);

/// Library-wide absolute tolerance (defaults to [`DEFAULT_TOLERANCE`]).
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

/// Overrides the library-wide tolerance. Intended for process startup
/// (the CLI maps the `MEASUREKIT_TOLERANCE` environment variable here);
/// changing it mid-computation is not supported.
pub fn set_tolerance(tol: f64) {
    assert!(tol.is_finite() && tol > 0.0, "tolerance must be positive");
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

#[cfg(test)]
mod tolerance_tests {
    #[test]
    fn default_bits_decode_to_1e_minus_12() {
        assert_eq!(super::tolerance(), 1e-12);
        assert_eq!(super::DEFAULT_TOLERANCE.to_bits(), 0x3D719799812DEA11);
    }
}
