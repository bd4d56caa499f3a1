//! Distribution-free hypothesis tests for the regression function of binary
//! classification.
//!
//! Two tests are provided, built on a shared label-resampling rank framework:
//!
//! * **VVKT** — fits a regularized conditional kernel mean map estimator in a
//!   vector-valued RKHS (coefficients solve `(K + lambda I) C = L`) on each
//!   dataset and compares it to the closed-form map of the candidate.
//! * **PET** — plugs a conditional probability estimator (kNN) into the
//!   closed-form map instead.
//!
//! In both cases the candidate is accepted when the rank of the original
//! sample among `m - 1` resampled alternatives falls inside a user-chosen
//! window, which under the null happens with probability exactly
//! `(q_hi - p_lo + 1) / m` for any sample size and any data distribution.
//!
//! The [`harness`] module adds Monte Carlo calibration, candidate-grid and
//! consistency-curve experiments with CSV output; the `embtest` binary
//! exposes them as CLI subcommands.

pub mod datagen;
pub mod embedding;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod kernels;
pub mod resampling;

pub use error::{Error, Result};

/// A candidate regression function, mapping input points into `[-1, 1]`.
pub trait RegressionFn: Sync {
    fn value(&self, x: &[f64]) -> f64;
}

impl<F> RegressionFn for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}
