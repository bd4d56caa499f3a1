use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid label {0}: labels must be -1 or +1")]
    InvalidLabel(i8),

    #[error("invalid candidate: f(x) = {0} lies outside [-1, 1]")]
    InvalidCandidate(f64),

    #[error("invalid regularization: lambda = {0} must be positive")]
    InvalidRegularization(f64),

    #[error("invalid kernel bandwidth: sigma = {0} must be positive")]
    InvalidBandwidth(f64),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: K + lambda*I not positive definite (smallest pivot {smallest_pivot:e})")]
    NotPositiveDefinite { smallest_pivot: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
