//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A generator spec violates one of its construction constraints.
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("photon index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("state not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("operation unsupported for family {family}: {reason}")]
    UnsupportedFamily { family: &'static str, reason: &'static str },

    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),

    #[error("tridiagonal eigensolver failed to converge (subspace size {size})")]
    EigenFailure { size: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("no return to the initial state found within the sampled range")]
    NoReturnFound,

    #[error("overlap ranking is degenerate: no well-defined top eigenvalue pair")]
    DegenerateRanking,

    #[error(
        "phase-space tail condition violated: probability {leaked:.3e} beyond \
         truncation index {truncation} (limit 1e-12); increase the simulation dimension"
    )]
    TailLeak { leaked: f64, truncation: usize },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("classical trajectory diverges at t* = {t_star}; requested t = {t}")]
    Divergence { t_star: f64, t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Used by sweeps to attach the offending dimension to a nested failure.
    #[error("at dimension N = {dim}: {source}")]
    AtDimension {
        dim: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
