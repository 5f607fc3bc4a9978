//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by numerics, problem builders, solvers, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (left {left}, right {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("SVD did not converge after {sweeps} sweeps (max off-diagonal ratio {residual:.3e})")]
    SvdNoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver diverged at iteration {k}: {reason}")]
    Diverged { k: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inner proximal solve failed: {0}")]
    ProxSolve(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("malformed row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("missing optimum hint: {0}")]
    MissingOptimum(&'static str),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
