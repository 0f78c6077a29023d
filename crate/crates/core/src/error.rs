use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}): lower bound must be below upper bound")]
    InvalidInterval { lo: i64, hi: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value at x = {x} has modulus {modulus}, exceeding the 1-bounded limit")]
    NotBounded { x: i64, modulus: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("refinement did not converge after {iterations} iterations (gap {gap:e} above target {target:e})")]
    NonConvergence {
        iterations: usize,
        gap: f64,
        target: f64,
    },

    #[error("extraction failed at the {stage} stage: {message}")]
    Extraction { stage: String, message: String },

    #[error("set element {0} lies outside [1, N]")]
    OutOfRange(i64),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
