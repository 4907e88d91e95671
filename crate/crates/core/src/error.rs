use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share a length `n` do not.
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// An operation needing `2^n` work was asked to run above the enumeration cap.
    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    Capacity { n: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    /// The fitness function is not injective, so the stability results do not apply.
    #[error("outside theorem scope: fitness function is not injective ({0})")]
    NotInjective(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a bug or I/O failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::Io(_) | Error::Csv(_))
    }
}
