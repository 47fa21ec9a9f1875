//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the testbench.
///
/// `Usage` and `Sizing` are configuration problems that the command-line
/// front end maps to exit code 2; everything else is a fault in the inputs
/// handed to a numerical routine.
#[derive(Debug, Error)]
pub enum QsepError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sizing error: {0}")]
    Sizing(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, QsepError>;

impl From<serde_json::Error> for QsepError {
    fn from(e: serde_json::Error) -> Self {
        QsepError::Serde(e.to_string())
    }
}

impl From<csv::Error> for QsepError {
    fn from(e: csv::Error) -> Self {
        QsepError::Serde(e.to_string())
    }
}

impl QsepError {
    /// True for errors caused by the caller's configuration rather than by
    /// the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, QsepError::Usage(_) | QsepError::Sizing(_))
    }
}
