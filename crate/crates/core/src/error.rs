use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments that do not fit the operation.
    #[error("usage error: {0}")]
    Usage(String),
    /// Input violates a mathematical precondition (unitarity, normalization, completeness).
    #[error("validation error: {0}")]
    Validation(String),
    /// Subsystem dimensions of two inputs do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
