use thiserror::Error;

/// Errors raised by constructors and protocol simulations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("norm violation: {what} has norm {norm} (allowed {bound})")]
    Norm { what: String, norm: f64, bound: String },

    #[error("inadmissible parameters: {0}")]
    Admissibility(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("protocol failure: {0}")]
    ProtocolFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
