use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum QdsError {
    #[error("a phase alphabet needs at least two phases, got {0}")]
    TooFewPhases(usize),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("Gram eigenvalue {value:e} at k = {index} is negative beyond round-off")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("malformed cost matrix: {0}")]
    MalformedCostMatrix(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QdsError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> QdsError {
    QdsError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
