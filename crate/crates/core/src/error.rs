use thiserror::Error;

/// Errors raised by the numerical and training layers.
#[derive(Debug, Error)]
pub enum QbmError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("reference state is singular (min eigenvalue {0:.3e}); relative entropy diverges")]
    SingularReference(f64),

    #[error("eigendecomposition did not converge")]
    EigenFailed,

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization failed: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QbmError>;

impl From<serde_json::Error> for QbmError {
    fn from(err: serde_json::Error) -> Self {
        QbmError::Serialization(err.to_string())
    }
}

impl From<csv::Error> for QbmError {
    fn from(err: csv::Error) -> Self {
        QbmError::Serialization(err.to_string())
    }
}
