use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation dimension must be at least 1, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("phase grid with {points} points is too coarse for dimension {dim} (need at least {required})")]
    GridTooCoarse {
        points: usize,
        dim: usize,
        required: usize,
    },

    #[error("truncation tail weight {tail:.3e} exceeds threshold {threshold:.3e}")]
    TailTooLarge { tail: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("trace {trace} deviates from 1 by more than {tolerance:.3e}")]
    TraceMismatch { trace: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("quadrature inadequate: {0}")]
    Quadrature(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors raised while validating numbers, as opposed to
    /// malformed input or I/O failures.
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_)
        )
    }
}
