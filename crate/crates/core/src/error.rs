use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum QcqpError {
    #[error("matrix is not Hermitian: entry ({row}, {col}) differs from conjugate of ({col}, {row}) by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("non-finite entry at {location}")]
    NonFinite { location: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch { context: String, expected: usize, found: usize },

    #[error("shifted matrix is not positive definite (shift {shift})")]
    NotPositiveDefinite { shift: f64 },

    #[error("constraint index {index} out of range for {count} constraints")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("single-constraint subproblem is infeasible: {reason}")]
    InfeasibleSubproblem { reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("oracle inconclusive: {0}")]
    OracleInconclusive(String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QcqpError>;
