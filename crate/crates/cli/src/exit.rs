//! Process exit codes and the error type that carries them.

use std::fmt::Display;

use qcqp_admm::QcqpError;

pub const EXIT_DIVERGED: u8 = 2;
pub const EXIT_PARAMETER: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_AUDIT: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn parameter(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARAMETER, message)
    }

    /// For failures reading or writing files, whatever the underlying cause.
    pub fn io(err: impl Display) -> Self {
        Self::new(EXIT_IO, err.to_string())
    }
}

impl From<QcqpError> for CliError {
    fn from(e: QcqpError) -> Self {
        let code = match e {
            QcqpError::Io(_) | QcqpError::Json(_) | QcqpError::MalformedTrace(_) => EXIT_IO,
            _ => EXIT_PARAMETER,
        };
        CliError::new(code, e.to_string())
    }
}
