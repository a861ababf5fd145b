//! Process-level error classification. Exit codes: 0 success, 2
//! configuration error, 3 numerical tolerance failure, 4 internal error.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Maps a library computation error onto the numerical-failure class.
pub fn num<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}
