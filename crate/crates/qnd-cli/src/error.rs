//! Process-level error taxonomy; each variant maps to a documented exit
//! code (0 success, 1 runtime, 2 config validation, 3 validation suite).

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation suite failed: {failed} of {total} checks out of tolerance")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 1,
            CliError::ValidationFailed { .. } => 3,
        }
    }
}
