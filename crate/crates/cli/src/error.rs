//! Stage-level error kinds mapped to process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration (exit 1).
    #[error("{0}")]
    Usage(String),
    /// An upstream stage artifact is missing (exit 2).
    #[error("{0}")]
    MissingPrereq(String),
    #[error(transparent)]
    Core(#[from] fairbench_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::MissingPrereq(_) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// Exit code for runs where some cells failed but the pipeline finished.
pub const EXIT_PARTIAL: i32 = 3;

pub type CliResult<T> = std::result::Result<T, CliError>;
