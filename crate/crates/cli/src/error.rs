use std::path::PathBuf;

use thiserror::Error;

/// Exit status for input and validation errors.
pub const EXIT_INPUT: i32 = 1;
/// Exit status when a verification check fails.
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed task file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid task file: {0}")]
    TaskFile(String),
    #[error(transparent)]
    Task(#[from] clonebound::Error),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Every error is an input or validation failure; verification failures
    /// are reported through [`crate::commands::VerifyOutcome`] instead.
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
