//! Task files, reports and command implementations behind the `clonebound` binary.

pub mod commands;
pub mod error;
pub mod format;
pub mod report;
pub mod task;

pub use error::{CliError, Result, EXIT_INPUT, EXIT_VERIFY};
