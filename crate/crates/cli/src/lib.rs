//! Configuration, check suite and subcommands behind the `hs-vanish` binary.

pub mod checks;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {field}: {msg}")]
    Config { field: String, msg: String },

    #[error("cannot write {}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },

    #[error(transparent)]
    Compute(#[from] hs_vanish::Error),

    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 0 success, 1 failed check or computation, 2 bad configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}
