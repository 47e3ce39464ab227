//! File formats, instance generators, stats records and commands behind the
//! `zom` binary.

pub mod bench;
pub mod commands;
pub mod format;
pub mod generate;
pub mod stats;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<format::ParseError> for CliError {
    fn from(e: format::ParseError) -> Self {
        CliError::Io(e.to_string())
    }
}
