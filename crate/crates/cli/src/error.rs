use std::io;
use std::path::Path;

use thiserror::Error;

/// Exit codes. Usage errors reported by the argument parser also exit with 2.
pub mod exit {
    pub const INTERNAL: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const IO: u8 = 3;
    pub const SCHEMA: u8 = 4;
    pub const INFEASIBLE: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{0}")]
    Schema(String),

    #[error(transparent)]
    Library(#[from] npchange::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use npchange::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Schema(_) => exit::SCHEMA,
            CliError::Library(e) => match e.root() {
                E::ScanInfeasible { .. } => exit::INFEASIBLE,
                E::InvalidConfig(_) | E::NonStationary(_) => exit::CONFIG,
                E::InvalidSeries(_) | E::DegenerateSample(_) | E::LengthMismatch { .. } => exit::SCHEMA,
                _ => exit::INTERNAL,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
