//! Command-line front end for the `nsalpha` solvers: configuration schema,
//! run modes, artifact persistence and the verification suite.

pub mod config;
pub mod manifest;
pub mod run;
pub mod verify;

use std::path::PathBuf;

pub use config::{parse_config, ConfigErrors, ConfigIssue, Mode, RunConfig};
pub use manifest::Manifest;
pub use run::{load_config, run, RunSummary};

/// Failure of a run, mapped onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("solver failure: {0}")]
    Solver(#[from] nsalpha_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for validation problems, 2 for solver and I/O failures. A failed
    /// verification is not an error; see [`RunSummary::exit_code`].
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io { .. } => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
