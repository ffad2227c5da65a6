//! Configuration-driven experiment runner: parses TOML configs, dispatches to the
//! `fracconv` modules, and writes CSV data, plot scripts and JSON pass/fail reports.

pub mod acceptance;
pub mod config;
mod experiments;
pub mod io;
pub mod plots;
pub mod report;
pub mod runner;

pub use config::{validate_config, validate_config_as, ConfigErrors, ExperimentConfig, ExperimentKind, ValidatedConfig, Violation};
pub use report::{Check, CriterionReport, RunReport};
pub use runner::{run_experiment, run_validated, RunOptions, RunOutcome};

use std::fmt::Display;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),

    #[error("{context}: {source}")]
    Compute {
        context: String,
        #[source]
        source: fracconv::Error,
    },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: e.to_string() }
    }
}

/// Attaches the pipeline stage to core errors.
pub trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for fracconv::Result<T> {
    fn ctx(self, context: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Compute { context: context.to_string(), source })
    }
}
