//! Batch runner for the `quenched` toolkit.
//!
//! One JSON config describes one experiment. `run` validates it, executes
//! it and writes JSON reports, CSV series and a `manifest.json` listing every
//! artifact with its SHA-256, the config hash and the seed record.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{Diagnostic, ExperimentConfig, ExperimentKind, Severity};
pub use run::{run, run_config, validate_file, RunManifest, MANIFEST_FILE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config rejected:\n{}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("assumption failure: {0}")]
    Assumption(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    /// 2 for invalid configs, 3 for violated modelling assumptions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Assumption(_) => 3,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<quenched::Error> for CliError {
    fn from(e: quenched::Error) -> Self {
        use quenched::Error as E;
        match e {
            E::NotTransient { .. } | E::Degenerate(_) | E::Divergent(_) | E::Truncation { .. } => {
                CliError::Assumption(e.to_string())
            }
            E::Domain(_) | E::UnsupportedAnalytic { .. } | E::UnsupportedExact(_) => {
                CliError::Validation(vec![Diagnostic::error("experiment", e.to_string())])
            }
        }
    }
}
