//! Scenario files, batch runs and report writing for the `plap` binary.

pub mod report;
pub mod run;
pub mod scenario;
pub mod selftest;
pub mod suite;

use std::path::PathBuf;

pub use report::{Check, Report};
pub use run::{estimate_sobolev_for, run, run_file, RunOptions, RunOutcome};
pub use scenario::{parse_scenario, parse_scenario_str, CheckKind, ParseError, Scenario};
pub use selftest::self_test;
pub use suite::{suite, SuiteSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{source}; the run log is at {}", log.display())]
    Solver { source: plap_core::Error, log: PathBuf },

    #[error(transparent)]
    Core(#[from] plap_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Suite(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
