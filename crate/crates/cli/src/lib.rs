//! Command-line front end for the broadcast protocol simulator: scenario
//! configuration, dispatch, and line-delimited JSON reports.

pub mod catalog;
pub mod config;
pub mod report;
pub mod run;

pub use catalog::{lookup, ScenarioInfo, CATALOG};
pub use config::{ModeName, ScenarioConfig};
pub use report::Report;
pub use run::run_scenario;

/// Exit status for invalid input of any kind.
pub const INVALID_INPUT_EXIT: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown scenario `{0}` (try --list)")]
    UnknownScenario(String),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] qbcast_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}
