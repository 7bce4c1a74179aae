//! Scenario orchestration for the CV-QKD link simulator: scenario files,
//! end-to-end runs, sweeps, regression tables and report artifacts.

pub mod error;
pub mod pipeline;
pub mod regression;
pub mod report;
pub mod runner;
pub mod scenario;

pub use error::{CliError, Stage};
pub use runner::{run_scenario, sweep, ScenarioReport, SweepParameter};
pub use scenario::{preset, Scenario};
