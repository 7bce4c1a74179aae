use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

/// Pipeline stage that raised an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Transmit,
    Channel,
    Detect,
    Recover,
    Calibrate,
    Estimate,
    KeyRate,
    Plan,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Transmit => "transmit",
            Stage::Channel => "channel",
            Stage::Detect => "detect",
            Stage::Recover => "recover",
            Stage::Calibrate => "calibrate",
            Stage::Estimate => "estimate",
            Stage::KeyRate => "key-rate",
            Stage::Plan => "plan",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Schema(String),
    #[error("{stage} stage failed (seed {seed}): {source}")]
    Pipeline {
        stage: Stage,
        seed: u64,
        #[source]
        source: cvqkd_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Pipeline { .. } | CliError::Output { .. } => 3,
        }
    }
}
