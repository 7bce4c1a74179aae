use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the simulation and analysis stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("launch budget violated: {0}")]
    Budget(BudgetViolation),
    #[error("shaped bandwidth {bandwidth:.4e} Hz exceeds the Nyquist frequency {nyquist:.4e} Hz")]
    Aliasing { bandwidth: f64, nyquist: f64 },
    #[error("length or rate mismatch: {0}")]
    Mismatch(String),
    #[error("frequency-offset estimation failed: {0}")]
    FrequencyEstimation(String),
    #[error("decision-point search failed: {0}")]
    DecisionSearch(String),
    #[error("symbol alignment failed: peak correlation {0:.3} below 0.1")]
    Alignment(f64),
    #[error("SNU calibration failed: {0}")]
    Calibration(String),
    #[error("channel is dead: fitted amplitude transmission |t| = {0:.3e}")]
    DeadChannel(f64),
    #[error("unphysical covariance matrix: symplectic eigenvalue {0} < 1")]
    Unphysical(f64),
    #[error("malformed waveform container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Which launch-power inequality failed, with the offending values in dBm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BudgetViolation {
    /// `S_q < P_q` failed.
    QuantumBelowSensitivity { launch_dbm: f64, sensitivity_dbm: f64 },
    /// `P_q < P_Eve` failed.
    QuantumAboveEavesdropperBound { launch_dbm: f64, bound_dbm: f64 },
    /// `P_Eve <= P_Sat / 10` failed.
    EavesdropperNearSaturation { eve_dbm: f64, saturation_dbm: f64 },
    /// `S_pi + SNR < P_pi` failed.
    PilotBelowSensitivity { launch_dbm: f64, required_dbm: f64 },
    /// `P_pi < P_Ov` failed.
    PilotOverload { launch_dbm: f64, overload_dbm: f64 },
}

impl fmt::Display for BudgetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::QuantumBelowSensitivity { launch_dbm, sensitivity_dbm } => write!(
                f,
                "S_q < P_q: quantum launch {launch_dbm:.2} dBm not above sensitivity {sensitivity_dbm:.2} dBm"
            ),
            Self::QuantumAboveEavesdropperBound { launch_dbm, bound_dbm } => {
                write!(f, "P_q < P_Eve: quantum launch {launch_dbm:.2} dBm not below {bound_dbm:.2} dBm")
            }
            Self::EavesdropperNearSaturation { eve_dbm, saturation_dbm } => {
                write!(f, "P_Eve << P_Sat: {eve_dbm:.2} dBm is within 10 dB of saturation {saturation_dbm:.2} dBm")
            }
            Self::PilotBelowSensitivity { launch_dbm, required_dbm } => {
                write!(f, "S_pi + SNR < P_pi: pilot launch {launch_dbm:.2} dBm not above {required_dbm:.2} dBm")
            }
            Self::PilotOverload { launch_dbm, overload_dbm } => {
                write!(f, "P_pi < P_Ov: pilot launch {launch_dbm:.2} dBm not below overload {overload_dbm:.2} dBm")
            }
        }
    }
}

/// Non-fatal conditions reported alongside a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// Low-pass cutoff at or beyond Nyquist; the filter was skipped.
    FilterBeyondNyquist { cutoff: f64, nyquist: f64 },
    /// Modulator drive beyond 2 V_pi; the cosine transfer is still evaluated.
    DriveNonlinear { amplitude: f64 },
    /// ADC samples beyond full scale were clipped.
    AdcSaturation { trace: String, clipped: usize },
    /// Requested resampling instants fell outside the trace.
    ResampleTruncated { dropped: usize },
    /// Pilot too weak for a reliable phase estimate over a span of samples.
    LowPilotConfidence { start: usize, end: usize },
    /// Estimated excess noise sits at the unphysical floor.
    UnphysicalEstimate { zeta: f64 },
}

/// A value with the warnings raised while producing it.
#[derive(Clone, Debug)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn with(value: T, warnings: Vec<Warning>) -> Self {
        Self { value, warnings }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Flagged<U> {
        Flagged { value: f(self.value), warnings: self.warnings }
    }

    /// Moves the warnings into `sink` and returns the bare value.
    pub fn drain_into(self, sink: &mut Vec<Warning>) -> T {
        sink.extend(self.warnings);
        self.value
    }
}
