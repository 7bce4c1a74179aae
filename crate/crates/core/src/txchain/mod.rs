//! Transmitter: four-state quantum symbols, pulse shaping and carving, the
//! carrier-suppressed single-sideband pilot, and dual-polarization framing.

mod frame;
mod pilot;
mod prbs;
mod shaping;
mod symbols;

use serde::{Deserialize, Serialize};

pub use frame::{assemble_frame, photon_energy, quantum_launch_dbm, LaunchBudget};
pub use pilot::{synthesize_pilot, tune_bias_errors, PilotTones};
pub use prbs::Prbs;
pub use shaping::{carving_window, shape_and_carve};
pub use symbols::{alice_values, generate_quantum_symbols, SymbolRecord};

use crate::error::{Error, Result};
use crate::sigcore::FilterSpec;

/// Symbol alphabet of the quantum tributary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// QPSK driven by PRBS bit pairs.
    #[default]
    FourState,
    /// Circular Gaussian alphabet with the same variance.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TxConfig {
    /// Quantum symbol rate R_q in Hz.
    pub symbol_rate: f64,
    /// Pilot offset Ω in Hz.
    pub pilot_frequency: f64,
    pub pulse_shape: FilterSpec,
    pub carving: bool,
    /// Mean photon number per symbol; V_mod = 2⟨n⟩.
    pub mean_photons: f64,
    /// P_Π / P_q in dB.
    pub pilot_to_quantum_db: f64,
    /// Transmit polarization extinction ratio in dB; `inf` disables leakage.
    pub per_tx_db: f64,
    pub prbs_order: u32,
    pub samples_per_symbol: usize,
    /// I/Q arm bias error as a fraction of V_π.
    pub iq_bias_error: f64,
    /// Outer phase-section bias error as a fraction of V_π,φ.
    pub phase_bias_error: f64,
    /// Q-drive amplitude imbalance in dB.
    pub rf_imbalance_db: f64,
    /// Q-drive phase error in degrees.
    pub rf_imbalance_deg: f64,
    /// Pilot drive amplitude in units of V_π.
    pub drive_amplitude: f64,
    pub modulation: Modulation,
}

/// Gaussian pulse bandwidth-time product of the 250 MBd presets.
pub const DEFAULT_GAUSSIAN_BT: f64 = 0.5;

impl Default for TxConfig {
    fn default() -> Self {
        Self {
            symbol_rate: 250e6,
            pilot_frequency: 1e9,
            pulse_shape: FilterSpec::Gaussian { symbol_rate: 250e6, bandwidth_time: DEFAULT_GAUSSIAN_BT },
            carving: true,
            mean_photons: 4.0,
            pilot_to_quantum_db: 20.0,
            per_tx_db: 30.0,
            prbs_order: 7,
            samples_per_symbol: 16,
            iq_bias_error: 0.0,
            phase_bias_error: 0.0,
            rf_imbalance_db: 0.0,
            rf_imbalance_deg: 0.0,
            drive_amplitude: 0.2,
            modulation: Modulation::FourState,
        }
    }
}

impl TxConfig {
    /// Modulation variance V_mod = 2⟨n⟩ in SNU.
    pub fn v_mod(&self) -> f64 {
        2.0 * self.mean_photons
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate * self.samples_per_symbol as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.symbol_rate > 0.0 && self.symbol_rate.is_finite()) {
            return bad(format!("symbol rate must be positive, got {}", self.symbol_rate));
        }
        if self.pilot_frequency <= self.symbol_rate {
            return bad(format!(
                "pilot frequency {} Hz must exceed the symbol rate {} Hz",
                self.pilot_frequency, self.symbol_rate
            ));
        }
        if !(self.mean_photons > 0.0 && self.mean_photons.is_finite()) {
            return bad(format!("mean photon number must be positive, got {}", self.mean_photons));
        }
        if self.samples_per_symbol < 2 {
            return bad("need at least 2 samples per symbol".into());
        }
        if self.per_tx_db.is_nan() || self.per_tx_db < 0.0 {
            return bad(format!("PER_TX must be non-negative, got {}", self.per_tx_db));
        }
        if !(self.drive_amplitude > 0.0 && self.drive_amplitude.is_finite()) {
            return bad("pilot drive amplitude must be positive".into());
        }
        Prbs::new(self.prbs_order, 1)?;
        self.pulse_shape.validate()?;
        if let FilterSpec::RaisedCosine { roll_off, .. } = self.pulse_shape {
            if (self.samples_per_symbol as f64) < 2.0 * (1.0 + roll_off) {
                return bad(format!("{} samples per symbol cannot carry roll-off {roll_off}", self.samples_per_symbol));
            }
        }
        Ok(())
    }
}
