//! Declarative scenario files: one TOML document with a section per module.
//!
//! A file may name a built-in `preset`; its own keys are then merged over the
//! preset table by table. Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use cvqkd_core::channel::ChannelConfig;
use cvqkd_core::dsp::DspConfig;
use cvqkd_core::keyrate::FITTED_EFFICIENCY;
use cvqkd_core::planner::{KeyPolicy, RadioPlan};
use cvqkd_core::rxchain::{ElectronicNoiseModel, RxConfig};
use cvqkd_core::txchain::{LaunchBudget, TxConfig};
use cvqkd_core::FilterSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Symbols per run when a scenario does not say otherwise.
pub const DEFAULT_SYMBOLS: usize = 1 << 17;

/// Sample rate of the built-in scenarios. The pilot receiver is modelled up
/// to the resulting Nyquist frequency rather than its full 10 GHz.
pub const SIM_SAMPLE_RATE: f64 = 4e9;

/// Output-referred TIA noise of the 500 MBd presets, in output SNU within
/// the symbol-rate band.
pub const NYQUIST_ELECTRONIC_NOISE: f64 = 0.006;

/// B_Fil of the 500 MBd presets.
pub const NYQUIST_FILTER_BANDWIDTH: f64 = 340e6;

/// Order of the quantum-receiver roll-off in the built-in scenarios.
pub const RECEIVER_RESPONSE_ORDER: u32 = 4;

/// Which transmission the key rates are evaluated at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissionSource {
    /// Fiber transmission implied by the channel configuration.
    #[default]
    Configured,
    /// The estimator's T̂, which also absorbs receiver and filter losses.
    Estimated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecurityConfig {
    pub beta: f64,
    pub efficiency: f64,
    /// Input-referred v_el used for the trusted rate; the calibrated value
    /// when absent.
    pub v_el: Option<f64>,
    pub transmission: TransmissionSource,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        Self { beta: 0.95, efficiency: FITTED_EFFICIENCY, v_el: None, transmission: TransmissionSource::Configured }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub network: RadioPlan,
    pub policy: KeyPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    /// Built-in base scenario this file was merged over.
    pub preset: Option<String>,
    pub tx: TxConfig,
    pub channel: ChannelConfig,
    pub rx: RxConfig,
    pub dsp: DspConfig,
    pub budget: LaunchBudget,
    pub security: SecurityConfig,
    pub planner: PlannerConfig,
    /// One independent run per seed.
    pub seeds: Vec<u64>,
    pub n_symbols: usize,
    /// Length of each calibration capture; `n_symbols` when absent.
    pub calibration_symbols: Option<usize>,
    /// Reuse the signal run's receiver noise in the calibration captures.
    /// Removes shot-noise sampling error from differences between runs that
    /// share a seed, at the cost of correlating calibration and signal.
    pub common_random_numbers: bool,
    pub output_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        preset("table3-dark-250-carved").expect("default preset exists")
    }
}

fn base() -> Scenario {
    let tx = TxConfig::default();
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: String::new(),
        preset: None,
        rx: RxConfig {
            adc_rate: SIM_SAMPLE_RATE,
            bandwidth_pilot: SIM_SAMPLE_RATE / 2.0,
            response_order: RECEIVER_RESPONSE_ORDER,
            ..RxConfig::default()
        },
        channel: ChannelConfig::default(),
        dsp: DspConfig::default(),
        budget: LaunchBudget::default(),
        security: SecurityConfig::default(),
        planner: PlannerConfig::default(),
        seeds: vec![1],
        n_symbols: DEFAULT_SYMBOLS,
        calibration_symbols: None,
        common_random_numbers: false,
        output_dir: PathBuf::from("out"),
        tx: TxConfig { samples_per_symbol: (SIM_SAMPLE_RATE / tx.symbol_rate) as usize, ..tx },
    }
}

fn nyquist(mut s: Scenario) -> Scenario {
    let rate = 500e6;
    s.tx.symbol_rate = rate;
    s.tx.pulse_shape = FilterSpec::RaisedCosine { symbol_rate: rate, roll_off: 0.5 };
    s.tx.carving = false;
    s.tx.samples_per_symbol = (SIM_SAMPLE_RATE / rate) as usize;
    s.rx.electronic_noise_model = ElectronicNoiseModel::OutputReferred;
    s.rx.electronic_noise = NYQUIST_ELECTRONIC_NOISE;
    s.dsp.filter_bandwidth = NYQUIST_FILTER_BANDWIDTH;
    s
}

fn lit(mut s: Scenario) -> Scenario {
    s.channel.classical_channels = 11;
    s
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 5] = [
    "table3-dark-250-carved",
    "table3-lit-250-carved",
    "table3-dark-500-nyquist",
    "table3-lit-500-nyquist",
    "loopback",
];

pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        "table3-dark-250-carved" => base(),
        "table3-lit-250-carved" => lit(base()),
        "table3-dark-500-nyquist" => nyquist(base()),
        "table3-lit-500-nyquist" => lit(nyquist(base())),
        "loopback" => loopback(),
        _ => return None,
    };
    Some(Scenario { name: name.to_string(), preset: Some(name.to_string()), ..s })
}

/// Impairment-free back-to-back link: unit transmission, no noise, no
/// phase drift, flat receiver, ideal ADC, zero-ISI pulses.
fn loopback() -> Scenario {
    let mut s = base();
    s.tx.pulse_shape = FilterSpec::RaisedCosine { symbol_rate: s.tx.symbol_rate, roll_off: 0.5 };
    s.tx.carving = false;
    s.tx.per_tx_db = f64::INFINITY;
    s.channel = ChannelConfig {
        length_km: 0.0,
        linewidth_tx: 0.0,
        linewidth_lo: 0.0,
        raman_noise_photons: 0.0,
        excess_noise: 0.0,
        ..ChannelConfig::default()
    };
    s.rx.shot_noise_on = false;
    s.rx.electronic_noise = 0.0;
    s.rx.bandwidth_quantum = s.rx.bandwidth_pilot;
    s.rx.adc_bits = 0;
    s.dsp.filter_bandwidth = SIM_SAMPLE_RATE / 2.0;
    s
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "schema_version {} unsupported, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Schema("seeds must not be empty".into()));
        }
        if self.n_symbols < cvqkd_core::estimator::MIN_SYMBOLS {
            return Err(CliError::Schema(format!(
                "n_symbols {} below the estimator minimum {}",
                self.n_symbols,
                cvqkd_core::estimator::MIN_SYMBOLS
            )));
        }
        let checks = [self.tx.validate(), self.channel.validate(), self.rx.validate(), self.dsp.validate()];
        for c in checks {
            c.map_err(|e| CliError::Schema(e.to_string()))?;
        }
        if self.tx.sample_rate() < 2.0 * self.rx.bandwidth_pilot * (1.0 - 1e-12) {
            return Err(CliError::Schema(format!(
                "simulation rate {} Sa/s cannot carry the {} Hz pilot receiver",
                self.tx.sample_rate(),
                self.rx.bandwidth_pilot
            )));
        }
        Ok(())
    }

    pub fn calibration_symbols(&self) -> usize {
        if self.common_random_numbers {
            self.n_symbols
        } else {
            self.calibration_symbols.unwrap_or(self.n_symbols)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Schema(e.to_string()))?;
        let merged = match doc.get("preset") {
            Some(toml::Value::String(name)) => {
                let base = preset(name).ok_or_else(|| {
                    CliError::Schema(format!("unknown preset `{name}`; known: {}", PRESETS.join(", ")))
                })?;
                let mut table = to_table(&base)?;
                merge(&mut table, doc);
                table
            }
            Some(_) => return Err(CliError::Schema("preset must be a string".into())),
            None => {
                let mut table = to_table(&Scenario::default())?;
                // a file without a preset still needs an explicit name
                table.insert("name".into(), toml::Value::String(String::new()));
                table.remove("preset");
                merge(&mut table, doc);
                table
            }
        };
        let s: Scenario =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| CliError::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Schema(e.to_string()))
    }
}

fn to_table(s: &Scenario) -> Result<toml::Table, CliError> {
    match toml::Value::try_from(s).map_err(|e| CliError::Schema(e.to_string()))? {
        toml::Value::Table(t) => Ok(t),
        _ => Err(CliError::Schema("scenario did not serialize to a table".into())),
    }
}

/// Overlays `top` on `base`; nested tables merge, everything else replaces.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            s.validate().unwrap();
            let text = s.to_toml_string().unwrap();
            assert_eq!(Scenario::from_toml_str(&text).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn preset_overrides_merge() {
        let s = Scenario::from_toml_str(
            "schema_version = 1\npreset = \"table3-dark-250-carved\"\n[channel]\nlength_km = 28.4\n",
        )
        .unwrap();
        assert_eq!(s.channel.length_km, 28.4);
        assert_eq!(s.channel.loss_db_per_km, 0.227);
        assert_eq!(s.tx, Scenario::default().tx);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "schema_version = 1\nbogus = 3\n",
            "schema_version = 1\n[rx]\ncmrr = 3.0\n",
            "schema_version = 2\n",
            "schema_version = 1\npreset = \"nope\"\n",
            "schema_version = 1\nseeds = []\n",
        ] {
            assert!(matches!(Scenario::from_toml_str(text), Err(CliError::Schema(_))), "{text}");
        }
    }

    #[test]
    fn defaults_are_the_dark_fiber_case() {
        let s = Scenario::from_toml_str("schema_version = 1\n").unwrap();
        assert_eq!(s.channel.length_km, 13.2);
        assert_eq!(s.tx.symbol_rate, 250e6);
        assert!(s.tx.carving);
        assert_eq!(s.n_symbols, 1 << 17);
    }
}
