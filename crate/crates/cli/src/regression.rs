//! Reference figures for a 13.2 km link and the comparison runs against
//! them, either through the full waveform chain or a symbol-level channel
//! with the same noise budget.

use cvqkd_core::channel::{fiber_transmission, ChannelConfig, SymbolChannel};
use cvqkd_core::estimator::{estimate_four_state, CalibrationSet};
use cvqkd_core::keyrate::{fit_efficiency, key_rates, SecurityParams};
use cvqkd_core::txchain::{alice_values, generate_quantum_symbols, TxConfig};
use serde::Serialize;

use crate::error::{CliError, Stage};
use crate::runner::{run_parallel, run_scenario};
use crate::scenario::{preset, SecurityConfig, TransmissionSource};

/// Measured operating point of one link configuration. Noise in
/// input-referred SNU, rates in bit/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceColumn {
    pub name: &'static str,
    pub symbol_rate: f64,
    pub zeta: f64,
    pub zeta_t: f64,
    pub snr: f64,
    pub k_s: f64,
    pub k_t: f64,
}

pub const REFERENCE: [ReferenceColumn; 4] = [
    ReferenceColumn {
        name: "table3-dark-250-carved",
        symbol_rate: 250e6,
        zeta: 0.01446,
        zeta_t: 0.00092,
        snr: 0.28,
        k_s: 12e6,
        k_t: 43.2e6,
    },
    ReferenceColumn {
        name: "table3-lit-250-carved",
        symbol_rate: 250e6,
        zeta: 0.01683,
        zeta_t: 0.00329,
        snr: 0.12,
        k_s: 9.59e6,
        k_t: 38.9e6,
    },
    ReferenceColumn {
        name: "table3-dark-500-nyquist",
        symbol_rate: 500e6,
        zeta: 0.01721,
        zeta_t: 0.00115,
        snr: 0.16,
        k_s: 18.4e6,
        k_t: 85.3e6,
    },
    ReferenceColumn {
        name: "table3-lit-500-nyquist",
        symbol_rate: 500e6,
        zeta: 0.0212,
        zeta_t: 0.00514,
        snr: 0.17,
        k_s: 10.7e6,
        k_t: 72e6,
    },
];

/// Nuisance parameters not given by the reference data, fitted once on the
/// first column and held for all others.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Nuisance {
    /// Input-referred v_el = ζ − ζ_T.
    pub v_el: f64,
    /// Detection efficiency reproducing the first column's K_S.
    pub efficiency: f64,
}

pub fn reference_transmission() -> f64 {
    fiber_transmission(&ChannelConfig::default())
}

pub fn fit_nuisance(beta: f64) -> Result<Nuisance, CliError> {
    let c = REFERENCE[0];
    let p = SecurityParams {
        beta,
        v_mod: 8.0,
        transmission: reference_transmission(),
        zeta: c.zeta,
        zeta_t: c.zeta_t,
        v_el: c.zeta - c.zeta_t,
        symbol_rate: c.symbol_rate,
        efficiency: 1.0,
    };
    let efficiency =
        fit_efficiency(&p, c.k_s).map_err(|source| CliError::Pipeline { stage: Stage::KeyRate, seed: 0, source })?;
    Ok(Nuisance { v_el: c.zeta - c.zeta_t, efficiency })
}

/// One regenerated column next to its reference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table3Row {
    pub column: String,
    pub zeta: f64,
    pub zeta_t: f64,
    pub transmission: f64,
    pub snr: f64,
    pub v_el: f64,
    pub k_s: f64,
    pub k_t: f64,
    pub reference_zeta: f64,
    pub reference_zeta_t: f64,
    pub reference_k_s: f64,
    pub reference_k_t: f64,
}

impl Table3Row {
    fn new(c: &ReferenceColumn, zeta: f64, zeta_t: f64, transmission: f64, snr: f64, v_el: f64) -> Self {
        Self {
            column: c.name.to_string(),
            zeta,
            zeta_t,
            transmission,
            snr,
            v_el,
            k_s: 0.0,
            k_t: 0.0,
            reference_zeta: c.zeta,
            reference_zeta_t: c.zeta_t,
            reference_k_s: c.k_s,
            reference_k_t: c.k_t,
        }
    }

    pub fn k_s_error(&self) -> f64 {
        self.k_s / self.reference_k_s - 1.0
    }

    pub fn k_t_error(&self) -> f64 {
        self.k_t / self.reference_k_t - 1.0
    }
}

/// Settings of the symbol-level regression.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolLevelConfig {
    pub trials: usize,
    pub n_symbols: usize,
    pub calibration_samples: usize,
    pub first_seed: u64,
    pub beta: f64,
}

impl Default for SymbolLevelConfig {
    fn default() -> Self {
        Self { trials: 32, n_symbols: 1 << 20, calibration_samples: 1 << 20, first_seed: 1, beta: 0.95 }
    }
}

/// Injects each column's noise budget into a symbol-level channel at the
/// reference transmission: TIA noise v_el from the nuisance fit and channel
/// noise ζ − v_el. Estimates are averaged over the trials before the key
/// rates are evaluated with the fitted efficiency.
pub fn symbol_level_table3(cfg: &SymbolLevelConfig, workers: usize) -> Result<(Nuisance, Vec<Table3Row>), CliError> {
    let nuisance = fit_nuisance(cfg.beta)?;
    let t = reference_transmission();
    let tx = TxConfig::default();
    let jobs: Vec<(usize, u64)> = (0..REFERENCE.len())
        .flat_map(|c| (0..cfg.trials as u64).map(move |k| (c, cfg.first_seed + 1000 * c as u64 + k)))
        .collect();
    let estimates = run_parallel(workers, &jobs, |&(c, seed)| {
        let col = &REFERENCE[c];
        let err = |stage| move |source| CliError::Pipeline { stage, seed, source };
        let alice = alice_values(&generate_quantum_symbols(&tx, cfg.n_symbols, seed).map_err(err(Stage::Transmit))?);
        let ch = SymbolChannel {
            transmission: t,
            excess_noise: col.zeta - nuisance.v_el,
            electronic_noise: nuisance.v_el / 2.0,
            seed,
        };
        let bob = ch.transmit(&alice);
        let (shot, elec) = ch.calibration(cfg.calibration_samples);
        let cal = CalibrationSet::from_samples(&shot, &elec).map_err(err(Stage::Calibrate))?;
        Ok(estimate_four_state(&alice, &bob, &cal).map_err(err(Stage::Estimate))?.value)
    })?;
    let mut rows = Vec::new();
    for (c, col) in REFERENCE.iter().enumerate() {
        let mine: Vec<_> = jobs.iter().zip(&estimates).filter(|((j, _), _)| *j == c).map(|(_, e)| e).collect();
        let n = mine.len() as f64;
        let mean =
            |f: &dyn Fn(&cvqkd_core::estimator::NoiseEstimate) -> f64| mine.iter().map(|e| f(e)).sum::<f64>() / n;
        let mut row = Table3Row::new(
            col,
            mean(&|e| e.zeta_input),
            mean(&|e| e.zeta_t_input),
            mean(&|e| e.transmission),
            mean(&|e| e.snr),
            mean(&|e| e.v_el_input),
        );
        rate_row(&mut row, col, t, cfg.beta, nuisance.efficiency)?;
        rows.push(row);
    }
    Ok((nuisance, rows))
}

fn rate_row(
    row: &mut Table3Row,
    col: &ReferenceColumn,
    transmission: f64,
    beta: f64,
    efficiency: f64,
) -> Result<(), CliError> {
    let p = SecurityParams {
        beta,
        v_mod: 8.0,
        transmission: transmission.min(1.0),
        zeta: row.zeta.max(0.0),
        zeta_t: row.zeta_t.max(0.0),
        v_el: row.v_el.max(0.0),
        symbol_rate: col.symbol_rate,
        efficiency,
    };
    let r = key_rates(&p).map_err(|source| CliError::Pipeline { stage: Stage::KeyRate, seed: 0, source })?;
    row.k_s = r.k_s;
    row.k_t = r.k_t;
    Ok(())
}

/// Runs each column's preset through the waveform chain, over the given
/// seeds, and rates the mean estimates.
pub fn waveform_table3(seeds: &[u64], security: &SecurityConfig, workers: usize) -> Result<Vec<Table3Row>, CliError> {
    let mut rows = Vec::new();
    for col in &REFERENCE {
        let mut s = preset(col.name).expect("reference columns name presets");
        s.seeds = seeds.to_vec();
        s.security = security.clone();
        let report = run_scenario(&s, workers)?;
        let m = &report.summary;
        let mut row = Table3Row::new(col, m.zeta, m.zeta_t, m.transmission, m.snr, m.v_el);
        let t = match security.transmission {
            TransmissionSource::Configured => fiber_transmission(&s.channel),
            TransmissionSource::Estimated => m.transmission,
        };
        rate_row(&mut row, col, t, security.beta, security.efficiency)?;
        rows.push(row);
    }
    Ok(rows)
}
