//! Parallel execution of seeds and sweep points, and the report types built
//! from them. Every job is independent; results keep their submission order.

use std::str::FromStr;

use cvqkd_core::rxchain::ClassicalLoad;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::pipeline::{run_seed, RunReport};
use crate::scenario::Scenario;

/// Runs `jobs` on a pool of `workers` threads and returns the results in
/// input order. The first failing job in that order wins.
pub fn run_parallel<T, R, F>(workers: usize, jobs: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, CliError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Schema(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<R, CliError>> = pool.install(|| jobs.par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// Mean of the headline figures over all runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub zeta: f64,
    pub zeta_t: f64,
    pub transmission: f64,
    pub snr: f64,
    pub v_el: f64,
    pub k_s: f64,
    pub k_t: f64,
}

impl Summary {
    /// Noise figures are input-referred.
    pub fn of(runs: &[RunReport]) -> Self {
        let n = runs.len().max(1) as f64;
        let mean = |f: &dyn Fn(&RunReport) -> f64| runs.iter().map(f).sum::<f64>() / n;
        Self {
            runs: runs.len(),
            zeta: mean(&|r| r.estimate.zeta_input),
            zeta_t: mean(&|r| r.estimate.zeta_t_input),
            transmission: mean(&|r| r.estimate.transmission),
            snr: mean(&|r| r.estimate.snr),
            v_el: mean(&|r| r.estimate.v_el_input),
            k_s: mean(&|r| r.key_rates.k_s),
            k_t: mean(&|r| r.key_rates.k_t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub summary: Summary,
    pub runs: Vec<RunReport>,
}

pub fn run_scenario(s: &Scenario, workers: usize) -> Result<ScenarioReport, CliError> {
    s.validate()?;
    let runs = run_parallel(workers, &s.seeds, |&seed| run_seed(s, seed))?;
    Ok(ScenarioReport { scenario: s.clone(), summary: Summary::of(&runs), runs })
}

/// Scenario fields a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// DSP low-pass B_Fil in Hz.
    FilterBandwidth,
    /// Fixed decision offset in seconds.
    DecisionOffset,
    /// Quantum-receiver CMRR in dB; enables the default classical load when
    /// none is configured.
    Cmrr,
    /// Polarization misalignment in radians.
    DeltaSop,
    LengthKm,
    ClassicalChannels,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        SweepParameter::FilterBandwidth,
        SweepParameter::DecisionOffset,
        SweepParameter::Cmrr,
        SweepParameter::DeltaSop,
        SweepParameter::LengthKm,
        SweepParameter::ClassicalChannels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::FilterBandwidth => "b_fil",
            SweepParameter::DecisionOffset => "decision_offset",
            SweepParameter::Cmrr => "cmrr",
            SweepParameter::DeltaSop => "delta_sop",
            SweepParameter::LengthKm => "length_km",
            SweepParameter::ClassicalChannels => "classical_channels",
        }
    }

    pub fn apply(self, s: &Scenario, value: f64) -> Result<Scenario, CliError> {
        let mut s = s.clone();
        match self {
            SweepParameter::FilterBandwidth => s.dsp.filter_bandwidth = value,
            SweepParameter::DecisionOffset => s.dsp.decision_offset = Some(value),
            SweepParameter::Cmrr => {
                s.rx.cmrr_q_db = value;
                s.rx.classical_load.get_or_insert_with(ClassicalLoad::default);
            }
            SweepParameter::DeltaSop => s.channel.delta_sop = value,
            SweepParameter::LengthKm => s.channel.length_km = value,
            SweepParameter::ClassicalChannels => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(CliError::Schema(format!("channel count must be a whole number, got {value}")));
                }
                s.channel.classical_channels = value as u32;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

impl FromStr for SweepParameter {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            CliError::Schema(format!("unknown sweep parameter `{s}`; known: {}", known.join(", ")))
        })
    }
}

/// One tidy row per sweep value and seed; noise figures input-referred.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub seed: u64,
    pub zeta: f64,
    pub zeta_t: f64,
    pub k_s: f64,
    pub k_t: f64,
    pub snr: f64,
}

pub fn sweep(
    s: &Scenario,
    parameter: SweepParameter,
    values: &[f64],
    workers: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let scenarios = values.iter().map(|&v| parameter.apply(s, v)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, u64)> = (0..values.len()).flat_map(|i| s.seeds.iter().map(move |&seed| (i, seed))).collect();
    run_parallel(workers, &jobs, |&(i, seed)| {
        let r = run_seed(&scenarios[i], seed)?;
        Ok(SweepRow {
            parameter,
            value: values[i],
            seed,
            zeta: r.estimate.zeta_input,
            zeta_t: r.estimate.zeta_t_input,
            k_s: r.key_rates.k_s,
            k_t: r.key_rates.k_t,
            snr: r.estimate.snr,
        })
    })
}
