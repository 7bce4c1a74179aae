use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqkd::error::{CliError, Stage};
use cvqkd::pipeline::{calibrate, receive, transmit};
use cvqkd::regression::{symbol_level_table3, waveform_table3, SymbolLevelConfig};
use cvqkd::report::{runs_csv, sweep_csv, table3_csv, Bundle};
use cvqkd::runner::{run_parallel, run_scenario, sweep, SweepParameter};
use cvqkd::scenario::{preset, Scenario, PRESETS};
use cvqkd_core::planner::dimension;
use cvqkd_core::sigcore::io::write_waveform;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cvqkd", version, about = "Pilot-disciplined CV-QKD link simulator")]
struct Cli {
    /// Worker threads for seeds and sweep points.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; the scenario's `output_dir` when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the scenario's seed list with this single seed.
    #[arg(long)]
    seed_override: Option<u64>,
}

impl Source {
    fn resolve(&self) -> Result<(Scenario, PathBuf), CliError> {
        let mut s = match (&self.scenario, &self.preset) {
            (Some(path), _) => Scenario::load(path)?,
            (None, Some(name)) => preset(name)
                .ok_or_else(|| CliError::Schema(format!("unknown preset `{name}`; known: {}", PRESETS.join(", "))))?,
            (None, None) => return Err(CliError::Schema("one of --scenario or --preset is required".into())),
        };
        if let Some(seed) = self.seed_override {
            s.seeds = vec![seed];
        }
        let out = self.out.clone().unwrap_or_else(|| s.output_dir.clone());
        Ok((s, out))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportStage {
    /// Launched frame.
    Tx,
    /// Frame at the receiver input.
    Rx,
    /// Digitized receiver traces.
    Capture,
}

#[derive(Subcommand)]
enum Command {
    /// Shot-noise and electronic-noise calibration captures.
    Calibrate(Source),
    /// Full pipeline for every seed.
    Run(Source),
    /// One pipeline run per parameter value and seed.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// b_fil, decision_offset, cmrr, delta_sop, length_km or classical_channels.
        #[arg(long)]
        parameter: String,
        /// Comma-separated values in SI units.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
    },
    /// Regenerate the 13.2 km reference table.
    Table3 {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Use the symbol-level channel instead of full waveforms.
        #[arg(long)]
        symbol_level: bool,
        /// Trials per column for the symbol-level run.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Key-supply dimensioning of the scenario's network.
    Plan(Source),
    /// Write waveforms of the first seed in the binary container format.
    ExportWaveform {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "capture")]
        stage: ExportStage,
    },
}

#[derive(Serialize)]
struct CalibrationRecord {
    seed: u64,
    decision_offset: f64,
    shot_var: f64,
    elec_var: f64,
    n_samples: usize,
    v_el: f64,
    v_el_input: f64,
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    scenario: &'a Scenario,
    #[serde(flatten)]
    body: T,
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let mut bundle = Bundle::default();
    let out = match cli.command {
        Command::Calibrate(src) => {
            let (s, out) = src.resolve()?;
            let tau = s.dsp.decision_offset.unwrap_or(0.0);
            let records = run_parallel(workers, &s.seeds, |&seed| {
                let c = calibrate(&s, seed, tau)?;
                Ok(CalibrationRecord {
                    seed,
                    decision_offset: tau,
                    shot_var: c.shot_var,
                    elec_var: c.elec_var,
                    n_samples: c.n_samples,
                    v_el: c.v_el(),
                    v_el_input: 2.0 * c.v_el(),
                })
            })?;
            #[derive(Serialize)]
            struct Body {
                calibrations: Vec<CalibrationRecord>,
            }
            bundle.json("calibration.json", &Wrapped { scenario: &s, body: Body { calibrations: records } })?;
            out
        }
        Command::Run(src) => {
            let (s, out) = src.resolve()?;
            let report = run_scenario(&s, workers)?;
            bundle.text("runs.csv", runs_csv(&report));
            bundle.json("report.json", &report)?;
            out
        }
        Command::Sweep { source, parameter, values } => {
            let (s, out) = source.resolve()?;
            let p: SweepParameter = parameter.parse()?;
            let rows = sweep(&s, p, &values, workers)?;
            bundle.text("sweep.csv", sweep_csv(&rows));
            #[derive(Serialize)]
            struct Body<'a> {
                parameter: SweepParameter,
                values: &'a [f64],
                rows: &'a [cvqkd::runner::SweepRow],
            }
            bundle.json(
                "sweep.json",
                &Wrapped { scenario: &s, body: Body { parameter: p, values: &values, rows: &rows } },
            )?;
            out
        }
        Command::Table3 { out, symbol_level, trials, seed_override } => {
            if symbol_level {
                let mut cfg = SymbolLevelConfig::default();
                if let Some(t) = trials {
                    cfg.trials = t;
                }
                if let Some(seed) = seed_override {
                    cfg.first_seed = seed;
                }
                let (nuisance, rows) = symbol_level_table3(&cfg, workers)?;
                bundle.text("table3.csv", table3_csv(&rows));
                #[derive(Serialize)]
                struct Body<'a> {
                    config: &'a SymbolLevelConfig,
                    nuisance: cvqkd::regression::Nuisance,
                    rows: &'a [cvqkd::regression::Table3Row],
                }
                bundle.json("table3.json", &Body { config: &cfg, nuisance, rows: &rows })?;
            } else {
                let base = Scenario::default();
                let seeds = seed_override.map(|s| vec![s]).unwrap_or(base.seeds.clone());
                let rows = waveform_table3(&seeds, &base.security, workers)?;
                bundle.text("table3.csv", table3_csv(&rows));
                #[derive(Serialize)]
                struct Body<'a> {
                    seeds: &'a [u64],
                    rows: &'a [cvqkd::regression::Table3Row],
                }
                bundle.json("table3.json", &Body { seeds: &seeds, rows: &rows })?;
            }
            out
        }
        Command::Plan(src) => {
            let (s, out) = src.resolve()?;
            let report = dimension(&s.planner.network, &s.planner.policy).map_err(|source| CliError::Pipeline {
                stage: Stage::Plan,
                seed: 0,
                source,
            })?;
            #[derive(Serialize)]
            struct Body {
                plan: cvqkd_core::planner::PlanReport,
            }
            bundle.json("plan.json", &Wrapped { scenario: &s, body: Body { plan: report } })?;
            out
        }
        Command::ExportWaveform { source, stage } => {
            let (s, out) = source.resolve()?;
            s.validate()?;
            let seed = s.seeds[0];
            let (_, frame, _) = transmit(&s, seed)?;
            let container = |w: &cvqkd_core::Waveform| -> Result<Vec<u8>, CliError> {
                let mut buf = Vec::new();
                write_waveform(&mut buf, w).map_err(|source| CliError::Pipeline {
                    stage: Stage::Transmit,
                    seed,
                    source,
                })?;
                Ok(buf)
            };
            match stage {
                ExportStage::Tx => {
                    bundle.bytes("tx_te.cvqw", container(&frame.te)?);
                    bundle.bytes("tx_tm.cvqw", container(&frame.tm)?);
                }
                ExportStage::Rx => {
                    let at_rx = cvqkd_core::channel::propagate(&frame, &cvqkd::pipeline::channel_for(&s, seed))
                        .map_err(|source| CliError::Pipeline { stage: Stage::Channel, seed, source })?;
                    bundle.bytes("rx_te.cvqw", container(&at_rx.te)?);
                    bundle.bytes("rx_tm.cvqw", container(&at_rx.tm)?);
                }
                ExportStage::Capture => {
                    let (cap, _) = receive(&s, seed, &frame)?;
                    let mut buf = Vec::new();
                    cap.write(&mut buf).map_err(|source| CliError::Pipeline { stage: Stage::Detect, seed, source })?;
                    bundle.bytes("capture.cvqw", buf);
                }
            }
            bundle.text("scenario.toml", s.to_toml_string()?);
            out
        }
    };
    bundle.write(&out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
