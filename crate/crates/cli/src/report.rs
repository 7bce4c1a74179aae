//! Artifact writers. Output directories are created only once every
//! artifact of a command is ready, so failed runs leave nothing behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::regression::Table3Row;
use crate::runner::{ScenarioReport, SweepRow};

/// Files to be written together.
#[derive(Default)]
pub struct Bundle {
    files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Schema(e.to_string()))?;
        text.push('\n');
        self.files.push((name.to_string(), text.into_bytes()));
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    pub fn bytes(&mut self, name: &str, data: Vec<u8>) {
        self.files.push((name.to_string(), data));
    }

    pub fn write(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Output { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        for (name, data) in self.files {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Shortest round-trip representation, so CSVs are stable across runs.
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn runs_csv(report: &ScenarioReport) -> String {
    let mut out = String::from("seed,zeta,zeta_t,transmission,snr,v_el,k_s,k_t,decision_offset,freq_offset\n");
    for r in &report.runs {
        let e = &r.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            num(e.zeta_input),
            num(e.zeta_t_input),
            num(e.transmission),
            num(e.snr),
            num(e.v_el_input),
            num(r.key_rates.k_s),
            num(r.key_rates.k_t),
            num(r.diagnostics.decision_offset),
            num(r.diagnostics.freq_offset),
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("parameter,value,seed,zeta,zeta_t,k_s,k_t,snr\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.parameter.name(),
            num(r.value),
            r.seed,
            num(r.zeta),
            num(r.zeta_t),
            num(r.k_s),
            num(r.k_t),
            num(r.snr),
        );
    }
    out
}

pub fn table3_csv(rows: &[Table3Row]) -> String {
    let mut out = String::from(
        "column,zeta,zeta_t,transmission,snr,v_el,k_s,k_t,reference_zeta,reference_zeta_t,reference_k_s,reference_k_t\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.column,
            num(r.zeta),
            num(r.zeta_t),
            num(r.transmission),
            num(r.snr),
            num(r.v_el),
            num(r.k_s),
            num(r.k_t),
            num(r.reference_zeta),
            num(r.reference_zeta_t),
            num(r.reference_k_s),
            num(r.reference_k_t),
        );
    }
    out
}
