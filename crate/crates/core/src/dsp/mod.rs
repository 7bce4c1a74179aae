//! Offline receiver DSP: de-skew, filtering, pilot-aided frequency and phase
//! recovery, decision-point search, symbol sampling and alignment.

mod align;
mod freq;
mod phase;
mod timing;

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use align::{align, Alignment, MIN_PEAK};
pub use freq::{estimate_freq_offset, estimate_freq_offset_waveform, mix_down, MIN_PEAK_DB};
pub use phase::{centered_mean, estimate_phase, interpolate, unwrap};
pub use timing::{find_decision_offset, TimingObjective};

use crate::error::{Error, Flagged, Result, Warning};
use crate::rxchain::{CalibrationMode, Capture};
use crate::scalar::Scalar;
use crate::sigcore::{
    apply_complex_response, apply_filter, apply_response, guard_range, resample, sample_at, ComplexWaveform, FilterSpec,
};
use crate::txchain::{SymbolRecord, TxConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspConfig {
    /// Additional brickwall low-pass B_Fil in Hz.
    pub filter_bandwidth: f64,
    /// Known TM-versus-TE delay in seconds, removed from the pilot plane.
    pub deskew: f64,
    /// Phase smoothing window in pilot periods.
    pub phase_window: usize,
    /// Grid step of the decision-point search in seconds.
    pub decision_resolution: f64,
    /// Fixed sampling offset; skips the search when set.
    pub decision_offset: Option<f64>,
    /// Apply the transmit pulse response before sampling.
    pub matched_filter: bool,
    /// Fraction of symbols discarded at each end.
    pub guard_fraction: f64,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            filter_bandwidth: 250e6,
            deskew: 0.0,
            phase_window: 64,
            decision_resolution: 1e-12,
            decision_offset: None,
            matched_filter: false,
            guard_fraction: 0.01,
        }
    }
}

impl DspConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.filter_bandwidth > 0.0) {
            return Err(Error::Config("B_Fil must be positive".into()));
        }
        if self.phase_window < 1 {
            return Err(Error::Config("phase window must be at least 1".into()));
        }
        if !(self.decision_resolution > 0.0) {
            return Err(Error::Config("decision resolution must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.guard_fraction) {
            return Err(Error::Config("guard fraction must lie in [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Symbols recovered from one capture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredSymbols {
    /// One value per kept symbol, in capture units (SNU after calibration).
    pub bob: Vec<Complex<f64>>,
    /// Transmitted index of `bob[0]`; later entries follow consecutively
    /// modulo the transmitted length.
    pub first_index: usize,
    pub freq_offset: f64,
    /// Carrier phase at each kept symbol, radians.
    pub phase_track: Vec<f64>,
    pub decision_offset: f64,
    /// Normalized correlation peak when aligned to a reference.
    pub alignment_peak: Option<f64>,
}

impl RecoveredSymbols {
    /// Transmitted symbols paired with `bob`.
    pub fn paired_alice(&self, alice: &[SymbolRecord]) -> Vec<Complex<f64>> {
        let n = alice.len();
        (0..self.bob.len()).map(|k| alice[(self.first_index + k) % n].alice).collect()
    }
}

/// Intermediate products of a calibration or signal capture.
struct Front {
    te: ComplexWaveform<f64>,
    freq_offset: f64,
}

fn front_end<S: Scalar>(capture: &Capture<S>, cfg: &DspConfig) -> Result<(Front, Vec<Warning>, ComplexWaveform<f64>)> {
    let mut warnings = Vec::new();
    let te: ComplexWaveform<f64> = capture.te().cast();
    let mut tm: ComplexWaveform<f64> = capture.tm().cast();
    if cfg.deskew != 0.0 {
        let d = cfg.deskew;
        tm = apply_complex_response(&tm, |f| Complex::from_polar(1.0, 2.0 * PI * f * d));
    }
    let te =
        apply_filter(&te, &FilterSpec::BrickwallLowPass { cutoff: cfg.filter_bandwidth })?.drain_into(&mut warnings);
    Ok((Front { te, freq_offset: 0.0 }, warnings, tm))
}

/// Samples a calibration capture (shot-noise or electronic) exactly as the
/// signal path would, at the given decision offset, without phase correction.
pub fn sample_calibration<S: Scalar>(
    capture: &Capture<S>,
    cfg: &DspConfig,
    txcfg: &TxConfig,
    decision_offset: f64,
) -> Result<Vec<Complex<f64>>> {
    cfg.validate()?;
    let (mut front, _, _) = front_end(capture, cfg)?;
    if cfg.matched_filter {
        let spec = txcfg.pulse_shape;
        front.te = apply_response(&front.te, |f| spec.response(f));
    }
    let s = sample_at(&front.te, txcfg.symbol_rate, decision_offset)?.waveform;
    let r = guard_range(s.len(), cfg.guard_fraction);
    Ok(s.samples()[r].to_vec())
}

/// Full receive chain: deskew → B_Fil → pilot frequency estimate and
/// correction → decision-point search → optional matched filter → sampling →
/// pilot phase correction → alignment to `truth` when given.
pub fn recover<S: Scalar>(
    capture: &Capture<S>,
    truth: Option<&[SymbolRecord]>,
    cfg: &DspConfig,
    txcfg: &TxConfig,
) -> Result<Flagged<RecoveredSymbols>> {
    cfg.validate()?;
    if capture.mode != CalibrationMode::Signal {
        return Err(Error::Config("recovery needs a signal-mode capture".into()));
    }
    let (mut front, mut warnings, tm) = front_end(capture, cfg)?;
    let omega = txcfg.pilot_frequency;
    let rq = txcfg.symbol_rate;
    let fs = front.te.sample_rate();

    front.freq_offset = estimate_freq_offset_waveform(&tm, omega)?;
    let te = mix_down(&front.te, front.freq_offset);
    let pilot_bb = mix_down(&tm, front.freq_offset + omega);

    // pilot decimated to one sample per pilot period
    let pilot = if omega < fs { resample(&pilot_bb, omega, 0.0)?.waveform } else { pilot_bb };
    let pilot_rate = pilot.sample_rate();
    let noise_sigma = (pilot_rate / rq).sqrt();
    let track = estimate_phase(pilot.samples(), cfg.phase_window, Some(noise_sigma)).drain_into(&mut warnings);

    let tau = match cfg.decision_offset {
        Some(t) => t,
        None => find_decision_offset(&te, rq, cfg.decision_resolution, cfg.guard_fraction)?,
    };
    let te = if cfg.matched_filter {
        let spec = txcfg.pulse_shape;
        apply_response(&te, |f| spec.response(f))
    } else {
        te
    };
    let sampled = sample_at(&te, rq, tau)?;
    let first_raw = if tau < 0.0 { 1 } else { 0 };
    let keep = guard_range(sampled.waveform.len(), cfg.guard_fraction);
    let mut bob = Vec::with_capacity(keep.len());
    let mut phases = Vec::with_capacity(keep.len());
    for p in keep.clone() {
        let k = p + first_raw;
        let t = k as f64 / rq + tau;
        let phi = interpolate(&track, pilot_rate, t);
        phases.push(phi);
        bob.push(sampled.waveform.samples()[p] * Complex::from_polar(1.0, -phi));
    }
    let mut first_index = keep.start + first_raw;
    let mut alignment_peak = None;
    if let Some(truth) = truth {
        let alice: Vec<Complex<f64>> = truth.iter().map(|s| s.alice).collect();
        let al = align(&bob, first_index, &alice)?;
        let n = alice.len() as i64;
        first_index = (first_index as i64 - al.shift).rem_euclid(n) as usize;
        alignment_peak = Some(al.peak);
    }
    Ok(Flagged::with(
        RecoveredSymbols {
            bob,
            first_index,
            freq_offset: front.freq_offset,
            phase_track: phases,
            decision_offset: tau,
            alignment_peak,
        },
        warnings,
    ))
}
