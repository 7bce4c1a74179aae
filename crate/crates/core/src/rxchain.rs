//! Intradyne front end: balanced detection with finite CMRR, bandwidth
//! response ρ(f), shot and electronic noise, and ADC acquisition.
//!
//! One SNU is the shot-noise variance of a heterodyne output quadrature
//! inside the symbol-rate bandwidth, i.e. a white two-sided PSD of 1/R_q.

use std::f64::consts::PI;

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::rng;
use crate::error::{Error, Flagged, Result, Warning};
use crate::scalar::Scalar;
use crate::sigcore::{apply_response, io, resample, ComplexWaveform, DualPolFrame};

/// Where the TIA noise enters relative to the bandwidth response.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectronicNoiseModel {
    /// Shaped by ρ(f) like the shot noise; its SNU ratio is band-independent.
    #[default]
    InputReferred,
    /// White up to the ADC Nyquist frequency after ρ(f).
    OutputReferred,
}

/// Direct-detection spectrum of modulated out-of-band classical channels:
/// PRBS data lines at multiples of `symbol_rate / (2^prbs_order − 1)` with a
/// sinc² envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalLoad {
    pub channels: u32,
    pub symbol_rate: f64,
    pub prbs_order: u32,
    /// Common-mode power per line at DC envelope and 0 dB CMRR, in SNU.
    pub dd_power: f64,
    pub seed: u64,
}

/// Calibrated so the strongest line sits about 14 dB above the shot floor
/// of a 4096-point Welch spectrum at 9.5 dB CMRR.
pub const DEFAULT_DD_POWER: f64 = 0.3;

impl Default for ClassicalLoad {
    fn default() -> Self {
        Self { channels: 11, symbol_rate: 10e9, prbs_order: 7, dd_power: DEFAULT_DD_POWER, seed: 0 }
    }
}

/// One spectral line of a real-valued common-mode signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicLine {
    pub frequency: f64,
    /// Mean power of the real sinusoid (amplitude²/2), in SNU.
    pub power: f64,
    pub phase: f64,
}

impl ClassicalLoad {
    /// Lines up to `max_frequency` before CMRR suppression.
    pub fn spectrum(&self, max_frequency: f64) -> Vec<HarmonicLine> {
        let spacing = self.symbol_rate / ((1u64 << self.prbs_order) - 1) as f64;
        let mut r = rng(self.seed, 40);
        let mut lines = Vec::new();
        let mut k = 1;
        while k as f64 * spacing < max_frequency {
            let f = k as f64 * spacing;
            let x = PI * f / self.symbol_rate;
            let env = (x.sin() / x).powi(2);
            let u: f64 = StandardNormal.sample(&mut r);
            lines.push(HarmonicLine { frequency: f, power: self.dd_power * self.channels as f64 * env, phase: u * PI });
            k += 1;
        }
        lines
    }
}

/// Scales direct-detection lines by 10^(−CMRR/10); `inf` removes them.
pub fn leak_classical(lines: &[HarmonicLine], cmrr_db: f64) -> Vec<HarmonicLine> {
    let k = 10f64.powf(-cmrr_db / 10.0);
    lines.iter().map(|l| HarmonicLine { power: l.power * k, ..*l }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxConfig {
    pub bandwidth_quantum: f64,
    pub bandwidth_pilot: f64,
    pub cmrr_q_db: f64,
    pub cmrr_pilot_db: f64,
    /// Photodiode responsivities in A/W; SNU calibration absorbs them.
    pub responsivity_q: f64,
    pub responsivity_pilot: f64,
    /// Electronic noise v_el in output-referred SNU.
    pub electronic_noise: f64,
    pub electronic_noise_model: ElectronicNoiseModel,
    /// Order of the Butterworth-type magnitude ρ(f).
    pub response_order: u32,
    pub adc_rate: f64,
    /// ADC resolution; 0 keeps ideal samples.
    pub adc_bits: u32,
    /// Full scale as a multiple of each trace's RMS.
    pub full_scale_sigma: f64,
    pub shot_noise_on: bool,
    pub lo_on: bool,
    pub signal_on: bool,
    pub classical_load: Option<ClassicalLoad>,
}

/// v_el in output SNU that reproduces the 250 MBd dark-fiber calibration.
pub const DEFAULT_ELECTRONIC_NOISE: f64 = 0.01354 / 2.0;

impl Default for RxConfig {
    fn default() -> Self {
        Self {
            bandwidth_quantum: 315e6,
            bandwidth_pilot: 10e9,
            cmrr_q_db: 44.8,
            cmrr_pilot_db: 28.0,
            responsivity_q: 0.85,
            responsivity_pilot: 0.8,
            electronic_noise: DEFAULT_ELECTRONIC_NOISE,
            electronic_noise_model: ElectronicNoiseModel::InputReferred,
            response_order: 2,
            adc_rate: 20e9,
            adc_bits: 10,
            full_scale_sigma: 8.0,
            shot_noise_on: true,
            lo_on: true,
            signal_on: true,
            classical_load: None,
        }
    }
}

impl RxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_quantum > 0.0 && self.bandwidth_quantum <= self.bandwidth_pilot) {
            return Err(Error::Config("need 0 < B_RX,q <= B_RX,pilot".into()));
        }
        if self.bandwidth_pilot > self.adc_rate / 2.0 * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "pilot bandwidth {} Hz exceeds ADC Nyquist {} Hz",
                self.bandwidth_pilot,
                self.adc_rate / 2.0
            )));
        }
        if !(self.electronic_noise >= 0.0) || self.cmrr_q_db < 0.0 || self.cmrr_pilot_db < 0.0 {
            return Err(Error::Config("v_el and CMRR values must be non-negative".into()));
        }
        if self.response_order == 0 {
            return Err(Error::Config("response order must be at least 1".into()));
        }
        if self.adc_bits != 0 && !(2..=24).contains(&self.adc_bits) {
            return Err(Error::Config("ADC resolution must be 0 (ideal) or 2..=24 bits".into()));
        }
        if !(self.full_scale_sigma > 0.0) {
            return Err(Error::Config("ADC full scale must be positive".into()));
        }
        Ok(())
    }

    pub fn mode(&self) -> CalibrationMode {
        match (self.lo_on, self.signal_on) {
            (false, _) => CalibrationMode::ElectronicOnly,
            (true, false) => CalibrationMode::ShotNoiseOnly,
            (true, true) => CalibrationMode::Signal,
        }
    }

    /// Same receiver with LO on and the transmitter dark.
    pub fn shot_noise_only(&self) -> Self {
        Self { lo_on: true, signal_on: false, ..self.clone() }
    }

    /// Same receiver with the LO off.
    pub fn electronic_only(&self) -> Self {
        Self { lo_on: false, signal_on: false, ..self.clone() }
    }
}

/// Amplitude response |ρ(f)| = 1/√(1 + (f/B)^(2n)).
pub fn response_magnitude(f: f64, bandwidth: f64, order: u32) -> f64 {
    1.0 / (1.0 + (f.abs() / bandwidth).powi(2 * order as i32)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    Signal,
    ShotNoiseOnly,
    ElectronicOnly,
}

impl CalibrationMode {
    fn tag(self) -> u32 {
        match self {
            Self::Signal => 0,
            Self::ShotNoiseOnly => 1,
            Self::ElectronicOnly => 2,
        }
    }

    fn from_tag(tag: u32) -> Result<Self> {
        match tag {
            0 => Ok(Self::Signal),
            1 => Ok(Self::ShotNoiseOnly),
            2 => Ok(Self::ElectronicOnly),
            t => Err(Error::Format(format!("unknown calibration mode {t}"))),
        }
    }
}

/// Four real ADC traces on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Capture<S> {
    pub i_te: Vec<S>,
    pub q_te: Vec<S>,
    pub i_tm: Vec<S>,
    pub q_tm: Vec<S>,
    pub sample_rate: f64,
    /// Quantum symbol rate, carried for SNU bookkeeping.
    pub symbol_rate: f64,
    pub mode: CalibrationMode,
}

impl<S: Scalar> Capture<S> {
    pub fn new(
        te: &ComplexWaveform<S>,
        tm: &ComplexWaveform<S>,
        symbol_rate: f64,
        mode: CalibrationMode,
    ) -> Result<Self> {
        te.check_compatible(tm)?;
        Ok(Self {
            i_te: te.real_part(),
            q_te: te.imag_part(),
            i_tm: tm.real_part(),
            q_tm: tm.imag_part(),
            sample_rate: te.sample_rate(),
            symbol_rate,
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.i_te.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i_te.is_empty()
    }

    fn join(i: &[S], q: &[S], rate: f64) -> ComplexWaveform<S> {
        let s = i.iter().zip(q).map(|(a, b)| Complex::new(*a, *b)).collect();
        ComplexWaveform::new(s, rate).expect("capture traces are non-empty")
    }

    /// Quantum plane as I + jQ.
    pub fn te(&self) -> ComplexWaveform<S> {
        Self::join(&self.i_te, &self.q_te, self.sample_rate)
    }

    /// Pilot plane as I + jQ.
    pub fn tm(&self) -> ComplexWaveform<S> {
        Self::join(&self.i_tm, &self.q_tm, self.sample_rate)
    }

    /// Four-trace container; the header tag stores the calibration mode.
    pub fn write(&self, out: &mut impl std::io::Write) -> Result<()> {
        let wide = |v: &[S]| v.iter().map(|x| x.wide()).collect::<Vec<f64>>();
        let (a, b, c, d) = (wide(&self.i_te), wide(&self.q_te), wide(&self.i_tm), wide(&self.q_tm));
        io::write_traces(out, self.sample_rate, self.mode.tag(), &[&a, &b, &c, &d])
    }

    pub fn read(input: &mut impl std::io::Read, symbol_rate: f64) -> Result<Self> {
        let (rate, tag, traces) = io::read_traces(input)?;
        if traces.len() != 4 {
            return Err(Error::Format(format!("expected 4 traces, found {}", traces.len())));
        }
        let mut it = traces.into_iter().map(|t| t.into_iter().map(S::of).collect::<Vec<S>>());
        Ok(Self {
            i_te: it.next().unwrap_or_default(),
            q_te: it.next().unwrap_or_default(),
            i_tm: it.next().unwrap_or_default(),
            q_tm: it.next().unwrap_or_default(),
            sample_rate: rate,
            symbol_rate,
            mode: CalibrationMode::from_tag(tag)?,
        })
    }
}

fn white<S: Scalar>(w: &mut ComplexWaveform<S>, per_sample_var: f64, r: &mut ChaCha8Rng) {
    if per_sample_var <= 0.0 {
        return;
    }
    let sigma = per_sample_var.sqrt();
    for s in w.samples_mut() {
        let (x, y): (f64, f64) = (StandardNormal.sample(&mut *r), StandardNormal.sample(&mut *r));
        *s = *s + Complex::new(S::of(sigma * x), S::of(sigma * y));
    }
}

fn add_lines<S: Scalar>(w: &mut ComplexWaveform<S>, lines: &[HarmonicLine]) {
    let fs = w.sample_rate();
    for l in lines {
        let a = (2.0 * l.power).sqrt();
        let step = 2.0 * PI * l.frequency / fs;
        for (i, s) in w.samples_mut().iter_mut().enumerate() {
            let v = S::of(a * (step * i as f64 + l.phase).cos());
            // common-mode term lands on both balanced outputs of the plane
            *s = *s + Complex::new(v, v);
        }
    }
}

struct Plane {
    bandwidth: f64,
    cmrr_db: f64,
    stream: u64,
}

/// Balanced intradyne detection of both planes followed by ADC acquisition.
pub fn detect<S: Scalar>(frame: &DualPolFrame<S>, cfg: &RxConfig, seed: u64) -> Result<Flagged<Capture<S>>> {
    cfg.validate()?;
    let fs = frame.sample_rate();
    if fs < 2.0 * cfg.bandwidth_pilot * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "frame rate {fs:e} Sa/s below twice the pilot bandwidth {:e} Hz",
            cfg.bandwidth_pilot
        )));
    }
    let mode = cfg.mode();
    let per_snu = fs / frame.symbol_rate;
    let mut warnings = Vec::new();
    let planes = [
        (&frame.te, Plane { bandwidth: cfg.bandwidth_quantum, cmrr_db: cfg.cmrr_q_db, stream: 10 }),
        (&frame.tm, Plane { bandwidth: cfg.bandwidth_pilot, cmrr_db: cfg.cmrr_pilot_db, stream: 20 }),
    ];
    let mut out = Vec::with_capacity(2);
    for (field, plane) in planes {
        let mut w =
            if mode == CalibrationMode::Signal { field.clone() } else { ComplexWaveform::zeros(field.len(), fs)? };
        if cfg.lo_on && cfg.shot_noise_on {
            white(&mut w, per_snu, &mut rng(seed, plane.stream));
        }
        let v_el = cfg.electronic_noise * per_snu;
        let mut elec = rng(seed, plane.stream + 1);
        if cfg.electronic_noise_model == ElectronicNoiseModel::InputReferred {
            white(&mut w, v_el, &mut elec);
        }
        if let Some(load) = &cfg.classical_load {
            add_lines(&mut w, &leak_classical(&load.spectrum(fs / 2.0), plane.cmrr_db));
        }
        let (b, n) = (plane.bandwidth, cfg.response_order);
        if b < fs / 2.0 {
            w = apply_response(&w, |f| response_magnitude(f, b, n));
        }
        if cfg.electronic_noise_model == ElectronicNoiseModel::OutputReferred {
            white(&mut w, v_el, &mut elec);
        }
        if (cfg.adc_rate - fs).abs() > 1e-9 * fs {
            let r = resample(&w, cfg.adc_rate, 0.0)?;
            if r.dropped > 0 {
                warnings.push(Warning::ResampleTruncated { dropped: r.dropped });
            }
            w = r.waveform;
        }
        out.push(w);
    }
    let tm = out.pop().expect("two planes");
    let te = out.pop().expect("two planes");
    let mut cap = Capture::new(&te, &tm, frame.symbol_rate, mode)?;
    if cfg.adc_bits > 0 {
        let bits = cfg.adc_bits;
        let names = ["I_TE", "Q_TE", "I_TM", "Q_TM"];
        let traces = [&mut cap.i_te, &mut cap.q_te, &mut cap.i_tm, &mut cap.q_tm];
        for (name, t) in names.into_iter().zip(traces) {
            let clipped = quantize(t, bits, cfg.full_scale_sigma);
            if clipped > 0 {
                warnings.push(Warning::AdcSaturation { trace: name.into(), clipped });
            }
        }
    }
    Ok(Flagged::with(cap, warnings))
}

/// Mid-tread quantizer with full scale `sigmas`·RMS; returns the clip count.
fn quantize<S: Scalar>(trace: &mut [S], bits: u32, sigmas: f64) -> usize {
    let rms = (trace.iter().map(|x| x.wide().powi(2)).sum::<f64>() / trace.len() as f64).sqrt();
    if rms == 0.0 {
        return 0;
    }
    let fs = sigmas * rms;
    let step = 2.0 * fs / (1u64 << bits) as f64;
    let (lo, hi) = (-fs, fs - step);
    let mut clipped = 0;
    for x in trace.iter_mut() {
        let v = x.wide();
        if v < lo || v > hi {
            clipped += 1;
        }
        *x = S::of(((v / step).round() * step).clamp(lo, hi));
    }
    clipped
}

/// Diagnostic powers of pilot crosstalk into the quantum plane after ρ(f).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crosstalk {
    /// Out-of-band pilot leak at +Ω, in SNU.
    pub pilot_leak: f64,
    /// Residual pilot carrier at 0 Hz, in SNU.
    pub carrier_leak: f64,
}

pub fn crosstalk<S: Scalar>(frame: &DualPolFrame<S>, cfg: &RxConfig, pilot_frequency: f64) -> Crosstalk {
    let g = |f: f64| response_magnitude(f, cfg.bandwidth_quantum, cfg.response_order).powi(2);
    Crosstalk {
        pilot_leak: crate::sigcore::tone_power(&frame.te, pilot_frequency) * g(pilot_frequency),
        carrier_leak: crate::sigcore::tone_power(&frame.te, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dark_frame(n: usize, fs: f64) -> DualPolFrame<f64> {
        let z = ComplexWaveform::zeros(n, fs).unwrap();
        DualPolFrame::new(z.clone(), z, 250e6).unwrap()
    }

    fn sim_cfg() -> RxConfig {
        RxConfig { adc_rate: 4e9, bandwidth_pilot: 2e9, bandwidth_quantum: 315e6, adc_bits: 0, ..RxConfig::default() }
    }

    fn var(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn response_at_pilot_frequency() {
        let db = 20.0 * response_magnitude(1e9, 315e6, 2).log10();
        assert!((db + 20.1).abs() < 0.1, "{db}");
    }

    #[test]
    fn calibration_modes_in_band() {
        // variance inside the symbol-rate band after an ideal brickwall
        let cfg = RxConfig { electronic_noise: 0.1, bandwidth_quantum: 1.9e9 - 1.0, ..sim_cfg() };
        let fs = 4e9;
        let frame = dark_frame(1 << 19, fs);
        let inband = |c: &Capture<f64>| {
            let w = crate::sigcore::apply_response(&c.te(), |f| if f.abs() <= 125e6 { 1.0 } else { 0.0 });
            var(&w.real_part())
        };
        let shot = detect(&frame, &cfg.shot_noise_only(), 1).unwrap().value;
        assert_eq!(shot.mode, CalibrationMode::ShotNoiseOnly);
        let elec = detect(&frame, &cfg.electronic_only(), 1).unwrap().value;
        // brickwall at R_q/2 keeps 1/16 of the white noise; ρ is ≈1 there
        let rho = |f: f64| response_magnitude(f, cfg.bandwidth_quantum, 2).powi(2);
        let n = 4096;
        let mean_rho = (0..n).map(|k| rho(-125e6 + 250e6 * (k as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        assert!((inband(&shot) / mean_rho - 1.1).abs() < 1.1 * 0.03);
        assert!((inband(&elec) / mean_rho - 0.1).abs() < 0.1 * 0.05);
    }

    #[test]
    fn linear_in_signal() {
        let cfg = RxConfig { shot_noise_on: false, electronic_noise: 0.0, ..sim_cfg() };
        let te = ComplexWaveform::from_fn(4096, 4e9, |i, _| Complex::new((i as f64 * 0.01).sin(), 0.5)).unwrap();
        let f1 = DualPolFrame::new(te.clone(), te.clone(), 250e6).unwrap();
        let f2 = DualPolFrame::new(te.clone().scaled(2.0), te, 250e6).unwrap();
        let a = detect(&f1, &cfg, 0).unwrap().value;
        let b = detect(&f2, &cfg, 0).unwrap().value;
        for (x, y) in a.i_te.iter().zip(&b.i_te) {
            assert!((2.0 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn shot_noise_independent_across_quadratures() {
        let cfg = RxConfig { electronic_noise: 0.0, ..sim_cfg() };
        let c = detect(&dark_frame(1 << 16, 4e9), &cfg.shot_noise_only(), 9).unwrap().value;
        let n = c.len() as f64;
        let vi = var(&c.i_te);
        for other in [&c.q_te, &c.i_tm, &c.q_tm] {
            let vo = var(other);
            let cov = c.i_te.iter().zip(other.iter()).map(|(a, b)| a * b).sum::<f64>() / n;
            // ρ correlates neighbouring samples; allow a generous 5σ bound
            assert!(cov.abs() < 5.0 * (vi * vo).sqrt() * (8.0 / n).sqrt());
        }
    }

    #[test]
    fn leak_scales_with_cmrr() {
        let lines = vec![HarmonicLine { frequency: 1e8, power: 2.0, phase: 0.0 }];
        assert!(leak_classical(&lines, f64::INFINITY)[0].power == 0.0);
        let a = leak_classical(&lines, 9.5)[0].power;
        let b = leak_classical(&lines, 28.3)[0].power;
        assert!((10.0 * (a / b).log10() - 18.8).abs() < 1e-9);
    }

    #[test]
    fn adc_quantization_and_container() {
        let cfg = RxConfig { adc_bits: 10, ..sim_cfg() };
        let c = detect(&dark_frame(4096, 4e9), &cfg.shot_noise_only(), 3).unwrap();
        assert!(c.warnings.is_empty());
        let mut buf = Vec::new();
        c.value.write(&mut buf).unwrap();
        let back = Capture::<f64>::read(&mut buf.as_slice(), 250e6).unwrap();
        assert_eq!(back, c.value);
        let mut t = vec![0.0, 0.0, 0.0, 100.0];
        assert_eq!(quantize(&mut t, 8, 1.0), 1);
    }

    #[test]
    fn rejects_undersampled_frame() {
        let cfg = RxConfig::default();
        assert!(detect(&dark_frame(64, 4e9), &cfg, 0).is_err());
    }
}
