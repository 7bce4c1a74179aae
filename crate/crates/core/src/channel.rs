//! Fiber channel: loss, laser phase noise and frequency offset, static
//! polarization rotation, and white noise injection (excess and Raman).
//!
//! Noise levels are configured in SNU referred to the receiver input. The
//! frame carries one heterodyne output quadrature per SNU of field variance,
//! so an input-referred variance ζ enters each output quadrature as ζ/2.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sigcore::{ComplexWaveform, DualPolFrame};

/// Raman noise per classical channel and km, input-referred SNU. Eleven
/// channels over 13.2 km add 0.0024 SNU.
pub const DEFAULT_RAMAN_PER_CHANNEL_KM: f64 = 0.0024 / (11.0 * 13.2);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    /// LO frequency offset Δν in Hz.
    pub freq_offset: f64,
    pub linewidth_tx: f64,
    pub linewidth_lo: f64,
    /// Static polarization misalignment in radians.
    pub delta_sop: f64,
    pub classical_channels: u32,
    /// Raman noise in SNU per channel per km.
    pub raman_noise_photons: f64,
    /// Additional white excess noise in SNU (untrusted channel noise).
    pub excess_noise: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            length_km: 13.2,
            loss_db_per_km: 0.227,
            freq_offset: 0.0,
            linewidth_tx: 10e3,
            linewidth_lo: 10e3,
            delta_sop: 0.0,
            classical_channels: 0,
            raman_noise_photons: DEFAULT_RAMAN_PER_CHANNEL_KM,
            excess_noise: 0.0,
            seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("length", self.length_km),
            ("loss coefficient", self.loss_db_per_km),
            ("tx linewidth", self.linewidth_tx),
            ("lo linewidth", self.linewidth_lo),
            ("raman constant", self.raman_noise_photons),
            ("excess noise", self.excess_noise),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(())
    }

    /// Raman contribution in input-referred SNU.
    pub fn raman_noise(&self) -> f64 {
        self.classical_channels as f64 * self.raman_noise_photons * self.length_km
    }
}

/// Power transmission T = 10^(−0.1·L·α).
pub fn fiber_transmission(cfg: &ChannelConfig) -> f64 {
    10f64.powf(-0.1 * cfg.length_km * cfg.loss_db_per_km)
}

/// Scales both planes by √T.
pub fn apply_loss<S: Scalar>(frame: &DualPolFrame<S>, transmission: f64) -> DualPolFrame<S> {
    let k = transmission.sqrt();
    DualPolFrame { te: frame.te.clone().scaled(k), tm: frame.tm.clone().scaled(k), symbol_rate: frame.symbol_rate }
}

// independent ChaCha streams per stochastic stage
const STREAM_PHASE: u64 = 1;
const STREAM_NOISE_TE: u64 = 2;
const STREAM_NOISE_TM: u64 = 3;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Phase trajectory 2πΔν·t + φ(t) with φ a Wiener process.
pub fn phase_trajectory(n: usize, sample_rate: f64, cfg: &ChannelConfig) -> Vec<f64> {
    let dt = 1.0 / sample_rate;
    let sigma = (2.0 * PI * (cfg.linewidth_tx + cfg.linewidth_lo) * dt).sqrt();
    let mut r = rng(cfg.seed, STREAM_PHASE);
    let mut phi = 0.0;
    (0..n)
        .map(|i| {
            let p = 2.0 * PI * cfg.freq_offset * i as f64 * dt + phi;
            if sigma > 0.0 {
                let g: f64 = StandardNormal.sample(&mut r);
                phi += sigma * g;
            }
            p
        })
        .collect()
}

/// Multiplies both planes by the common laser phase exp(j(2πΔν·t + φ(t))).
pub fn apply_phase_noise<S: Scalar>(frame: &DualPolFrame<S>, cfg: &ChannelConfig) -> DualPolFrame<S> {
    if cfg.freq_offset == 0.0 && cfg.linewidth_tx == 0.0 && cfg.linewidth_lo == 0.0 {
        return frame.clone();
    }
    let phase = phase_trajectory(frame.len(), frame.sample_rate(), cfg);
    let rotate = |w: &ComplexWaveform<S>| {
        let mut out = w.clone();
        for (s, p) in out.samples_mut().iter_mut().zip(&phase) {
            let r = Complex::from_polar(1.0, *p);
            *s = *s * Complex::new(S::of(r.re), S::of(r.im));
        }
        out
    };
    DualPolFrame { te: rotate(&frame.te), tm: rotate(&frame.tm), symbol_rate: frame.symbol_rate }
}

/// TE' = cos θ·TE + sin θ·TM, TM' = −sin θ·TE + cos θ·TM.
pub fn apply_polarization_rotation<S: Scalar>(frame: &DualPolFrame<S>, angle: f64) -> DualPolFrame<S> {
    if angle == 0.0 {
        return frame.clone();
    }
    let (c, s) = (S::of(angle.cos()), S::of(angle.sin()));
    let mut te = frame.te.clone();
    let mut tm = frame.tm.clone();
    for ((a, b), (x, y)) in te
        .samples_mut()
        .iter_mut()
        .zip(tm.samples_mut().iter_mut())
        .zip(frame.te.samples().iter().zip(frame.tm.samples()))
    {
        *a = *x * c + *y * s;
        *b = *y * c - *x * s;
    }
    DualPolFrame { te, tm, symbol_rate: frame.symbol_rate }
}

/// Adds white circular Gaussian noise of input-referred variance `snu`
/// (measured in the symbol-rate bandwidth) to one plane.
pub fn add_white_noise<S: Scalar>(w: &mut ComplexWaveform<S>, snu: f64, symbol_rate: f64, r: &mut ChaCha8Rng) {
    if snu <= 0.0 {
        return;
    }
    let sigma = (snu / 2.0 * w.sample_rate() / symbol_rate).sqrt();
    for s in w.samples_mut() {
        let (re, im): (f64, f64) = (StandardNormal.sample(&mut *r), StandardNormal.sample(&mut *r));
        *s = *s + Complex::new(S::of(sigma * re), S::of(sigma * im));
    }
}

/// Adds Raman noise from co-propagating channels plus the configured excess
/// noise to both planes.
pub fn inject_classical_noise<S: Scalar>(frame: &DualPolFrame<S>, cfg: &ChannelConfig) -> DualPolFrame<S> {
    let snu = cfg.raman_noise() + cfg.excess_noise;
    if snu <= 0.0 {
        return frame.clone();
    }
    let mut out = frame.clone();
    add_white_noise(&mut out.te, snu, frame.symbol_rate, &mut rng(cfg.seed, STREAM_NOISE_TE));
    add_white_noise(&mut out.tm, snu, frame.symbol_rate, &mut rng(cfg.seed, STREAM_NOISE_TM));
    out
}

/// Laser phase, loss, polarization rotation, then noise injection.
pub fn propagate<S: Scalar>(frame: &DualPolFrame<S>, cfg: &ChannelConfig) -> Result<DualPolFrame<S>> {
    cfg.validate()?;
    let f = apply_phase_noise(frame, cfg);
    let f = apply_loss(&f, fiber_transmission(cfg));
    let f = apply_polarization_rotation(&f, cfg.delta_sop);
    Ok(inject_classical_noise(&f, cfg))
}

/// Symbol-rate surrogate of the full chain: bob = √T·alice + noise with
/// per-quadrature variance `1 + electronic_noise + excess_noise/2` in output
/// SNU. Used where waveform-level simulation adds nothing but runtime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolChannel {
    pub transmission: f64,
    /// Input-referred excess noise in SNU.
    pub excess_noise: f64,
    /// Output-referred electronic noise in SNU.
    pub electronic_noise: f64,
    pub seed: u64,
}

impl SymbolChannel {
    pub fn transmit(&self, alice: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let sigma = (1.0 + self.electronic_noise + self.excess_noise / 2.0).sqrt();
        let t = self.transmission.sqrt();
        let mut r = rng(self.seed, STREAM_NOISE_TE);
        alice
            .iter()
            .map(|a| {
                let (x, y): (f64, f64) = (StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
                a * t + Complex::new(sigma * x, sigma * y)
            })
            .collect()
    }

    /// Shot-noise (LO on) and electronic-only reference samples.
    pub fn calibration(&self, n: usize) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
        let mut r = rng(self.seed, STREAM_NOISE_TM);
        let mut draw = |var: f64| -> Vec<Complex<f64>> {
            let s = var.sqrt();
            (0..n)
                .map(|_| {
                    let (x, y): (f64, f64) = (StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
                    Complex::new(s * x, s * y)
                })
                .collect()
        };
        let shot = draw(1.0 + self.electronic_noise);
        let elec = draw(self.electronic_noise);
        (shot, elec)
    }
}
