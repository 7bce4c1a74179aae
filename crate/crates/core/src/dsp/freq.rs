use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::rxchain::Capture;
use crate::scalar::Scalar;
use crate::sigcore::{power_spectrum, resample, ComplexWaveform};

/// Minimum pilot peak over the spectral median, in dB.
pub const MIN_PEAK_DB: f64 = 10.0;

/// Multiplies by exp(−j2πf·t), moving a tone at `f` to 0 Hz.
pub fn mix_down<S: Scalar>(w: &ComplexWaveform<S>, f: f64) -> ComplexWaveform<S> {
    let mut out = w.clone();
    let fs = w.sample_rate();
    for (i, s) in out.samples_mut().iter_mut().enumerate() {
        let r = Complex::from_polar(1.0, -2.0 * PI * f * i as f64 / fs);
        *s = *s * Complex::new(S::of(r.re), S::of(r.im));
    }
    out
}

/// LO frequency offset from the pilot plane: measured pilot frequency minus Ω.
///
/// The pilot band [Ω/2, 3Ω/2] is mixed down and decimated to Ω, then the
/// Hann-windowed, 4× zero-padded periodogram peak is refined by parabolic
/// interpolation of the log magnitude.
pub fn estimate_freq_offset_waveform<S: Scalar>(pilot: &ComplexWaveform<S>, omega: f64) -> Result<f64> {
    let base = mix_down(pilot, omega);
    let dec = if omega < base.sample_rate() { resample(&base, omega, 0.0)?.waveform } else { base };
    let spec = power_spectrum(&dec, 4);
    let floor = spec.median();
    let (lo, hi) = (-omega / 2.0, omega / 2.0);
    let mut best = None;
    for (i, (&f, &v)) in spec.freqs.iter().zip(&spec.values).enumerate() {
        if f >= lo && f < hi && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let (i, peak) = best.ok_or_else(|| Error::FrequencyEstimation("empty search band".into()))?;
    if !(peak > 0.0) || 10.0 * (peak / floor.max(f64::MIN_POSITIVE)).log10() < MIN_PEAK_DB {
        return Err(Error::FrequencyEstimation(format!("no pilot peak {MIN_PEAK_DB} dB above the spectral median")));
    }
    let mut f = spec.freqs[i];
    if i > 0 && i + 1 < spec.values.len() {
        let (a, b, c) = (spec.values[i - 1].ln(), peak.ln(), spec.values[i + 1].ln());
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            f += 0.5 * (a - c) / den * spec.bin_width();
        }
    }
    Ok(f)
}

/// Frequency-offset estimate from the pilot (TM) plane of a capture.
pub fn estimate_freq_offset<S: Scalar>(capture: &Capture<S>, omega: f64) -> Result<f64> {
    estimate_freq_offset_waveform(&capture.tm(), omega)
}
