use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{apply_response, ComplexWaveform};
use crate::error::{Error, Flagged, Result, Warning};
use crate::scalar::Scalar;

/// Frequency response family used for pulse shaping and receiver filtering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    /// Nyquist raised-cosine spectrum.
    RaisedCosine { symbol_rate: f64, roll_off: f64 },
    /// Gaussian spectrum with -3 dB power bandwidth `bandwidth_time * symbol_rate`.
    Gaussian { symbol_rate: f64, bandwidth_time: f64 },
    /// Ideal low-pass that zeroes every bin with |f| > cutoff.
    BrickwallLowPass { cutoff: f64 },
}

/// Raised-cosine gain at frequency `f`.
pub fn raised_cosine_response(f: f64, symbol_rate: f64, roll_off: f64) -> Result<f64> {
    check_rc(symbol_rate, roll_off)?;
    let af = f.abs();
    let lo = (1.0 - roll_off) * symbol_rate / 2.0;
    let hi = (1.0 + roll_off) * symbol_rate / 2.0;
    Ok(if af <= lo {
        1.0
    } else if af >= hi {
        0.0
    } else {
        let arg = (2.0 * PI * af - (1.0 - roll_off) * PI * symbol_rate) / (4.0 * roll_off * symbol_rate);
        arg.cos().powi(2)
    })
}

/// Gaussian amplitude response, 1/√2 at `bandwidth_time * symbol_rate`.
pub fn gaussian_response(f: f64, symbol_rate: f64, bandwidth_time: f64) -> f64 {
    let b = bandwidth_time * symbol_rate;
    (-std::f64::consts::LN_2 / 2.0 * (f / b).powi(2)).exp()
}

fn check_rc(symbol_rate: f64, roll_off: f64) -> Result<()> {
    if !(symbol_rate > 0.0 && symbol_rate.is_finite()) {
        return Err(Error::Config(format!("symbol rate must be positive, got {symbol_rate}")));
    }
    if !(roll_off > 0.0 && roll_off <= 1.0) {
        return Err(Error::Config(format!("roll-off must lie in (0, 1], got {roll_off}")));
    }
    Ok(())
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::RaisedCosine { symbol_rate, roll_off } => check_rc(symbol_rate, roll_off),
            Self::Gaussian { symbol_rate, bandwidth_time } => {
                if symbol_rate > 0.0 && bandwidth_time > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config("gaussian filter needs positive rate and BT".into()))
                }
            }
            Self::BrickwallLowPass { cutoff } => {
                if cutoff > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("cutoff must be positive, got {cutoff}")))
                }
            }
        }
    }

    /// Gain at `f`; the filter must already be valid.
    pub fn response(&self, f: f64) -> f64 {
        match *self {
            Self::RaisedCosine { symbol_rate, roll_off } => {
                raised_cosine_response(f, symbol_rate, roll_off).unwrap_or(0.0)
            }
            Self::Gaussian { symbol_rate, bandwidth_time } => gaussian_response(f, symbol_rate, bandwidth_time),
            Self::BrickwallLowPass { cutoff } => {
                if f.abs() > cutoff {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// One-sided frequency beyond which the gain is below -60 dB.
    pub fn occupied_bandwidth(&self) -> f64 {
        match *self {
            Self::RaisedCosine { symbol_rate, roll_off } => (1.0 + roll_off) * symbol_rate / 2.0,
            Self::Gaussian { symbol_rate, bandwidth_time } => {
                bandwidth_time * symbol_rate * (2.0 * 1e3f64.ln() / std::f64::consts::LN_2).sqrt()
            }
            Self::BrickwallLowPass { cutoff } => cutoff,
        }
    }
}

/// Zero-phase frequency-domain filtering. A low-pass cutoff at or above the
/// Nyquist frequency leaves the waveform untouched and raises a warning.
pub fn apply_filter<S: Scalar>(w: &ComplexWaveform<S>, spec: &FilterSpec) -> Result<Flagged<ComplexWaveform<S>>> {
    spec.validate()?;
    let nyquist = w.sample_rate() / 2.0;
    if let FilterSpec::BrickwallLowPass { cutoff } = *spec {
        if cutoff >= nyquist {
            return Ok(Flagged::with(w.clone(), vec![Warning::FilterBeyondNyquist { cutoff, nyquist }]));
        }
    }
    Ok(Flagged::clean(apply_response(w, |f| spec.response(f))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use proptest::prelude::*;

    #[test]
    fn analytic_points() {
        let r = 1.0;
        assert!((raised_cosine_response(0.25, r, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(raised_cosine_response(0.75, r, 0.5).unwrap().abs() < 1e-12);
        assert!((raised_cosine_response(0.5, r, 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_roll_off() {
        assert!(raised_cosine_response(0.1, 1.0, 0.0).is_err());
        assert!(raised_cosine_response(0.1, 1.0, 1.5).is_err());
        assert!(raised_cosine_response(0.1, -1.0, 0.5).is_err());
    }

    #[test]
    fn gaussian_half_power_point() {
        assert!((gaussian_response(0.3, 1.0, 0.3).powi(2) - 0.5).abs() < 1e-12);
    }

    fn tone(f: f64, fs: f64, n: usize) -> ComplexWaveform<f64> {
        ComplexWaveform::from_fn(n, fs, |_, t| Complex::from_polar(1.0, 2.0 * PI * f * t)).unwrap()
    }

    #[test]
    fn brickwall_in_and_out_of_band() {
        // bin-centred tones so the periodic extension is exact
        let fs = 1024.0;
        let n = 1024;
        let spec = FilterSpec::BrickwallLowPass { cutoff: 100.0 };
        let inb = tone(90.0, fs, n);
        let out = apply_filter(&inb, &spec).unwrap().value;
        assert!(out.energy() / inb.energy() >= 0.999);
        let outb = tone(110.0, fs, n);
        let out = apply_filter(&outb, &spec).unwrap().value;
        assert!(out.energy() / outb.energy() <= 1e-6);
    }

    #[test]
    fn brickwall_at_nyquist_is_noop_with_warning() {
        let w = tone(13.0, 64.0, 50);
        let r = apply_filter(&w, &FilterSpec::BrickwallLowPass { cutoff: 32.0 }).unwrap();
        assert_eq!(r.value, w);
        assert_eq!(r.warnings.len(), 1);
    }

    proptest! {
        #[test]
        fn rc_even_and_monotone(a in 0.01f64..=1.0, f1 in 0.0f64..2.0, f2 in 0.0f64..2.0) {
            let h = |f| raised_cosine_response(f, 1.0, a).unwrap();
            prop_assert_eq!(h(f1), h(-f1));
            let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(h(lo) >= h(hi));
        }

        #[test]
        fn filtering_never_adds_energy(seed in 0u64..1000, a in 0.05f64..=1.0, n in 8usize..300) {
            let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let w = ComplexWaveform::<f64>::from_fn(n, 10.0, |_, _| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (x >> 11) as f64 / (1u64 << 53) as f64;
                Complex::new(u - 0.5, (u * 7.0).fract() - 0.5)
            }).unwrap();
            let spec = FilterSpec::RaisedCosine { symbol_rate: 4.0, roll_off: a };
            let out = apply_filter(&w, &spec).unwrap().value;
            prop_assert!(out.energy() <= w.energy() * (1.0 + 1e-9));
        }
    }
}
