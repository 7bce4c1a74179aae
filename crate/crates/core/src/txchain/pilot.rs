use std::f64::consts::PI;

use num_complex::Complex;

use super::TxConfig;
use crate::error::{Error, Flagged, Result, Warning};
use crate::scalar::Scalar;
use crate::sigcore::{tone_power, ComplexWaveform};

/// Field transfer of a nested I/Q modulator with V_π = V_π,φ = 1:
/// E = ½[cos(π(v_i + V_iB)/2) + e^{jπV_φB/2}·cos(π(v_q + V_qB)/2)]
/// with V_iB = V_qB = −(1 + ε) and V_φB = 1 + ε_φ. The Q drive carries the
/// RF amplitude and phase imbalance.
pub fn synthesize_pilot<S: Scalar>(
    cfg: &TxConfig,
    duration: f64,
    sample_rate: f64,
) -> Result<Flagged<ComplexWaveform<S>>> {
    let need = 2.0 * (cfg.pilot_frequency + cfg.symbol_rate);
    if sample_rate <= need {
        return Err(Error::Config(format!("pilot needs a sample rate above {need:e} Sa/s, got {sample_rate:e}")));
    }
    let n = (duration * sample_rate).round().max(1.0) as usize;
    let a = cfg.drive_amplitude;
    let mut warnings = Vec::new();
    if a > 2.0 {
        warnings.push(Warning::DriveNonlinear { amplitude: a });
    }
    let bias = -(1.0 + cfg.iq_bias_error);
    let outer = Complex::from_polar(1.0, PI * (1.0 + cfg.phase_bias_error) / 2.0);
    let gain_q = 10f64.powf(cfg.rf_imbalance_db / 20.0);
    let skew = cfg.rf_imbalance_deg.to_radians();
    let w = 2.0 * PI * cfg.pilot_frequency;
    let wave = ComplexWaveform::from_fn(n, sample_rate, |_, t| {
        let vi = a * (w * t).cos();
        let vq = a * gain_q * (w * t + skew).sin();
        let e = 0.5 * (Complex::new((PI * (vi + bias) / 2.0).cos(), 0.0) + outer * (PI * (vq + bias) / 2.0).cos());
        Complex::new(S::of(e.re), S::of(e.im))
    })?;
    Ok(Flagged::with(wave, warnings))
}

/// Powers of the three pilot spectral lines of interest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PilotTones {
    pub upper: f64,
    pub carrier: f64,
    pub mirror: f64,
}

impl PilotTones {
    pub fn measure<S: Scalar>(w: &ComplexWaveform<S>, pilot_frequency: f64) -> Self {
        Self {
            upper: tone_power(w, pilot_frequency),
            carrier: tone_power(w, 0.0),
            mirror: tone_power(w, -pilot_frequency),
        }
    }

    /// Carrier suppression relative to the +Ω line in dB (positive = below).
    pub fn carrier_suppression_db(&self) -> f64 {
        10.0 * (self.upper / self.carrier).log10()
    }

    pub fn mirror_suppression_db(&self) -> f64 {
        10.0 * (self.upper / self.mirror).log10()
    }
}

/// Bias errors that put the carrier `carrier_db` and the mirror sideband
/// `mirror_db` below the +Ω tone. The mirror depends on the phase-section
/// error alone, so the two are found by successive bisection over
/// `[0, 0.5]`.
pub fn tune_bias_errors(cfg: &TxConfig, carrier_db: f64, mirror_db: f64) -> Result<TxConfig> {
    // whole pilot periods so the line powers are exact
    let periods = 64.0;
    let fs = 16.0 * cfg.pilot_frequency;
    let measure = |c: &TxConfig| -> Result<PilotTones> {
        let w = synthesize_pilot::<f64>(c, periods / c.pilot_frequency, fs)?.value;
        Ok(PilotTones::measure(&w, c.pilot_frequency))
    };
    let bisect = |target: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let (mut lo, mut hi) = (0.0, 0.5);
        if f(hi)? > target {
            return Err(Error::Config(format!("suppression of {target} dB is out of reach")));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut c = TxConfig { iq_bias_error: 0.0, phase_bias_error: 0.0, ..cfg.clone() };
    c.phase_bias_error =
        bisect(mirror_db, &|e| Ok(measure(&TxConfig { phase_bias_error: e, ..c.clone() })?.mirror_suppression_db()))?;
    c.iq_bias_error =
        bisect(carrier_db, &|e| Ok(measure(&TxConfig { iq_bias_error: e, ..c.clone() })?.carrier_suppression_db()))?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tones(cfg: &TxConfig) -> PilotTones {
        // 100 full pilot periods at 16 GSa/s
        let w = synthesize_pilot::<f64>(cfg, 100e-9, 16e9).unwrap().value;
        PilotTones::measure(&w, cfg.pilot_frequency)
    }

    #[test]
    fn ideal_bias_is_single_tone() {
        let t = tones(&TxConfig::default());
        assert!(t.carrier_suppression_db() >= 60.0);
        assert!(t.mirror_suppression_db() >= 60.0);
        let a = PI * 0.2 / 2.0;
        assert!((t.upper.sqrt() - bessel_j1(a)).abs() < 1e-12);
    }

    fn bessel_j1(x: f64) -> f64 {
        (0..20i32)
            .map(|k| {
                let fact = |m: i32| (1..=m).map(f64::from).product::<f64>();
                (-1f64).powi(k) / (fact(k) * fact(k + 1)) * (x / 2.0).powi(2 * k + 1)
            })
            .sum()
    }

    #[test]
    fn carrier_grows_with_bias_error() {
        let mut last = 0.0;
        for e in [0.01, 0.02, 0.05, 0.1] {
            let t = tones(&TxConfig { iq_bias_error: e, ..TxConfig::default() });
            assert!(t.carrier > last);
            last = t.carrier;
        }
    }

    #[test]
    fn mirror_ratio_matches_half_angle() {
        let eps = 0.1;
        let t = tones(&TxConfig { phase_bias_error: eps, ..TxConfig::default() });
        let x: f64 = PI * eps / 2.0;
        let expect = -20.0 * (x / 2.0).tan().log10();
        assert!((t.mirror_suppression_db() - expect).abs() < 1e-6);
    }

    #[test]
    fn tuned_biases_hit_targets() {
        let c = tune_bias_errors(&TxConfig::default(), 23.0, 14.0).unwrap();
        let t = tones(&c);
        assert!((t.carrier_suppression_db() - 23.0).abs() < 1e-6);
        assert!((t.mirror_suppression_db() - 14.0).abs() < 1e-6);
    }

    #[test]
    fn sample_rate_precondition() {
        assert!(synthesize_pilot::<f64>(&TxConfig::default(), 1e-7, 2e9).is_err());
    }

    #[test]
    fn overdrive_warns() {
        let cfg = TxConfig { drive_amplitude: 2.5, ..TxConfig::default() };
        let r = synthesize_pilot::<f64>(&cfg, 1e-8, 16e9).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }
}
