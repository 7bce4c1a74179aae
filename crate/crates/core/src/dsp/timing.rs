use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sigcore::{guard_range, ComplexWaveform};

/// Mean |s(kT + τ)|² as a trigonometric polynomial in τ, recovered exactly
/// from the samples-per-symbol phases of a band-limited trace.
#[derive(Clone, Debug)]
pub struct TimingObjective {
    coeffs: Vec<Complex<f64>>,
    symbol_rate: f64,
}

impl TimingObjective {
    pub fn from_waveform<S: Scalar>(w: &ComplexWaveform<S>, symbol_rate: f64, guard: f64) -> Result<Self> {
        let ratio = w.sample_rate() / symbol_rate;
        let sps = ratio.round() as usize;
        if (ratio - sps as f64).abs() > 1e-9 || sps < 2 {
            return Err(Error::DecisionSearch(format!(
                "sample rate must be an integer multiple (≥ 2) of the symbol rate, got {ratio}"
            )));
        }
        let range = guard_range(w.len() / sps, guard);
        if range.is_empty() {
            return Err(Error::DecisionSearch("trace too short".into()));
        }
        let x = w.samples();
        let mut j_vals = vec![0.0; sps];
        for k in range.clone() {
            for (j, acc) in j_vals.iter_mut().enumerate() {
                *acc += x[k * sps + j].norm_sqr().wide();
            }
        }
        for v in &mut j_vals {
            *v /= range.len() as f64;
        }
        let coeffs = (0..sps)
            .map(|m| {
                j_vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| Complex::from_polar(*v, -2.0 * PI * (m * j) as f64 / sps as f64))
                    .sum::<Complex<f64>>()
                    / sps as f64
            })
            .collect();
        Ok(Self { coeffs, symbol_rate })
    }

    /// Objective at sampling offset `tau` seconds.
    pub fn eval(&self, tau: f64) -> f64 {
        let sps = self.coeffs.len();
        let u = tau * self.symbol_rate * sps as f64;
        let mut acc = self.coeffs[0].re;
        for m in 1..sps.div_ceil(2) {
            let c = self.coeffs[m];
            acc += 2.0 * (c * Complex::from_polar(1.0, 2.0 * PI * (m as f64) * u / sps as f64)).re;
        }
        if sps.is_multiple_of(2) {
            acc += self.coeffs[sps / 2].re * (PI * u).cos();
        }
        acc
    }

    /// Grid search over one symbol period centred on zero.
    pub fn argmax(&self, resolution: f64) -> Result<f64> {
        let period = 1.0 / self.symbol_rate;
        let steps = (period / resolution).round().max(2.0) as i64;
        let half = steps / 2;
        let (mut best, mut lo, mut hi) = ((f64::NEG_INFINITY, 0.0), f64::INFINITY, f64::NEG_INFINITY);
        // visit offsets by increasing magnitude so ties resolve toward zero
        for i in 0..=half {
            for sign in [1i64, -1] {
                if i == 0 && sign < 0 {
                    continue;
                }
                let k = sign * i;
                if k < -half || k >= steps - half {
                    continue;
                }
                let tau = k as f64 * period / steps as f64;
                let v = self.eval(tau);
                lo = lo.min(v);
                hi = hi.max(v);
                if v > best.0 * (1.0 + 1e-12) || best.0 == f64::NEG_INFINITY {
                    best = (v, tau);
                }
            }
        }
        if !(hi - lo > 1e-9 * hi.abs().max(1e-300)) {
            return Err(Error::DecisionSearch("objective is flat; no modulation found".into()));
        }
        Ok(best.1)
    }
}

/// Sampling offset maximizing the mean symbol power of the quantum plane.
pub fn find_decision_offset<S: Scalar>(
    w: &ComplexWaveform<S>,
    symbol_rate: f64,
    resolution: f64,
    guard: f64,
) -> Result<f64> {
    TimingObjective::from_waveform(w, symbol_rate, guard)?.argmax(resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::sample_at;
    use crate::txchain::{generate_quantum_symbols, shape_and_carve, TxConfig};

    #[test]
    fn trig_polynomial_matches_direct_sampling() {
        let cfg = TxConfig::default();
        let syms = generate_quantum_symbols(&cfg, 1024, 2).unwrap();
        let w: ComplexWaveform<f64> = shape_and_carve(&syms, &cfg).unwrap();
        let obj = TimingObjective::from_waveform(&w, cfg.symbol_rate, 0.01).unwrap();
        let tau = 0.37e-9;
        let s = sample_at(&w, cfg.symbol_rate, tau).unwrap().waveform;
        let range = guard_range(1024, 0.01);
        let direct = s.samples()[range.clone()].iter().map(|x| x.norm_sqr()).sum::<f64>() / range.len() as f64;
        assert!((obj.eval(tau) / direct - 1.0).abs() < 1e-6);
    }

    #[test]
    fn loopback_finds_symbol_centre() {
        let cfg = TxConfig::default();
        let syms = generate_quantum_symbols(&cfg, 2048, 2).unwrap();
        let w: ComplexWaveform<f64> = shape_and_carve(&syms, &cfg).unwrap();
        let tau = find_decision_offset(&w, cfg.symbol_rate, 1e-12, 0.01).unwrap();
        assert!(tau.abs() <= 1e-12);
    }

    #[test]
    fn flat_objective_errors() {
        let w = ComplexWaveform::<f64>::from_fn(1600, 16.0, |_, _| Complex::new(1.0, 0.0)).unwrap();
        assert!(find_decision_offset(&w, 1.0, 0.01, 0.01).is_err());
    }
}
