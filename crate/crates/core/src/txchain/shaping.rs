use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;

use super::{SymbolRecord, TxConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sigcore::{apply_response, frequency_axis, next_pow2, ComplexWaveform};

/// Raised-cosine carving window: 1 at symbol centres, 0 at the transitions.
pub fn carving_window(t: f64, symbol_rate: f64) -> f64 {
    0.5 * (1.0 + (2.0 * PI * t * symbol_rate).cos())
}

/// Upsamples symbol impulses, shapes them with the configured pulse
/// (normalized to unit peak) and optionally applies the carving window.
/// Symbol k is centred on sample k·samples_per_symbol.
pub fn shape_and_carve<S: Scalar>(symbols: &[SymbolRecord], cfg: &TxConfig) -> Result<ComplexWaveform<S>> {
    cfg.validate()?;
    let fs = cfg.sample_rate();
    let nyquist = fs / 2.0;
    let mut bandwidth = cfg.pulse_shape.occupied_bandwidth();
    if cfg.carving {
        bandwidth += cfg.symbol_rate;
    }
    if bandwidth > nyquist {
        return Err(Error::Aliasing { bandwidth, nyquist });
    }
    let sps = cfg.samples_per_symbol;
    let n = symbols.len().max(1) * sps;
    let mut impulses = vec![Complex::<S>::zero(); n];
    for (k, s) in symbols.iter().enumerate() {
        impulses[k * sps] = Complex::new(S::of(s.alice.re), S::of(s.alice.im));
    }
    let raw = ComplexWaveform::new(impulses, fs)?;
    let spec = cfg.pulse_shape;
    let m = next_pow2(n);
    let peak = frequency_axis(m, fs).into_iter().map(|f| spec.response(f)).sum::<f64>() / m as f64;
    let mut shaped = apply_response(&raw, |f| spec.response(f) / peak);
    if cfg.carving {
        let rq = cfg.symbol_rate;
        for (i, s) in shaped.samples_mut().iter_mut().enumerate() {
            *s = *s * S::of(carving_window(i as f64 / fs, rq));
        }
    }
    Ok(shaped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::FilterSpec;
    use crate::txchain::generate_quantum_symbols;

    fn rc_cfg() -> TxConfig {
        TxConfig {
            symbol_rate: 500e6,
            samples_per_symbol: 8,
            pulse_shape: FilterSpec::RaisedCosine { symbol_rate: 500e6, roll_off: 0.5 },
            carving: false,
            ..TxConfig::default()
        }
    }

    #[test]
    fn isolated_nyquist_pulse_is_isi_free() {
        let cfg = rc_cfg();
        let mut syms = vec![SymbolRecord { index: 0, alice: Complex::zero() }; 64];
        syms[10].alice = Complex::new(1.0, 0.0);
        let w: ComplexWaveform<f64> = shape_and_carve(&syms, &cfg).unwrap();
        for k in 0..64 {
            let v = w.samples()[k * 8].norm();
            if k == 10 {
                assert!((v - 1.0).abs() < 1e-9);
            } else {
                assert!(v < 1e-9, "symbol {k}: {v}");
            }
        }
    }

    #[test]
    fn nyquist_stream_hits_symbols_exactly() {
        let cfg = rc_cfg();
        let syms = generate_quantum_symbols(&cfg, 256, 3).unwrap();
        let w: ComplexWaveform<f64> = shape_and_carve(&syms, &cfg).unwrap();
        for (k, s) in syms.iter().enumerate() {
            assert!((w.samples()[k * 8] - s.alice).norm() < 1e-9);
        }
    }

    #[test]
    fn carving_nulls_boundaries() {
        let cfg = TxConfig::default();
        let syms = vec![SymbolRecord { index: 0, alice: Complex::new(2.0, 2.0) }; 128];
        let w: ComplexWaveform<f64> = shape_and_carve(&syms, &cfg).unwrap();
        let peak = w.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
        for k in 8..120 {
            assert!(w.samples()[k * 16 + 8].norm() <= 0.01 * peak);
        }
    }

    #[test]
    fn aliasing_rejected() {
        let cfg = TxConfig {
            samples_per_symbol: 2,
            pulse_shape: FilterSpec::Gaussian { symbol_rate: 250e6, bandwidth_time: 0.5 },
            pilot_frequency: 1e9,
            ..TxConfig::default()
        };
        let syms = generate_quantum_symbols(&cfg, 16, 1).unwrap();
        assert!(matches!(shape_and_carve::<f64>(&syms, &cfg), Err(Error::Aliasing { .. })));
    }
}
