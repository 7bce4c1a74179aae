use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Modulation, Prbs, TxConfig};
use crate::error::Result;

/// One transmitted symbol in SNU field units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub index: usize,
    pub alice: Complex<f64>,
}

pub fn alice_values(symbols: &[SymbolRecord]) -> Vec<Complex<f64>> {
    symbols.iter().map(|s| s.alice).collect()
}

/// Draws `count` symbols with Var(I) + Var(Q) = V_mod.
///
/// Four-state symbols map one bit of an in-phase PRBS and one bit of a
/// half-period-shifted copy onto (±1 ± j)·√(V_mod/2).
pub fn generate_quantum_symbols(cfg: &TxConfig, count: usize, seed: u64) -> Result<Vec<SymbolRecord>> {
    cfg.validate()?;
    let half = (cfg.v_mod() / 2.0).sqrt();
    let records = match cfg.modulation {
        Modulation::FourState => {
            let mut pi = Prbs::new(cfg.prbs_order, seed)?;
            let mut pq = pi.clone();
            for _ in 0..pq.period() / 2 {
                pq.next_bit();
            }
            (0..count)
                .map(|index| {
                    let i = if pi.next_bit() { -half } else { half };
                    let q = if pq.next_bit() { -half } else { half };
                    SymbolRecord { index, alice: Complex::new(i, q) }
                })
                .collect()
        }
        Modulation::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, half).expect("finite spread");
            (0..count)
                .map(|index| SymbolRecord {
                    index,
                    alice: Complex::new(normal.sample(&mut rng), normal.sample(&mut rng)),
                })
                .collect()
        }
    };
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn variance_and_zero_mean() {
        let cfg = TxConfig::default();
        let s = generate_quantum_symbols(&cfg, 20_000, 11).unwrap();
        let n = s.len() as f64;
        let mean: Complex<f64> = s.iter().map(|r| r.alice).sum::<Complex<f64>>() / n;
        assert!(mean.norm_sqr() < 1e-3 * cfg.v_mod());
        let power = s.iter().map(|r| r.alice.norm_sqr()).sum::<f64>() / n;
        assert!((power / 2.0 - 4.0).abs() < 1e-9);
        let distinct: HashSet<(i64, i64)> =
            s.iter().map(|r| ((r.alice.re * 1e6) as i64, (r.alice.im * 1e6) as i64)).collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn zero_photons_rejected() {
        let cfg = TxConfig { mean_photons: 0.0, ..TxConfig::default() };
        assert!(generate_quantum_symbols(&cfg, 10, 1).is_err());
    }

    #[test]
    fn deterministic_and_periodic() {
        let cfg = TxConfig::default();
        let a = generate_quantum_symbols(&cfg, 300, 5).unwrap();
        let b = generate_quantum_symbols(&cfg, 300, 5).unwrap();
        assert_eq!(a, b);
        for k in 0..100 {
            assert_eq!(a[k].alice, a[k + 127].alice);
        }
        let c = generate_quantum_symbols(&cfg, 300, 6).unwrap();
        assert_ne!(alice_values(&a), alice_values(&c));
    }

    #[test]
    fn gaussian_alphabet_variance() {
        let cfg = TxConfig { modulation: Modulation::Gaussian, ..TxConfig::default() };
        let s = generate_quantum_symbols(&cfg, 100_000, 2).unwrap();
        let var_i = s.iter().map(|r| r.alice.re.powi(2)).sum::<f64>() / s.len() as f64;
        // sampling error of a variance estimate: 4·√(2/n) ≈ 0.018
        assert!((var_i - 4.0).abs() < 0.06, "{var_i}");
    }
}
