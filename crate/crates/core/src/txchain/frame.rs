use serde::{Deserialize, Serialize};

use super::TxConfig;
use crate::error::{BudgetViolation, Error, Result};
use crate::scalar::Scalar;
use crate::sigcore::{ComplexWaveform, DualPolFrame};

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;

/// Photon energy in joules at `wavelength_nm`.
pub fn photon_energy(wavelength_nm: f64) -> f64 {
    PLANCK * LIGHT_SPEED / (wavelength_nm * 1e-9)
}

/// Quantum launch power ⟨n⟩·R_q·hν in dBm.
pub fn quantum_launch_dbm(cfg: &TxConfig, wavelength_nm: f64) -> f64 {
    let watts = cfg.mean_photons * cfg.symbol_rate * photon_energy(wavelength_nm);
    10.0 * (watts / 1e-3).log10()
}

/// Transmitter-referred power window for both tributaries, in dBm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaunchBudget {
    pub sensitivity_q_dbm: f64,
    pub eve_dbm: f64,
    pub saturation_q_dbm: f64,
    pub sensitivity_pilot_dbm: f64,
    pub overload_pilot_dbm: f64,
    pub required_pilot_snr_db: f64,
    pub wavelength_nm: f64,
}

impl Default for LaunchBudget {
    fn default() -> Self {
        Self {
            sensitivity_q_dbm: -80.0,
            eve_dbm: -60.0,
            saturation_q_dbm: -20.0,
            sensitivity_pilot_dbm: -70.0,
            overload_pilot_dbm: -20.0,
            required_pilot_snr_db: 10.0,
            wavelength_nm: 1531.9,
        }
    }
}

impl LaunchBudget {
    /// Checks S_q < P_q < P_Eve ≤ P_Sat − 10 dB and S_Π + SNR < P_Π < P_Ov.
    pub fn check(&self, cfg: &TxConfig) -> std::result::Result<(), BudgetViolation> {
        let pq = quantum_launch_dbm(cfg, self.wavelength_nm);
        let pp = pq + cfg.pilot_to_quantum_db;
        if pq <= self.sensitivity_q_dbm {
            return Err(BudgetViolation::QuantumBelowSensitivity {
                launch_dbm: pq,
                sensitivity_dbm: self.sensitivity_q_dbm,
            });
        }
        if pq >= self.eve_dbm {
            return Err(BudgetViolation::QuantumAboveEavesdropperBound { launch_dbm: pq, bound_dbm: self.eve_dbm });
        }
        if self.eve_dbm > self.saturation_q_dbm - 10.0 {
            return Err(BudgetViolation::EavesdropperNearSaturation {
                eve_dbm: self.eve_dbm,
                saturation_dbm: self.saturation_q_dbm,
            });
        }
        let need = self.sensitivity_pilot_dbm + self.required_pilot_snr_db;
        if pp <= need {
            return Err(BudgetViolation::PilotBelowSensitivity { launch_dbm: pp, required_dbm: need });
        }
        if pp >= self.overload_pilot_dbm {
            return Err(BudgetViolation::PilotOverload { launch_dbm: pp, overload_dbm: self.overload_pilot_dbm });
        }
        Ok(())
    }
}

/// Places the quantum signal on TE and the pilot on TM, levels the pilot to
/// `pilot_to_quantum_db` above the quantum mean power and cross-couples a
/// fraction 10^(−PER/10) of each plane into the other.
pub fn assemble_frame<S: Scalar>(
    quantum: &ComplexWaveform<S>,
    pilot: &ComplexWaveform<S>,
    cfg: &TxConfig,
    budget: &LaunchBudget,
) -> Result<DualPolFrame<S>> {
    quantum.check_compatible(pilot)?;
    cfg.validate()?;
    budget.check(cfg).map_err(Error::Budget)?;
    let pp = pilot.mean_power();
    if pp <= 0.0 {
        return Err(Error::Config("pilot waveform carries no power".into()));
    }
    let target = quantum.mean_power() * 10f64.powf(cfg.pilot_to_quantum_db / 10.0);
    let pilot = pilot.clone().scaled((target / pp).sqrt());
    let leak = 10f64.powf(-cfg.per_tx_db / 10.0);
    let (through, cross) = (S::of((1.0 - leak).sqrt()), S::of(leak.sqrt()));
    let mix = |a: &ComplexWaveform<S>, b: &ComplexWaveform<S>| {
        let samples = a.samples().iter().zip(b.samples()).map(|(x, y)| *x * through + *y * cross).collect();
        ComplexWaveform::new(samples, a.sample_rate())
    };
    DualPolFrame::new(mix(quantum, &pilot)?, mix(&pilot, quantum)?, cfg.symbol_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::txchain::{generate_quantum_symbols, shape_and_carve, synthesize_pilot};

    fn parts(cfg: &TxConfig) -> (ComplexWaveform<f64>, ComplexWaveform<f64>) {
        let syms = generate_quantum_symbols(cfg, 512, 1).unwrap();
        let q = shape_and_carve(&syms, cfg).unwrap();
        let p = synthesize_pilot(cfg, q.duration(), q.sample_rate()).unwrap().value;
        (q, p)
    }

    #[test]
    fn launch_power_matches_photon_count() {
        let p = quantum_launch_dbm(&TxConfig::default(), 1531.9);
        assert!((p + 68.87).abs() < 0.01, "{p}");
    }

    #[test]
    fn pilot_ratio_without_leakage() {
        let cfg = TxConfig { per_tx_db: f64::INFINITY, ..TxConfig::default() };
        let (q, p) = parts(&cfg);
        let f = assemble_frame(&q, &p, &cfg, &LaunchBudget::default()).unwrap();
        assert_eq!(f.te, q);
        let ratio = f.tm.mean_power() / f.te.mean_power();
        assert!((ratio / 100.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn pilot_leak_fraction() {
        let cfg = TxConfig { per_tx_db: 30.0, ..TxConfig::default() };
        let (q, p) = parts(&cfg);
        let f = assemble_frame(&q, &p, &cfg, &LaunchBudget::default()).unwrap();
        let f_inf =
            assemble_frame(&q, &p, &TxConfig { per_tx_db: f64::INFINITY, ..cfg.clone() }, &LaunchBudget::default())
                .unwrap();
        // the TE leak term is √f·pilot; isolate it by subtracting the through path
        let leak: f64 =
            f.te.samples()
                .iter()
                .zip(q.samples())
                .map(|(t, x)| (t - x * (1.0 - 1e-3f64).sqrt()).norm_sqr())
                .sum::<f64>()
                / q.len() as f64;
        let pilot_power = f_inf.tm.mean_power();
        assert!((leak / pilot_power - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn budget_violation_is_named() {
        let cfg = TxConfig { mean_photons: 400.0, ..TxConfig::default() };
        let (q, p) = parts(&TxConfig::default());
        match assemble_frame(&q, &p, &cfg, &LaunchBudget::default()) {
            Err(Error::Budget(BudgetViolation::QuantumAboveEavesdropperBound { .. })) => {}
            other => panic!("unexpected {other:?}"),
        }
        let low = TxConfig { mean_photons: 0.001, ..TxConfig::default() };
        assert!(matches!(LaunchBudget::default().check(&low), Err(BudgetViolation::QuantumBelowSensitivity { .. })));
    }
}
