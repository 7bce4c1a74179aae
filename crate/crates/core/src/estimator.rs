//! Shot-noise-unit calibration and excess-noise estimation.
//!
//! Raw estimates are per heterodyne output quadrature. Values referred to the
//! receiver input (the convention of reported excess-noise figures) are twice
//! the output values, reflecting the 3 dB split of the heterodyne hybrid.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dsp::{sample_calibration, DspConfig};
use crate::error::{Error, Flagged, Result, Warning};
use crate::rxchain::{CalibrationMode, Capture};
use crate::scalar::Scalar;
use crate::txchain::TxConfig;

/// Minimum sequence length for an estimate.
pub const MIN_SYMBOLS: usize = 10_000;

/// Per-quadrature variances of the two calibration measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub shot_var: f64,
    pub elec_var: f64,
    pub n_samples: usize,
}

fn quadrature_variance(x: &[Complex<f64>]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<Complex<f64>>() / n;
    x.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (2.0 * (n - 1.0))
}

impl CalibrationSet {
    pub fn from_samples(shot: &[Complex<f64>], elec: &[Complex<f64>]) -> Result<Self> {
        if shot.len() < 2 || elec.len() < 2 {
            return Err(Error::Calibration("need at least two samples per measurement".into()));
        }
        let cal = Self {
            shot_var: quadrature_variance(shot),
            elec_var: quadrature_variance(elec),
            n_samples: shot.len().min(elec.len()),
        };
        if cal.shot_var <= cal.elec_var {
            return Err(Error::Calibration(format!(
                "shot-noise variance {} not above electronic variance {}",
                cal.shot_var, cal.elec_var
            )));
        }
        Ok(cal)
    }

    /// Multiplier on variances that defines 1 SNU.
    pub fn scale(&self) -> f64 {
        1.0 / (self.shot_var - self.elec_var)
    }

    /// Electronic noise in output-referred SNU.
    pub fn v_el(&self) -> f64 {
        self.elec_var * self.scale()
    }
}

/// Processes the shot-noise and electronic captures through the same DSP
/// front end as the signal and derives the SNU reference.
pub fn calibrate_snu<S: Scalar>(
    shot: &Capture<S>,
    elec: &Capture<S>,
    dsp: &DspConfig,
    tx: &TxConfig,
    decision_offset: f64,
) -> Result<CalibrationSet> {
    if shot.mode != CalibrationMode::ShotNoiseOnly || elec.mode != CalibrationMode::ElectronicOnly {
        return Err(Error::Calibration(format!(
            "captures in modes {:?}/{:?}, expected shot-noise-only/electronic-only",
            shot.mode, elec.mode
        )));
    }
    let s = sample_calibration(shot, dsp, tx, decision_offset)?;
    let e = sample_calibration(elec, dsp, tx, decision_offset)?;
    CalibrationSet::from_samples(&s, &e)
}

/// Calibrated channel parameters. Unsuffixed noise values are per output
/// quadrature; `_input` values are referred to the receiver input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    /// Total excess noise V_cond − 1, including the TIA contribution.
    pub zeta: f64,
    /// Excess noise without the trusted TIA contribution.
    pub zeta_t: f64,
    pub transmission: f64,
    pub snr: f64,
    pub v_el: f64,
    pub n_symbols: usize,
    pub zeta_input: f64,
    pub zeta_t_input: f64,
    pub v_el_input: f64,
    /// Input-referred ζ divided by T̂.
    pub zeta_channel: f64,
    /// Per-quadrature estimates of ζ.
    pub zeta_i: f64,
    pub zeta_q: f64,
    /// 95% half-width of ζ from the variance-of-variance formula.
    pub zeta_ci95: f64,
    /// Empirical modulation variance Var(I) + Var(Q) of Alice, SNU.
    pub v_mod: f64,
}

fn build(
    v_i: f64,
    v_q: f64,
    t: Complex<f64>,
    v_mod: f64,
    cal: &CalibrationSet,
    n: usize,
    alice_energy: f64,
) -> Result<Flagged<NoiseEstimate>> {
    let v_cond = (v_i + v_q) / 2.0;
    // gain indistinguishable from zero at 5 standard errors
    let t_sigma = (2.0 * v_cond.max(0.0) / alice_energy).sqrt();
    if !(t.norm() > 5.0 * t_sigma) {
        return Err(Error::DeadChannel(t.norm()));
    }
    let v_el = cal.v_el();
    let zeta = v_cond - 1.0;
    let zeta_t = zeta - v_el;
    let transmission = t.norm_sqr();
    let mut warnings = Vec::new();
    if v_cond <= 1e-9 {
        warnings.push(Warning::UnphysicalEstimate { zeta });
    }
    Ok(Flagged::with(
        NoiseEstimate {
            zeta,
            zeta_t,
            transmission,
            snr: transmission * v_mod / 2.0 / v_cond,
            v_el,
            n_symbols: n,
            zeta_input: 2.0 * zeta,
            zeta_t_input: 2.0 * zeta_t,
            v_el_input: 2.0 * v_el,
            zeta_channel: 2.0 * zeta / transmission,
            zeta_i: v_i - 1.0,
            zeta_q: v_q - 1.0,
            zeta_ci95: 1.96 * v_cond / (n as f64).sqrt(),
            v_mod,
        },
        warnings,
    ))
}

fn check(alice: &[Complex<f64>], bob: &[Complex<f64>]) -> Result<()> {
    if alice.len() != bob.len() {
        return Err(Error::Mismatch(format!("{} Alice vs {} Bob symbols", alice.len(), bob.len())));
    }
    if alice.len() < MIN_SYMBOLS {
        return Err(Error::Config(format!("need at least {MIN_SYMBOLS} symbols, got {}", alice.len())));
    }
    Ok(())
}

/// Conditional-variance estimate for the four-state alphabet: complex least
/// squares bob = t·alice + noise, pooled over both quadratures.
pub fn estimate_four_state(
    alice: &[Complex<f64>],
    bob: &[Complex<f64>],
    cal: &CalibrationSet,
) -> Result<Flagged<NoiseEstimate>> {
    check(alice, bob)?;
    let k = cal.scale().sqrt();
    let n = alice.len();
    let saa: f64 = alice.iter().map(|a| a.norm_sqr()).sum();
    let sab: Complex<f64> = alice.iter().zip(bob).map(|(a, b)| a.conj() * b * k).sum();
    let t = sab / saa;
    let (mut ri, mut rq) = (0.0, 0.0);
    for (a, b) in alice.iter().zip(bob) {
        let r = b * k - t * a;
        ri += r.re * r.re;
        rq += r.im * r.im;
    }
    // one complex parameter fitted: one degree of freedom per quadrature
    let dof = (n - 1) as f64;
    build(ri / dof, rq / dof, t, saa / n as f64, cal, n, saa)
}

/// Difference-variance route for Gaussian alphabets: var(x_B − t·x_A) with
/// t the covariance-optimal complex gain, means removed.
pub fn estimate_gaussian(
    alice: &[Complex<f64>],
    bob: &[Complex<f64>],
    cal: &CalibrationSet,
) -> Result<Flagged<NoiseEstimate>> {
    check(alice, bob)?;
    let k = cal.scale().sqrt();
    let n = alice.len() as f64;
    let ma = alice.iter().sum::<Complex<f64>>() / n;
    let mb = bob.iter().sum::<Complex<f64>>() * k / n;
    let var_a: f64 = alice.iter().map(|a| (a - ma).norm_sqr()).sum::<f64>();
    let cov: Complex<f64> = alice.iter().zip(bob).map(|(a, b)| (a - ma).conj() * (b * k - mb)).sum();
    let t = cov / var_a;
    let (mut ri, mut rq) = (0.0, 0.0);
    for (a, b) in alice.iter().zip(bob) {
        let d = (b * k - mb) - t * (a - ma);
        ri += d.re * d.re;
        rq += d.im * d.im;
    }
    let dof = n - 2.0;
    build(ri / dof, rq / dof, t, var_a / (n - 1.0), cal, alice.len(), var_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SymbolChannel;
    use crate::txchain::{alice_values, generate_quantum_symbols, Modulation};

    fn run(zeta_in: f64, v_el: f64, seed: u64, modulation: Modulation) -> NoiseEstimate {
        let tx = TxConfig { modulation, ..TxConfig::default() };
        let alice = alice_values(&generate_quantum_symbols(&tx, 1 << 17, seed).unwrap());
        let ch = SymbolChannel { transmission: 0.5016, excess_noise: zeta_in, electronic_noise: v_el, seed };
        let bob = ch.transmit(&alice);
        let (s, e) = ch.calibration(1 << 17);
        let cal = CalibrationSet::from_samples(&s, &e).unwrap();
        match modulation {
            Modulation::FourState => estimate_four_state(&alice, &bob, &cal),
            Modulation::Gaussian => estimate_gaussian(&alice, &bob, &cal),
        }
        .unwrap()
        .value
    }

    #[test]
    fn calibration_recovers_v_el() {
        let ch = SymbolChannel { transmission: 1.0, excess_noise: 0.0, electronic_noise: 0.1, seed: 3 };
        let (s, e) = ch.calibration(1 << 17);
        let cal = CalibrationSet::from_samples(&s, &e).unwrap();
        assert!((cal.v_el() / 0.1 - 1.0).abs() < 0.02);
        let zero = SymbolChannel { electronic_noise: 0.0, ..ch };
        let (s, _) = zero.calibration(1 << 10);
        let z = vec![Complex::new(0.0, 0.0); 16];
        let cal = CalibrationSet::from_samples(&s, &z).unwrap();
        assert_eq!(cal.v_el(), 0.0);
        assert!((cal.scale() - 1.0 / cal.shot_var).abs() < 1e-15);
        assert!(CalibrationSet::from_samples(&z, &s).is_err());
    }

    #[test]
    fn loopback_shot_noise_only() {
        let e = run(0.0, 0.0, 1, Modulation::FourState);
        assert!(e.zeta_t.abs() < 0.003);
        assert!((e.zeta - e.zeta_t - e.v_el).abs() < 1e-15);
    }

    #[test]
    fn injection_oracle() {
        for z in [0.005, 0.02, 0.05] {
            let e = run(z, 0.01, 7, Modulation::FourState);
            // 4σ of a single trial: signal and calibration variances each
            // carry 1/sqrt(2n) relative error, doubled on the input side
            let tol = 4.0 * 2.0 * (2.0 / (2.0 * (1u64 << 17) as f64)).sqrt() * 1.02;
            assert!((e.zeta_t_input - z).abs() <= tol, "{z}: {}", e.zeta_t_input);
            assert!((e.transmission - 0.5016).abs() < 0.01);
        }
    }

    #[test]
    fn gaussian_matches_four_state() {
        let a = run(0.02, 0.01, 4, Modulation::FourState);
        let b = run(0.02, 0.01, 4, Modulation::Gaussian);
        let sigma = 1.0 / ((1u64 << 17) as f64).sqrt();
        assert!((a.zeta - b.zeta).abs() < 3.0 * 2.0 * sigma);
        assert!((a.snr / b.snr - 1.0).abs() < 0.05);
    }

    #[test]
    fn identical_sequences_flag_unphysical() {
        let tx = TxConfig { modulation: Modulation::Gaussian, ..TxConfig::default() };
        let a = alice_values(&generate_quantum_symbols(&tx, 20_000, 1).unwrap());
        let cal = CalibrationSet { shot_var: 1.1, elec_var: 0.1, n_samples: 1 };
        let e = estimate_gaussian(&a, &a, &cal).unwrap();
        assert_eq!(e.warnings.len(), 1);
        assert!((e.value.zeta_t + 1.0 + 0.1).abs() < 1e-9);
    }

    #[test]
    fn rotation_invariance_and_dead_channel() {
        let tx = TxConfig::default();
        let alice = alice_values(&generate_quantum_symbols(&tx, 20_000, 1).unwrap());
        let ch = SymbolChannel { transmission: 0.3, excess_noise: 0.01, electronic_noise: 0.0, seed: 2 };
        let bob = ch.transmit(&alice);
        let cal = CalibrationSet { shot_var: 1.0, elec_var: 0.0, n_samples: 1 };
        let e1 = estimate_four_state(&alice, &bob, &cal).unwrap().value;
        let rot: Vec<_> = bob.iter().map(|b| b * Complex::from_polar(1.0, 2.1)).collect();
        let e2 = estimate_four_state(&alice, &rot, &cal).unwrap().value;
        assert!((e1.zeta - e2.zeta).abs() < 1e-6);
        assert!((e1.transmission - e2.transmission).abs() < 1e-6);
        let dead = SymbolChannel { transmission: 1e-12, ..ch };
        let bob = dead.transmit(&alice);
        assert!(matches!(estimate_four_state(&alice, &bob, &cal), Err(Error::DeadChannel(_))));
    }

    #[test]
    fn short_sequences_rejected() {
        let a = vec![Complex::new(1.0, 1.0); 100];
        let cal = CalibrationSet { shot_var: 1.0, elec_var: 0.0, n_samples: 1 };
        assert!(estimate_four_state(&a, &a, &cal).is_err());
    }
}
