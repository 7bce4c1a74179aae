//! One seeded end-to-end run: transmit → channel → detect → recover →
//! calibrate → estimate → key rate.

use cvqkd_core::channel::{fiber_transmission, propagate, ChannelConfig};
use cvqkd_core::dsp::{recover, RecoveredSymbols};
use cvqkd_core::estimator::{calibrate_snu, estimate_four_state, estimate_gaussian, CalibrationSet, NoiseEstimate};
use cvqkd_core::keyrate::{key_rates, KeyRateReport, SecurityParams};
use cvqkd_core::rxchain::detect;
use cvqkd_core::txchain::{
    assemble_frame, generate_quantum_symbols, shape_and_carve, synthesize_pilot, Modulation, SymbolRecord,
};
use cvqkd_core::{Capture, ComplexWaveform, Frame, Warning};
use serde::Serialize;

use crate::error::{CliError, Stage};
use crate::scenario::{Scenario, TransmissionSource};

/// Calibration captures draw receiver noise from this offset of the run
/// seed unless common random numbers are requested.
const CALIBRATION_SEED_OFFSET: u64 = 0x5EED_0000_0000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Fiber transmission implied by the channel configuration.
    pub configured_transmission: f64,
    pub freq_offset: f64,
    pub decision_offset: f64,
    pub alignment_peak: Option<f64>,
    pub symbols_used: usize,
    pub warnings: Vec<Warning>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub calibration: CalibrationSet,
    pub estimate: NoiseEstimate,
    pub key_rates: KeyRateReport,
    pub diagnostics: Diagnostics,
}

fn fail(stage: Stage, seed: u64) -> impl Fn(cvqkd_core::Error) -> CliError {
    move |source| CliError::Pipeline { stage, seed, source }
}

pub fn channel_for(s: &Scenario, seed: u64) -> ChannelConfig {
    ChannelConfig { seed: seed ^ s.channel.seed.rotate_left(32), ..s.channel.clone() }
}

/// Transmitted symbols and the launched dual-polarization frame.
pub fn transmit(s: &Scenario, seed: u64) -> Result<(Vec<SymbolRecord>, Frame, Vec<Warning>), CliError> {
    let err = fail(Stage::Transmit, seed);
    let symbols = generate_quantum_symbols(&s.tx, s.n_symbols, seed).map_err(&err)?;
    let quantum: ComplexWaveform<f64> = shape_and_carve(&symbols, &s.tx).map_err(&err)?;
    let pilot = synthesize_pilot(&s.tx, quantum.duration(), quantum.sample_rate()).map_err(&err)?;
    let frame = assemble_frame(&quantum, &pilot.value, &s.tx, &s.budget).map_err(&err)?;
    Ok((symbols, frame, pilot.warnings))
}

/// Receiver capture of the frame after the fiber.
pub fn receive(s: &Scenario, seed: u64, frame: &Frame) -> Result<(Capture, Vec<Warning>), CliError> {
    let at_rx = propagate(frame, &channel_for(s, seed)).map_err(fail(Stage::Channel, seed))?;
    let cap = detect(&at_rx, &s.rx, seed).map_err(fail(Stage::Detect, seed))?;
    Ok((cap.value, cap.warnings))
}

/// Shot-noise and electronic-noise captures. Calibration always measures
/// the physical shot noise, even when the signal run switches it off.
pub fn calibration_captures(s: &Scenario, seed: u64) -> Result<(Capture, Capture), CliError> {
    let err = fail(Stage::Detect, seed);
    let n = s.calibration_symbols() * s.tx.samples_per_symbol;
    let fs = s.tx.sample_rate();
    let zero = ComplexWaveform::<f64>::zeros(n, fs).map_err(&err)?;
    let dark = Frame::new(zero.clone(), zero, s.tx.symbol_rate).map_err(&err)?;
    let rx = cvqkd_core::rxchain::RxConfig { shot_noise_on: true, ..s.rx.clone() };
    let (shot_seed, elec_seed) = if s.common_random_numbers {
        (seed, seed)
    } else {
        let c = seed.wrapping_add(CALIBRATION_SEED_OFFSET);
        (c, c.wrapping_add(1))
    };
    let shot = detect(&dark, &rx.shot_noise_only(), shot_seed).map_err(&err)?.value;
    let elec = detect(&dark, &rx.electronic_only(), elec_seed).map_err(&err)?.value;
    Ok((shot, elec))
}

pub fn calibrate(s: &Scenario, seed: u64, decision_offset: f64) -> Result<CalibrationSet, CliError> {
    let (shot, elec) = calibration_captures(s, seed)?;
    calibrate_snu(&shot, &elec, &s.dsp, &s.tx, decision_offset).map_err(fail(Stage::Calibrate, seed))
}

/// Transmit, propagate, detect and recover without calibration.
pub fn recover_symbols(
    s: &Scenario,
    seed: u64,
) -> Result<(Vec<SymbolRecord>, RecoveredSymbols, Vec<Warning>), CliError> {
    let (symbols, frame, mut warnings) = transmit(s, seed)?;
    let (cap, w) = receive(s, seed, &frame)?;
    warnings.extend(w);
    let rec = recover(&cap, Some(&symbols), &s.dsp, &s.tx).map_err(fail(Stage::Recover, seed))?;
    warnings.extend(rec.warnings);
    Ok((symbols, rec.value, warnings))
}

/// Key-rate inputs from an estimate. Negative noise estimates are clamped
/// to zero with a warning and T̂ to at most 1.
pub fn security_params(s: &Scenario, est: &NoiseEstimate, warnings: &mut Vec<Warning>) -> SecurityParams {
    let mut clamp = |v: f64| {
        if v < 0.0 {
            warnings.push(Warning::UnphysicalEstimate { zeta: v });
            0.0
        } else {
            v
        }
    };
    let zeta = clamp(est.zeta_input);
    let zeta_t = clamp(est.zeta_t_input);
    SecurityParams {
        beta: s.security.beta,
        v_mod: s.tx.v_mod(),
        transmission: match s.security.transmission {
            TransmissionSource::Configured => fiber_transmission(&s.channel),
            TransmissionSource::Estimated => est.transmission.min(1.0),
        },
        zeta,
        zeta_t,
        v_el: s.security.v_el.unwrap_or(est.v_el_input).max(0.0),
        symbol_rate: s.tx.symbol_rate,
        efficiency: s.security.efficiency,
    }
}

pub fn run_seed(s: &Scenario, seed: u64) -> Result<RunReport, CliError> {
    let (symbols, rec, mut warnings) = recover_symbols(s, seed)?;
    let cal = calibrate(s, seed, rec.decision_offset)?;
    let alice = rec.paired_alice(&symbols);
    let est = match s.tx.modulation {
        Modulation::FourState => estimate_four_state(&alice, &rec.bob, &cal),
        Modulation::Gaussian => estimate_gaussian(&alice, &rec.bob, &cal),
    }
    .map_err(fail(Stage::Estimate, seed))?;
    warnings.extend(est.warnings);
    let est = est.value;
    let params = security_params(s, &est, &mut warnings);
    let rates = key_rates(&params).map_err(fail(Stage::KeyRate, seed))?;
    Ok(RunReport {
        seed,
        calibration: cal,
        diagnostics: Diagnostics {
            configured_transmission: fiber_transmission(&s.channel),
            freq_offset: rec.freq_offset,
            decision_offset: rec.decision_offset,
            alignment_peak: rec.alignment_peak,
            symbols_used: rec.bob.len(),
            warnings,
        },
        estimate: est,
        key_rates: rates,
    })
}
