use cvqkd_core::channel::{propagate, ChannelConfig};
use cvqkd_core::dsp::{recover, DspConfig};
use cvqkd_core::rxchain::{detect, RxConfig};
use cvqkd_core::txchain::{
    assemble_frame, generate_quantum_symbols, shape_and_carve, synthesize_pilot, LaunchBudget, TxConfig,
};
use cvqkd_core::{Complex, ComplexWaveform, FilterSpec, Scalar};

const FS: f64 = 4e9;

fn configs() -> (TxConfig, ChannelConfig, RxConfig, DspConfig) {
    let rate = 250e6;
    let tx = TxConfig {
        pulse_shape: FilterSpec::RaisedCosine { symbol_rate: rate, roll_off: 0.5 },
        carving: false,
        per_tx_db: f64::INFINITY,
        samples_per_symbol: (FS / rate) as usize,
        ..TxConfig::default()
    };
    let channel = ChannelConfig {
        length_km: 0.0,
        linewidth_tx: 0.0,
        linewidth_lo: 0.0,
        raman_noise_photons: 0.0,
        ..ChannelConfig::default()
    };
    let rx = RxConfig {
        shot_noise_on: false,
        electronic_noise: 0.0,
        bandwidth_quantum: FS / 2.0,
        bandwidth_pilot: FS / 2.0,
        adc_rate: FS,
        adc_bits: 0,
        ..RxConfig::default()
    };
    let dsp = DspConfig { filter_bandwidth: FS / 2.0, ..DspConfig::default() };
    (tx, channel, rx, dsp)
}

/// Relative RMS residual after the best complex gain, and the symbol count.
fn loopback<S: Scalar>(n: usize, seed: u64) -> (f64, usize) {
    let (tx, channel, rx, dsp) = configs();
    let symbols = generate_quantum_symbols(&tx, n, seed).unwrap();
    let quantum: ComplexWaveform<S> = shape_and_carve(&symbols, &tx).unwrap();
    let pilot = synthesize_pilot(&tx, quantum.duration(), quantum.sample_rate()).unwrap().value;
    let frame = assemble_frame(&quantum, &pilot, &tx, &LaunchBudget::default()).unwrap();
    let at_rx = propagate(&frame, &channel).unwrap();
    let cap = detect(&at_rx, &rx, seed).unwrap().value;
    let rec = recover(&cap, Some(&symbols), &dsp, &tx).unwrap().value;
    let alice = rec.paired_alice(&symbols);
    let num: Complex<f64> = rec.bob.iter().zip(&alice).map(|(b, a)| b * a.conj()).sum();
    let den: f64 = alice.iter().map(|a| a.norm_sqr()).sum();
    let gain = num / den;
    let err: f64 = rec.bob.iter().zip(&alice).map(|(b, a)| (b - gain * a).norm_sqr()).sum();
    ((err / den).sqrt(), rec.bob.len())
}

#[test]
fn impairment_free_chain_is_identity() {
    let (rms, kept) = loopback::<f64>(1 << 15, 11);
    assert!(rms < 1e-6, "{rms}");
    assert!(kept > (1 << 15) * 9 / 10);
}

#[test]
fn single_precision_chain_tracks_double() {
    let (rms, _) = loopback::<f32>(1 << 14, 12);
    assert!(rms < 1e-4, "{rms}");
}
