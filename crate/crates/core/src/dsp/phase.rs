use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Flagged, Warning};

/// Removes 2π jumps between consecutive phase samples.
pub fn unwrap(phase: &mut [f64]) {
    let mut offset = 0.0;
    let mut prev = match phase.first() {
        Some(&p) => p,
        None => return,
    };
    for p in phase.iter_mut().skip(1) {
        let raw = *p;
        let mut d = raw - prev;
        while d > PI {
            d -= 2.0 * PI;
            offset -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
            offset += 2.0 * PI;
        }
        prev = raw;
        *p = raw + offset;
    }
}

/// Centred moving mean over `window` samples (odd span 2⌊w/2⌋+1, shortened
/// at the edges).
pub fn centered_mean(x: &[Complex<f64>], window: usize) -> Vec<Complex<f64>> {
    let h = window / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(Complex::new(0.0, 0.0));
    for v in x {
        let last = *prefix.last().expect("seeded");
        prefix.push(last + v);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Carrier phase from baseband pilot samples: unwrapped argument of the
/// centred windowed mean. With `noise_sigma` (per-sample standard deviation
/// of each quadrature) spans where the windowed amplitude falls below five
/// standard errors are flagged.
pub fn estimate_phase(pilot: &[Complex<f64>], window: usize, noise_sigma: Option<f64>) -> Flagged<Vec<f64>> {
    let window = window.max(1);
    let mean = centered_mean(pilot, window);
    let mut track: Vec<f64> = mean.iter().map(|m| m.arg()).collect();
    unwrap(&mut track);
    let mut warnings = Vec::new();
    if let Some(sigma) = noise_sigma {
        let bound = 5.0 * sigma / ((2 * (window / 2) + 1) as f64).sqrt();
        let mut start = None;
        for (i, m) in mean.iter().enumerate() {
            let low = m.norm() < bound;
            match (low, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    warnings.push(Warning::LowPilotConfidence { start: s, end: i });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            warnings.push(Warning::LowPilotConfidence { start: s, end: mean.len() });
        }
    }
    Flagged::with(track, warnings)
}

/// Linear interpolation of a uniformly sampled track (`track[j]` at `j/rate`).
pub fn interpolate(track: &[f64], rate: f64, t: f64) -> f64 {
    let x = t * rate;
    if x <= 0.0 {
        return track[0];
    }
    let j = x.floor() as usize;
    if j + 1 >= track.len() {
        return track[track.len() - 1];
    }
    let u = x - j as f64;
    track[j] * (1.0 - u) + track[j + 1] * u
}
