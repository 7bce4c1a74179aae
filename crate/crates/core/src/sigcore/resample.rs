use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;

use super::{fft, frequency_axis, ifft, ComplexWaveform};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Resampler output plus the number of requested instants that fell outside
/// the input trace.
#[derive(Clone, Debug)]
pub struct Resampled<S> {
    pub waveform: ComplexWaveform<S>,
    pub dropped: usize,
}

/// Band-limited interpolation at instants `k / new_rate + phase_offset`.
///
/// When the output length is an integer the signal is resized exactly in the
/// frequency domain; other ratios use a windowed-sinc kernel.
pub fn resample<S: Scalar>(w: &ComplexWaveform<S>, new_rate: f64, phase_offset: f64) -> Result<Resampled<S>> {
    if !(new_rate > 0.0 && new_rate.is_finite()) {
        return Err(Error::Config(format!("new rate must be positive, got {new_rate}")));
    }
    if phase_offset.abs() >= 1.0 / new_rate {
        return Err(Error::Config(format!("phase offset {phase_offset:e} s not within one output period")));
    }
    let fs = w.sample_rate();
    let n = w.len();
    if new_rate == fs && phase_offset == 0.0 {
        return Ok(Resampled { waveform: w.clone(), dropped: 0 });
    }
    let ratio = n as f64 * new_rate / fs;
    let m_total = (ratio - 1e-9).ceil().max(1.0) as usize;

    // valid output indices: 0 <= k/new + off <= (n-1)/fs
    let t_last = (n - 1) as f64 / fs;
    let eps = 1e-9 / new_rate;
    let k_first = ((-phase_offset - eps) * new_rate).ceil().max(0.0) as usize;
    let k_end = ((((t_last - phase_offset + eps) * new_rate).floor() as i64) + 1).clamp(0, m_total as i64) as usize;
    if k_first >= k_end {
        return Err(Error::Config("no resampling instant falls inside the trace".into()));
    }
    let dropped = m_total - (k_end - k_first);

    let full = if (ratio - ratio.round()).abs() < 1e-6 {
        spectral(w, ratio.round() as usize, new_rate, phase_offset)
    } else {
        windowed_sinc(w, m_total, new_rate, phase_offset)
    };
    let waveform = ComplexWaveform::new(full[k_first..k_end].to_vec(), new_rate)?;
    Ok(Resampled { waveform, dropped })
}

fn spectral<S: Scalar>(w: &ComplexWaveform<S>, m: usize, new_rate: f64, offset: f64) -> Vec<Complex<S>> {
    let n = w.len();
    let mut x = w.samples().to_vec();
    fft(&mut x);
    let mut y = vec![Complex::<S>::zero(); m];
    let half = S::of(0.5);
    if m >= n {
        let pos = n.div_ceil(2);
        y[..pos].copy_from_slice(&x[..pos]);
        for k in pos..n {
            y[m - (n - k)] = x[k];
        }
        if n.is_multiple_of(2) && m > n {
            // split the Nyquist bin across both signs
            let v = x[n / 2] * half;
            y[n / 2] = v;
            y[m - n / 2] = v;
        }
    } else {
        let pos = m.div_ceil(2);
        y[..pos].copy_from_slice(&x[..pos]);
        for k in (m - m / 2)..m {
            y[k] = x[n - (m - k)];
        }
        if m.is_multiple_of(2) {
            y[m / 2] = x[m / 2] + x[n - m / 2];
        }
    }
    if offset != 0.0 {
        for (v, f) in y.iter_mut().zip(frequency_axis(m, new_rate)) {
            let r = Complex::from_polar(1.0, 2.0 * PI * f * offset);
            *v = *v * Complex::new(S::of(r.re), S::of(r.im));
        }
    }
    ifft(&mut y);
    let k = S::of(m as f64 / n as f64);
    for v in &mut y {
        *v = *v * k;
    }
    y
}

/// Evaluates the band-limited interpolant at `k / rate + offset` without any
/// anti-alias filtering, as a sampler at the decision instants would.
pub fn sample_at<S: Scalar>(w: &ComplexWaveform<S>, rate: f64, offset: f64) -> Result<Resampled<S>> {
    if !(rate > 0.0 && rate <= w.sample_rate()) {
        return Err(Error::Config(format!("sampling rate {rate:e} outside (0, fs]")));
    }
    if offset.abs() >= 1.0 / rate {
        return Err(Error::Config(format!("offset {offset:e} s not within one period")));
    }
    let fs = w.sample_rate();
    let n = w.len();
    let ratio = fs / rate;
    let m_total = (n as f64 / ratio - 1e-9).ceil().max(1.0) as usize;
    let t_last = (n - 1) as f64 / fs;
    let eps = 1e-9 / rate;
    let k_first = ((-offset - eps) * rate).ceil().max(0.0) as usize;
    let k_end = ((((t_last - offset + eps) * rate).floor() as i64) + 1).clamp(0, m_total as i64) as usize;
    if k_first >= k_end {
        return Err(Error::Config("no sampling instant falls inside the trace".into()));
    }
    let dropped = m_total - (k_end - k_first);
    let samples = if (ratio - ratio.round()).abs() < 1e-9 {
        let step = ratio.round() as usize;
        let shifted = if offset == 0.0 {
            w.clone()
        } else {
            super::apply_complex_response(w, |f| Complex::from_polar(1.0, 2.0 * PI * f * offset))
        };
        (k_first..k_end).map(|k| shifted.samples()[k * step]).collect()
    } else {
        let x = w.samples();
        (k_first..k_end)
            .map(|k| {
                let pos = (k as f64 / rate + offset) * fs;
                let lo = ((pos - SINC_HALF_WIDTH).ceil() as i64).max(0);
                let hi = ((pos + SINC_HALF_WIDTH).floor() as i64).min(n as i64 - 1);
                let mut acc = Complex::<f64>::zero();
                for i in lo..=hi {
                    let d = pos - i as f64;
                    let arg = PI * d;
                    let sinc = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
                    let win = 0.5 + 0.5 * (PI * d / SINC_HALF_WIDTH).cos();
                    let s = x[i as usize];
                    acc += Complex::new(s.re.wide(), s.im.wide()) * (sinc * win);
                }
                Complex::new(S::of(acc.re), S::of(acc.im))
            })
            .collect()
    };
    Ok(Resampled { waveform: ComplexWaveform::new(samples, rate)?, dropped })
}

const SINC_HALF_WIDTH: f64 = 32.0;

fn windowed_sinc<S: Scalar>(w: &ComplexWaveform<S>, m: usize, new_rate: f64, offset: f64) -> Vec<Complex<S>> {
    let fs = w.sample_rate();
    let n = w.len() as i64;
    let c = (new_rate / fs).min(1.0);
    let half = SINC_HALF_WIDTH / c;
    let x = w.samples();
    (0..m)
        .map(|k| {
            let pos = (k as f64 / new_rate + offset) * fs;
            let lo = ((pos - half).ceil() as i64).max(0);
            let hi = ((pos + half).floor() as i64).min(n - 1);
            let mut acc = Complex::<f64>::zero();
            for i in lo..=hi {
                let d = pos - i as f64;
                let arg = PI * c * d;
                let sinc = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
                let win = 0.5 + 0.5 * (PI * d / half).cos();
                let s = x[i as usize];
                acc += Complex::new(s.re.wide(), s.im.wide()) * (c * sinc * win);
            }
            Complex::new(S::of(acc.re), S::of(acc.im))
        })
        .collect()
}
