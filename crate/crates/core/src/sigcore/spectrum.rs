use std::ops::Range;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::FftPlanner;

use super::ComplexWaveform;
use crate::scalar::Scalar;

/// Smallest power of two not below `n`.
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// In-place forward DFT, unnormalized.
pub fn fft<S: Scalar>(buf: &mut [Complex<S>]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// In-place inverse DFT including the 1/n factor.
pub fn ifft<S: Scalar>(buf: &mut [Complex<S>]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    let k = S::of(1.0 / buf.len() as f64);
    for x in buf.iter_mut() {
        *x = *x * k;
    }
}

/// DFT bin frequencies in natural FFT order (0, positive, then negative).
pub fn frequency_axis(n: usize, sample_rate: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            k * sample_rate / n as f64
        })
        .collect()
}

/// Index range left after discarding `fraction` of the samples at each end.
pub fn guard_range(len: usize, fraction: f64) -> Range<usize> {
    let g = ((len as f64 * fraction).ceil() as usize).min(len / 2);
    g..len - g
}

/// Zero-phase filtering by a real gain response; zero-pads to a power of two.
pub fn apply_response<S: Scalar>(w: &ComplexWaveform<S>, response: impl Fn(f64) -> f64) -> ComplexWaveform<S> {
    apply_complex_response(w, |f| Complex::new(response(f), 0.0))
}

/// Frequency-domain multiplication by an arbitrary complex response.
pub fn apply_complex_response<S: Scalar>(
    w: &ComplexWaveform<S>,
    response: impl Fn(f64) -> Complex<f64>,
) -> ComplexWaveform<S> {
    let n = w.len();
    let m = next_pow2(n);
    let mut buf = Vec::with_capacity(m);
    buf.extend_from_slice(w.samples());
    buf.resize(m, Complex::zero());
    fft(&mut buf);
    for (x, f) in buf.iter_mut().zip(frequency_axis(m, w.sample_rate())) {
        let h = response(f);
        *x = *x * Complex::new(S::of(h.re), S::of(h.im));
    }
    ifft(&mut buf);
    buf.truncate(n);
    ComplexWaveform::new(buf, w.sample_rate()).expect("length and rate preserved")
}

/// Complex amplitude of a tone at `freq`: (1/n) Σ s_k e^{-j2πf t_k}.
pub fn tone_amplitude<S: Scalar>(w: &ComplexWaveform<S>, freq: f64) -> Complex<f64> {
    let step = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * freq / w.sample_rate());
    let mut rot = Complex::new(1.0, 0.0);
    let mut acc = Complex::<f64>::zero();
    for (k, s) in w.samples().iter().enumerate() {
        if k % 1024 == 0 {
            // re-anchor the recursive rotation to keep phase error bounded
            rot = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * freq * w.time(k));
        }
        acc += Complex::new(s.re.wide(), s.im.wide()) * rot;
        rot *= step;
    }
    acc / w.len() as f64
}

/// Power of the tone at `freq` in units of |amplitude|².
pub fn tone_power<S: Scalar>(w: &ComplexWaveform<S>, freq: f64) -> f64 {
    tone_amplitude(w, freq).norm_sqr()
}

/// Two-sided spectrum with ascending frequency axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

impl Spectrum {
    fn from_fft_order(freqs: Vec<f64>, values: Vec<f64>) -> Self {
        let mut pairs: Vec<(f64, f64)> = freqs.into_iter().zip(values).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (freqs, values) = pairs.into_iter().unzip();
        Self { freqs, values }
    }

    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() < 2 {
            0.0
        } else {
            self.freqs[1] - self.freqs[0]
        }
    }

    /// Index of the bin closest to `freq`.
    pub fn nearest(&self, freq: f64) -> usize {
        let i = self.freqs.partition_point(|&f| f < freq);
        if i == 0 {
            0
        } else if i >= self.freqs.len() {
            self.freqs.len() - 1
        } else if (self.freqs[i] - freq).abs() < (freq - self.freqs[i - 1]).abs() {
            i
        } else {
            i - 1
        }
    }

    pub fn value_at(&self, freq: f64) -> f64 {
        self.values[self.nearest(freq)]
    }

    /// Sum of values over bins with `lo <= f < hi`.
    pub fn band_sum(&self, lo: f64, hi: f64) -> f64 {
        self.freqs.iter().zip(&self.values).filter(|(f, _)| **f >= lo && **f < hi).map(|(_, v)| v).sum()
    }

    /// Median of all values, used as a noise-floor reference.
    pub fn median(&self) -> f64 {
        let mut v = self.values.clone();
        let mid = v.len() / 2;
        *v.select_nth_unstable_by(mid, f64::total_cmp).1
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).collect()
}

/// Hann-windowed periodogram, zero-padded by `pad` (rounded to a power of
/// two). Scaled so a tone of amplitude a peaks at about |a|².
pub fn power_spectrum<S: Scalar>(w: &ComplexWaveform<S>, pad: usize) -> Spectrum {
    let n = w.len();
    let m = next_pow2(n * pad.max(1));
    let win = hann(n);
    let gain: f64 = win.iter().sum();
    let mut buf: Vec<Complex<f64>> =
        w.samples().iter().zip(&win).map(|(s, h)| Complex::new(s.re.wide(), s.im.wide()) * *h).collect();
    buf.resize(m, Complex::zero());
    fft(&mut buf);
    let values = buf.iter().map(|x| x.norm_sqr() / (gain * gain)).collect();
    Spectrum::from_fft_order(frequency_axis(m, w.sample_rate()), values)
}

/// Welch power spectral density (per Hz, two-sided) with Hann segments of
/// `segment` samples and 50% overlap.
pub fn welch_psd<S: Scalar>(w: &ComplexWaveform<S>, segment: usize) -> Spectrum {
    let seg = segment.clamp(1, w.len());
    let win = hann(seg);
    let norm: f64 = win.iter().map(|h| h * h).sum::<f64>() * w.sample_rate();
    let hop = (seg / 2).max(1);
    let mut acc = vec![0.0; seg];
    let mut count = 0usize;
    let mut buf = vec![Complex::<f64>::zero(); seg];
    let mut start = 0;
    while start + seg <= w.len() {
        for (b, (s, h)) in buf.iter_mut().zip(w.samples()[start..start + seg].iter().zip(&win)) {
            *b = Complex::new(s.re.wide(), s.im.wide()) * *h;
        }
        fft(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    let values = acc.into_iter().map(|a| a / (norm * count as f64)).collect();
    Spectrum::from_fft_order(frequency_axis(seg, w.sample_rate()), values)
}
