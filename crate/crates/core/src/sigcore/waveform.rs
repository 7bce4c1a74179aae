use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniformly sampled complex baseband trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexWaveform<S> {
    samples: Vec<Complex<S>>,
    sample_rate: f64,
}

impl<S: Scalar> ComplexWaveform<S> {
    pub fn new(samples: Vec<Complex<S>>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::Config(format!("sample rate must be positive, got {sample_rate}")));
        }
        if samples.is_empty() {
            return Err(Error::Config("waveform needs at least one sample".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![Complex::zero(); len], sample_rate)
    }

    /// Builds a waveform from `f(index, time)`.
    pub fn from_fn(len: usize, sample_rate: f64, mut f: impl FnMut(usize, f64) -> Complex<S>) -> Result<Self> {
        let samples = (0..len).map(|i| f(i, i as f64 / sample_rate)).collect();
        Self::new(samples, sample_rate)
    }

    /// Real-valued trace lifted to the complex plane.
    pub fn from_real(values: &[S], sample_rate: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, S::zero())).collect(), sample_rate)
    }

    pub fn samples(&self) -> &[Complex<S>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<S>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<S>> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate
    }

    /// Sum of |s|².
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr().wide()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        self.energy() / self.len() as f64
    }

    pub fn scale(&mut self, k: f64) {
        let k = S::of(k);
        for s in &mut self.samples {
            *s = *s * k;
        }
    }

    pub fn scaled(mut self, k: f64) -> Self {
        self.scale(k);
        self
    }

    /// Adds `other` sample-by-sample; both must share rate and length.
    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a = *a + *b;
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || self.sample_rate != other.sample_rate {
            return Err(Error::Mismatch(format!(
                "{} samples at {} Sa/s vs {} samples at {} Sa/s",
                self.len(),
                self.sample_rate,
                other.len(),
                other.sample_rate
            )));
        }
        Ok(())
    }

    pub fn real_part(&self) -> Vec<S> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn imag_part(&self) -> Vec<S> {
        self.samples.iter().map(|s| s.im).collect()
    }

    /// Converts to another scalar precision.
    pub fn cast<T: Scalar>(&self) -> ComplexWaveform<T> {
        ComplexWaveform {
            samples: self.samples.iter().map(|s| Complex::new(T::of(s.re.wide()), T::of(s.im.wide()))).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Polarization-multiplexed field: TE and TM planes on a common time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPolFrame<S> {
    pub te: ComplexWaveform<S>,
    pub tm: ComplexWaveform<S>,
    /// Quantum symbol rate; fixes the shot-noise reference bandwidth.
    pub symbol_rate: f64,
}

impl<S: Scalar> DualPolFrame<S> {
    pub fn new(te: ComplexWaveform<S>, tm: ComplexWaveform<S>, symbol_rate: f64) -> Result<Self> {
        te.check_compatible(&tm)?;
        if !(symbol_rate > 0.0 && symbol_rate <= te.sample_rate()) {
            return Err(Error::Config(format!("symbol rate {symbol_rate} Hz outside (0, fs]")));
        }
        Ok(Self { te, tm, symbol_rate })
    }

    pub fn sample_rate(&self) -> f64 {
        self.te.sample_rate()
    }

    pub fn len(&self) -> usize {
        self.te.len()
    }

    pub fn is_empty(&self) -> bool {
        self.te.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.te.energy() + self.tm.energy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rate_and_empty() {
        assert!(ComplexWaveform::<f64>::new(vec![Complex::zero()], 0.0).is_err());
        assert!(ComplexWaveform::<f64>::new(vec![], 1.0).is_err());
    }

    #[test]
    fn energy_and_scale() {
        let mut w = ComplexWaveform::<f32>::new(vec![Complex::new(1.0, 1.0); 4], 2.0).unwrap();
        assert!((w.energy() - 8.0).abs() < 1e-9);
        w.scale(0.5);
        assert!((w.mean_power() - 0.5).abs() < 1e-9);
        assert_eq!(w.duration(), 2.0);
    }
}
