//! Signal types, spectral transforms, filters and resampling.

mod filter;
pub mod io;
mod resample;
mod spectrum;
mod waveform;

pub use filter::{apply_filter, gaussian_response, raised_cosine_response, FilterSpec};
pub use resample::{resample, sample_at, Resampled};
pub use spectrum::{
    apply_complex_response, apply_response, fft, frequency_axis, guard_range, ifft, next_pow2, power_spectrum,
    tone_amplitude, tone_power, welch_psd, Spectrum,
};
pub use waveform::{ComplexWaveform, DualPolFrame};
