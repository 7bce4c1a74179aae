//! Simulation and analysis toolkit for a pilot-disciplined continuous-variable
//! QKD link: transmitter synthesis, fiber channel, intradyne receiver, offline
//! DSP, excess-noise estimation, secure-key rates and fronthaul key planning.

// `!(x > 0.0)` is how validation rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dsp;
pub mod error;
pub mod estimator;
pub mod keyrate;
pub mod planner;
pub mod rxchain;
pub mod scalar;
pub mod sigcore;
pub mod txchain;

pub use error::{BudgetViolation, Error, Flagged, Result, Warning};
pub use num_complex::Complex;
pub use scalar::Scalar;
pub use sigcore::{ComplexWaveform, DualPolFrame, FilterSpec};

/// Double-precision waveform, the default signal type.
pub type Waveform = ComplexWaveform<f64>;
/// Single-precision waveform for memory-bound runs.
pub type Waveform32 = ComplexWaveform<f32>;
/// Double-precision dual-polarization frame.
pub type Frame = DualPolFrame<f64>;
/// Single-precision dual-polarization frame.
pub type Frame32 = DualPolFrame<f32>;
/// Double-precision receiver capture.
pub type Capture = rxchain::Capture<f64>;
