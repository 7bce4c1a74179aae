//! Floating-point abstraction shared by every signal-processing routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Sample type of waveforms and numeric kernels: `f32` or `f64`.
///
/// Configuration values (frequencies, lengths, powers) stay in `f64`; only
/// sample data and the math applied to it follows the scalar parameter.
pub trait Scalar: Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Sum {
    /// Lossy conversion from a configuration value.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every float scalar")
    }

    /// Widening conversion for accumulations and reports.
    #[inline]
    fn wide(self) -> f64 {
        self.to_f64().expect("float scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
