//! Floating-point abstraction for the pointwise kernels.
//!
//! Kinetics, layer-thickness formulas, interface jump/average operators and
//! the geometry updates of the splitting loop are written once over
//! [`Scalar`] and instantiated for `f32` and `f64`. The global assembly and
//! sparse solves work in `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// floating point: f32 or f64
pub trait Scalar: Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
