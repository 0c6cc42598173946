//! Scalar abstraction shared by the device model, networks and statistics.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the simulator is generic over (`f32` or `f64`).
pub trait Float:
    num_traits::Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    const HALF: Self;
    const TWO: Self;

    /// Converts an `f64` literal, panicking only if the target type cannot
    /// represent it at all (never the case for `f32`/`f64`).
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar literal out of range")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

macro_rules! impl_float {
    ($f:ty) => {
        impl Float for $f {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const HALF: Self = 0.5;
            const TWO: Self = 2.0;
        }
    };
}

impl_float!(f32);
impl_float!(f64);

/// Sign function with `sign(0) = 0`.
#[inline]
pub fn sign0<T: Float>(x: T) -> T {
    if x > T::ZERO {
        T::ONE
    } else if x < T::ZERO {
        -T::ONE
    } else {
        T::ZERO
    }
}
