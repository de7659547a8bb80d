//! Scalar abstractions.
//!
//! [`Scalar`] is the minimal ordered-field interface needed to evolve the
//! piecewise-linear maps of the zoo; it is implemented for `f32`, `f64` and
//! the exact rationals. [`Real`] adds transcendental functions and is what
//! metrics, measures and estimators are written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Ordered field element usable as a coordinate or a time.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Largest integer not above `self`.
    fn floor_value(&self) -> Self;

    /// Reduce into the canonical circle range `[0, 1)`.
    fn wrap_unit(&self) -> Self {
        let r = self.clone() - self.floor_value();
        if r >= Self::one() {
            Self::zero()
        } else {
            r
        }
    }

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_integral(&self) -> bool {
        self.floor_value() == *self
    }

    /// Lossy conversion into a floating type.
    fn to_real<R: Real>(&self) -> R {
        R::from_f64(self.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(R::nan)
    }
}

/// Floating-point scalar: everything analytic is generic over this.
pub trait Real: Scalar + Float + FloatConst + Copy + Sum + Default {
    /// Convert an `f64` literal; panics only for types that cannot hold it.
    fn c(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("representable constant")
    }
}

macro_rules! impl_float_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn floor_value(&self) -> Self {
                Float::floor(*self)
            }

            fn wrap_unit(&self) -> Self {
                let r = *self - Float::floor(*self);
                // x - floor(x) rounds up to 1.0 for tiny negative x
                if r >= 1.0 { 0.0 } else { r }
            }
        }
        impl Real for $t {}
    )*};
}

impl_float_scalar!(f32, f64);

macro_rules! impl_ratio_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn floor_value(&self) -> Self {
                self.floor()
            }
        }
    )*};
}

impl_ratio_scalar!(Ratio<i64>, Ratio<i128>, BigRational);

/// Convenience for `BigRational` construction from small integers.
pub fn big_ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
