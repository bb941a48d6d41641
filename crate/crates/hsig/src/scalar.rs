//! Scalar abstraction shared by the algebra and tree modules.
//!
//! All coefficient arithmetic is generic over [`Scalar`] so the same code
//! paths run in double precision (the default) and in exact rational
//! arithmetic (`BigRational`), which the tree evaluators need when inputs
//! are rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Coefficient type for tensors, probabilities and process values.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// True when arithmetic is exact; equality checks replace tolerances.
    const EXACT: bool;

    /// Exact embedding of a small nonnegative integer.
    fn from_count(n: u64) -> Self;

    /// Lossy view as `f64`, used for diagnostics and float conversions.
    fn to_f64_lossy(&self) -> f64;

    /// Whether the value is NaN-like (always false for exact types).
    fn is_nan(&self) -> bool {
        false
    }

    /// Zero check up to accumulated roundoff: exact types compare to zero,
    /// floats allow magnitudes up to 1e-9.
    fn is_negligible(&self) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn is_nan(&self) -> bool {
        f64::is_nan(*self)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-9
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Builds `p/q` from machine integers.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact conversion of a finite `f64` into a rational.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Rational to `f64`, saturating on overflow.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
