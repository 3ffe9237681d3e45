use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Exact rational number used by the PDA channels and exact evaluation paths.
pub type Rational = BigRational;

/// Ordered field used throughout the core.
///
/// Comparisons are always exact; there is no epsilon anywhere in the
/// hysteresis machinery. `f64` is the general-purpose instantiation and
/// [`Rational`] the exact one.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts from `f64`. For rationals the conversion is exact.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for Rational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        <BigRational as FromPrimitive>::from_i64(v).expect("integer")
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Shorthand for the rational `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}
