//! Exact rational scalars used by the chain machinery.
//!
//! Every finite `f64` is a dyadic rational, so iterates produced by the
//! learners convert to [`Rational`] without loss.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn from_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite float.
pub fn from_f64(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("non-finite coordinate {v}")))
}

pub fn vec_from_f64(xs: &[f64]) -> Result<Vec<Rational>> {
    xs.iter().map(|&v| from_f64(v)).collect()
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Floor as a machine integer.
pub fn floor_i64(v: &Rational) -> i64 {
    let f = v.numer().div_floor(v.denom());
    f.to_i64().expect("coordinate exceeds i64 range")
}

pub fn is_integer(v: &Rational) -> bool {
    v.denom().is_one()
}

pub fn in_unit_interval(v: &Rational) -> bool {
    !v.is_negative() && *v <= Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}
