//! Scalar backends for the kernel and survival-field computations.
//!
//! Exact mode stores integer numerators over a running common denominator
//! (`D^n` after `n` steps, with `D` the pmf's common denominator). Float mode
//! stores probabilities directly with a unit scale. A field value is always
//! `numerator / scale`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Comparison slack admitted in float mode.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Cell count at or below which `Precision::Auto` selects exact arithmetic.
pub const EXACT_CELL_LIMIT: usize = 100_000;

/// Default cap on window cells for any single grid.
pub const DEFAULT_CELL_BUDGET: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Exact,
    Float,
    /// Exact when the window has at most [`EXACT_CELL_LIMIT`] cells.
    #[default]
    Auto,
}

impl Precision {
    pub fn resolve(self, cells: usize) -> Precision {
        match self {
            Precision::Auto if cells <= EXACT_CELL_LIMIT => Precision::Exact,
            Precision::Auto => Precision::Float,
            p => p,
        }
    }
}

pub trait Scalar: Clone + fmt::Debug + PartialOrd + Send + Sync + 'static {
    const EXACT: bool;

    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, rhs: &Self);
    fn sub_assign(&mut self, rhs: &Self);
    fn mul(&self, rhs: &Self) -> Self;

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let p = a.mul(b);
        self.add_assign(&p);
    }

    /// Representation of the probability `p` given the common denominator `den`.
    fn from_probability(p: &BigRational, den: &BigInt) -> Self;

    /// Scale factor contributed by one convolution step.
    fn step_scale(den: &BigInt) -> Self;

    fn from_u64(v: u64) -> Self;

    /// `num / scale` as a reported value.
    fn to_value(num: &Self, scale: &Self) -> Value;
}

impl Scalar for BigInt {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_probability(p: &BigRational, den: &BigInt) -> Self {
        let scaled = p * BigRational::from_integer(den.clone());
        debug_assert!(scaled.is_integer());
        scaled.to_integer()
    }
    fn step_scale(den: &BigInt) -> Self {
        den.clone()
    }
    fn from_u64(v: u64) -> Self {
        BigInt::from(v)
    }
    fn to_value(num: &Self, scale: &Self) -> Value {
        Value::Exact(BigRational::new(num.clone(), scale.clone()))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn from_probability(p: &BigRational, _den: &BigInt) -> Self {
        p.to_f64().unwrap_or(f64::NAN)
    }
    fn step_scale(_den: &BigInt) -> Self {
        1.0
    }
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn to_value(num: &Self, scale: &Self) -> Value {
        Value::Float(num / scale)
    }
}

/// A reported quantity: exact rational or float.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn zero(exact: bool) -> Value {
        if exact {
            Value::Exact(BigRational::zero())
        } else {
            Value::Float(0.0)
        }
    }

    pub fn one(exact: bool) -> Value {
        if exact {
            Value::Exact(BigRational::one())
        } else {
            Value::Float(1.0)
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }

    /// `self >= 0`, exactly or up to [`FLOAT_TOLERANCE`].
    pub fn is_nonnegative(&self) -> bool {
        match self {
            Value::Exact(r) => !r.is_negative(),
            Value::Float(x) => *x >= -FLOAT_TOLERANCE,
        }
    }

    /// Exactly zero, or within [`FLOAT_TOLERANCE`] of it.
    pub fn is_zero_within_tolerance(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Float(x) => x.abs() <= FLOAT_TOLERANCE,
        }
    }

    pub fn add(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => Value::Float(self.to_f64() + rhs.to_f64()),
        }
    }

    pub fn sub(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Float(self.to_f64() - rhs.to_f64()),
        }
    }

    pub fn mul(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            _ => Value::Float(self.to_f64() * rhs.to_f64()),
        }
    }

    /// Total order used for minimum tracking (exact comparison when both are exact).
    pub fn lt(&self, rhs: &Value) -> bool {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => a < b,
            _ => self.to_f64() < rhs.to_f64(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => s.serialize_str(&r.to_string()),
            Value::Float(x) => s.serialize_f64(*x),
        }
    }
}
