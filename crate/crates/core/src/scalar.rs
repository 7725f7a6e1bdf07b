//! The scalar abstraction shared by float and interval sequences.

use crate::error::{Error, Result};
use crate::interval::Interval;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Float,
    Interval,
}

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Sum
    + 'static
{
    const KIND: ScalarKind;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_interval(self) -> Interval;
    /// Interval for interval scalars, midpoint for floats.
    fn from_interval(i: Interval) -> Self;
    /// Widens by `r` in interval mode; identity for floats.
    fn inflate(self, r: f64) -> Self;
    fn mid(self) -> f64;
    /// Upper bound on the absolute value.
    fn mag(self) -> f64;
    fn abs(self) -> Self;
    fn sqr(self) -> Self;
    /// Square root of the nonnegative part.
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn cos(self) -> Self;
    fn pi() -> Self;
    fn to_json(self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float;
    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn from_f64(x: f64) -> f64 {
        x
    }
    fn to_interval(self) -> Interval {
        Interval::point(self)
    }
    fn from_interval(i: Interval) -> f64 {
        i.mid()
    }
    fn inflate(self, _r: f64) -> f64 {
        self
    }
    fn mid(self) -> f64 {
        self
    }
    fn mag(self) -> f64 {
        f64::abs(self)
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn sqr(self) -> f64 {
        self * self
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self.max(0.0))
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn pi() -> f64 {
        std::f64::consts::PI
    }
    fn to_json(self) -> Value {
        Value::String(format!("{:e}", self))
    }
    fn from_json(v: &Value) -> Result<f64> {
        v.as_str()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("expected float string, got {v}")))
    }
}

impl Scalar for Interval {
    const KIND: ScalarKind = ScalarKind::Interval;
    fn zero() -> Interval {
        Interval::ZERO
    }
    fn one() -> Interval {
        Interval::ONE
    }
    fn from_f64(x: f64) -> Interval {
        Interval::point(x)
    }
    fn to_interval(self) -> Interval {
        self
    }
    fn from_interval(i: Interval) -> Interval {
        i
    }
    fn inflate(self, r: f64) -> Interval {
        Interval::inflate(self, r)
    }
    fn mid(self) -> f64 {
        Interval::mid(self)
    }
    fn mag(self) -> f64 {
        Interval::mag(self)
    }
    fn abs(self) -> Interval {
        Interval::abs(self)
    }
    fn sqr(self) -> Interval {
        Interval::sqr(self)
    }
    fn sqrt(self) -> Interval {
        self.sqrt_clamped()
    }
    fn exp(self) -> Interval {
        Interval::exp(self)
    }
    fn cos(self) -> Interval {
        Interval::cos(self)
    }
    fn pi() -> Interval {
        Interval::pi()
    }
    fn to_json(self) -> Value {
        serde_json::to_value(self).expect("interval serializes")
    }
    fn from_json(v: &Value) -> Result<Interval> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))
    }
}
