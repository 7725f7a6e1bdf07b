//! Closed floating-point intervals with outward rounding.
//!
//! Every operation returns an interval containing the exact real image of its
//! operands. Rounding is realized without touching the FPU rounding mode: each
//! operation is evaluated in round-to-nearest, the sign of the rounding error
//! is recovered exactly with an error-free transform (TwoSum for addition, a
//! fused multiply-add residual for products, quotients and square roots), and
//! the endpoint is moved to the adjacent float only when the result was
//! inexact in the wrong direction. Exact operations such as `[1,1] + [2,2]`
//! therefore stay exact. Near the underflow threshold the residual is not
//! reliable, and both endpoints are nudged unconditionally.
//!
//! Elementary functions (`exp`, `ln`, `sin`, `cos`) use the platform libm and
//! widen the result by [`LIBM_ULPS`] units in the last place on each side.
//!
//! ```
//! use bridgewave::interval::Interval;
//!
//! let third = Interval::ONE / Interval::point(3.0);
//! assert!(third.lo() < third.hi());
//! assert!(third.hi() - third.lo() <= 2.0 * f64::EPSILON);
//! assert_eq!(Interval::point(1.0) + Interval::point(2.0), Interval::point(3.0));
//! ```

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Ulps of slack granted to each libm call.
pub const LIBM_ULPS: u32 = 2;

// Below this magnitude residual-based rounding detection is not trusted.
const TINY: f64 = 1e-270;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn down_by(mut x: f64, k: u32) -> f64 {
    for _ in 0..k {
        x = x.next_down();
    }
    x
}

fn up_by(mut x: f64, k: u32) -> f64 {
    for _ in 0..k {
        x = x.next_up();
    }
    x
}

fn overflow_dn(s: f64, finite_inputs: bool) -> f64 {
    if finite_inputs && s == f64::INFINITY {
        f64::MAX
    } else {
        s
    }
}

fn overflow_up(s: f64, finite_inputs: bool) -> f64 {
    if finite_inputs && s == f64::NEG_INFINITY {
        -f64::MAX
    } else {
        s
    }
}

fn add_dn(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        return f64::NEG_INFINITY;
    }
    if s.is_infinite() {
        return overflow_dn(s, a.is_finite() && b.is_finite());
    }
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    if e >= 0.0 {
        s
    } else {
        s.next_down()
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_nan() {
        return f64::INFINITY;
    }
    if s.is_infinite() {
        return overflow_up(s, a.is_finite() && b.is_finite());
    }
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    if e <= 0.0 {
        s
    } else {
        s.next_up()
    }
}

fn mul_dn(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_nan() {
        return f64::NEG_INFINITY;
    }
    if p.is_infinite() {
        return overflow_dn(p, a.is_finite() && b.is_finite());
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    let e = a.mul_add(b, -p);
    if e >= 0.0 {
        p
    } else {
        p.next_down()
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_nan() {
        return f64::INFINITY;
    }
    if p.is_infinite() {
        return overflow_up(p, a.is_finite() && b.is_finite());
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    let e = a.mul_add(b, -p);
    if e <= 0.0 {
        p
    } else {
        p.next_up()
    }
}

// Sign of (a/b - fl(a/b)), or None when it cannot be trusted.
fn div_err_sign(a: f64, b: f64, q: f64) -> Option<f64> {
    if !q.is_finite() || q.abs() < TINY || a.abs() < TINY || !b.is_finite() {
        return None;
    }
    let r = (-q).mul_add(b, a);
    Some(r * b.signum())
}

fn div_dn(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_nan() {
        return f64::NEG_INFINITY;
    }
    if q.is_infinite() {
        return overflow_dn(q, a.is_finite() && b != 0.0);
    }
    match div_err_sign(a, b, q) {
        Some(s) if s >= 0.0 => q,
        _ => q.next_down(),
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_nan() {
        return f64::INFINITY;
    }
    if q.is_infinite() {
        return overflow_up(q, a.is_finite() && b != 0.0);
    }
    match div_err_sign(a, b, q) {
        Some(s) if s <= 0.0 => q,
        _ => q.next_up(),
    }
}

fn sqrt_dn(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = x.sqrt();
    if !s.is_finite() {
        return f64::MAX;
    }
    if x < TINY {
        return s.next_down().max(0.0);
    }
    let r = (-s).mul_add(s, x);
    if r >= 0.0 {
        s
    } else {
        s.next_down()
    }
}

fn sqrt_up(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = x.sqrt();
    if !s.is_finite() {
        return s;
    }
    if x < TINY {
        return s.next_up();
    }
    let r = (-s).mul_add(s, x);
    if r <= 0.0 {
        s
    } else {
        s.next_up()
    }
}

fn exp_dn(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let v = x.exp();
    if v == f64::INFINITY {
        return if x.is_finite() { f64::MAX } else { v };
    }
    down_by(v, LIBM_ULPS).max(0.0)
}

fn exp_up(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let v = x.exp();
    if v == f64::INFINITY {
        return v;
    }
    up_by(v, LIBM_ULPS)
}

fn pow_dn(x: f64, k: u32) -> f64 {
    // x >= 0
    let (mut base, mut e, mut acc) = (x, k, 1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_dn(acc, base);
        }
        e >>= 1;
        if e > 0 {
            base = mul_dn(base, base);
        }
    }
    acc
}

fn pow_up(x: f64, k: u32) -> f64 {
    let (mut base, mut e, mut acc) = (x, k, 1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_up(acc, base);
        }
        e >>= 1;
        if e > 0 {
            base = mul_up(base, base);
        }
    }
    acc
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Builds `[lo, hi]`; fails on NaN endpoints or `lo > hi`.
    pub fn new(lo: f64, hi: f64) -> Result<Interval> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval {
            lo: if lo == 0.0 { 0.0 } else { lo },
            hi: if hi == 0.0 { 0.0 } else { hi },
        })
    }

    /// Degenerate interval `[x, x]`. Panics on NaN.
    pub fn point(x: f64) -> Interval {
        assert!(!x.is_nan(), "NaN is not an interval endpoint");
        let x = if x == 0.0 { 0.0 } else { x };
        Interval { lo: x, hi: x }
    }

    /// Smallest interval containing both endpoints, in either order.
    pub fn spanning(a: f64, b: f64) -> Interval {
        Interval::new(a.min(b), a.max(b)).expect("NaN endpoint")
    }

    /// `[mid - rad, mid + rad]` rounded outward.
    pub fn mid_rad(mid: f64, rad: f64) -> Interval {
        let rad = rad.abs();
        Interval::new(add_dn(mid, -rad), add_up(mid, rad)).expect("NaN endpoint")
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Interval {
        let r = r.abs();
        Interval { lo: -r, hi: r }
    }

    /// Enclosure of π.
    pub fn pi() -> Interval {
        Interval {
            lo: std::f64::consts::PI,
            hi: std::f64::consts::PI.next_up(),
        }
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    /// Midpoint, rounded to nearest.
    pub fn mid(self) -> f64 {
        if self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY {
            return 0.0;
        }
        if self.lo == f64::NEG_INFINITY {
            return -f64::MAX;
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on the distance from `mid()` to either endpoint.
    pub fn rad(self) -> f64 {
        let m = self.mid();
        add_up(self.hi, -m).max(add_up(m, -self.lo))
    }

    /// Upper bound on `hi - lo`.
    pub fn width(self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    /// Largest absolute value of the members.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value of the members.
    pub fn mig(self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    /// True when `self ⊆ other`.
    pub fn subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(self, other: Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_positive(self) -> bool {
        self.lo > 0.0
    }

    pub fn is_negative(self) -> bool {
        self.hi < 0.0
    }

    /// True when every member of `self` is below every member of `other`.
    pub fn certainly_lt(self, other: Interval) -> bool {
        self.hi < other.lo
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Widens by `r >= 0` on both sides.
    pub fn inflate(self, r: f64) -> Interval {
        let r = r.abs();
        Interval {
            lo: add_dn(self.lo, -r),
            hi: add_up(self.hi, r),
        }
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval {
                lo: 0.0,
                hi: self.mag(),
            }
        }
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Clips the lower endpoint at zero, for quantities known to be
    /// nonnegative.
    pub fn clamp_nonneg(self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    pub fn sqr(self) -> Interval {
        let a = self.abs();
        Interval {
            lo: mul_dn(a.lo, a.lo),
            hi: mul_up(a.hi, a.hi),
        }
    }

    pub fn recip(self) -> Interval {
        Interval::ONE / self
    }

    /// Division that rejects divisors containing zero.
    pub fn try_div(self, rhs: Interval) -> Result<Interval> {
        if rhs.contains_zero() {
            Err(Error::DivisionByZeroInterval)
        } else {
            Ok(self / rhs)
        }
    }

    pub fn sqrt(self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(Error::DomainError(format!("sqrt of {self}")));
        }
        Ok(Interval {
            lo: sqrt_dn(self.lo),
            hi: sqrt_up(self.hi),
        })
    }

    /// Square root of the nonnegative part.
    pub fn sqrt_clamped(self) -> Interval {
        Interval {
            lo: sqrt_dn(self.lo.max(0.0)),
            hi: sqrt_up(self.hi.max(0.0)),
        }
    }

    pub fn exp(self) -> Interval {
        Interval {
            lo: exp_dn(self.lo),
            hi: exp_up(self.hi),
        }
    }

    /// `exp(self) - 1`, tight near zero.
    pub fn exp_m1(self) -> Interval {
        let f = |x: f64, up: bool| {
            if x == 0.0 {
                return 0.0;
            }
            let v = x.exp_m1();
            if up {
                if v.is_infinite() {
                    v
                } else {
                    up_by(v, LIBM_ULPS)
                }
            } else if v.is_infinite() {
                f64::MAX
            } else {
                down_by(v, LIBM_ULPS).max(-1.0)
            }
        };
        Interval {
            lo: f(self.lo, false),
            hi: f(self.hi, true),
        }
    }

    pub fn ln(self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::DomainError(format!("ln of {self}")));
        }
        let f = |x: f64, up: bool| {
            if x == 1.0 {
                return 0.0;
            }
            let v = x.ln();
            if !v.is_finite() {
                return v;
            }
            if up {
                up_by(v, LIBM_ULPS)
            } else {
                down_by(v, LIBM_ULPS)
            }
        };
        Ok(Interval {
            lo: f(self.lo, false),
            hi: f(self.hi, true),
        })
    }

    pub fn cos(self) -> Interval {
        self.trig(false)
    }

    pub fn sin(self) -> Interval {
        self.trig(true)
    }

    // Extrema of cos sit at kπ, those of sin at (k+1/2)π. Each candidate is
    // enclosed rigorously and included whenever it may lie in `self`.
    fn trig(self, sine: bool) -> Interval {
        const FULL: Interval = Interval { lo: -1.0, hi: 1.0 };
        if !self.is_finite() || self.hi - self.lo >= 7.0 {
            return FULL;
        }
        let f = |x: f64| if sine { x.sin() } else { x.cos() };
        let (a, b) = (f(self.lo), f(self.hi));
        let mut lo = down_by(a.min(b), LIBM_ULPS);
        let mut hi = up_by(a.max(b), LIBM_ULPS);
        // candidate m: extremum at m·π/2 with m even (cos) or odd (sin)
        let half_pi = Interval::pi() * 0.5;
        let m0 = (self.lo / std::f64::consts::FRAC_PI_2).floor() as i64 - 2;
        let m1 = (self.hi / std::f64::consts::FRAC_PI_2).ceil() as i64 + 2;
        for m in m0..=m1 {
            if (m.rem_euclid(2) == 1) != sine {
                continue;
            }
            let at = Interval::point(m as f64) * half_pi;
            if at.overlaps(self) {
                // value at m·π/2: cos(kπ) = (-1)^k, sin((2k+1)π/2) = (-1)^k
                let k = if sine {
                    (m - 1).div_euclid(2)
                } else {
                    m.div_euclid(2)
                };
                if k.rem_euclid(2) == 0 {
                    hi = 1.0;
                } else {
                    lo = -1.0;
                }
            }
        }
        Interval {
            lo: lo.max(-1.0),
            hi: hi.min(1.0),
        }
    }

    pub fn cosh(self) -> Interval {
        let a = self.abs();
        let c = |x: f64| {
            let e = Interval::point(x).exp();
            (e + e.recip()) * 0.5
        };
        Interval {
            lo: c(a.lo).lo.max(1.0),
            hi: c(a.hi).hi,
        }
    }

    /// Integer power with exact sign handling.
    pub fn powi(self, k: i32) -> Interval {
        if k == 0 {
            return Interval::ONE;
        }
        if k < 0 {
            return self.powi(-k).recip();
        }
        let k = k as u32;
        if k % 2 == 0 {
            let a = self.abs();
            Interval {
                lo: pow_dn(a.lo, k),
                hi: pow_up(a.hi, k),
            }
        } else {
            let dn = |x: f64| {
                if x >= 0.0 {
                    pow_dn(x, k)
                } else {
                    -pow_up(-x, k)
                }
            };
            let up = |x: f64| {
                if x >= 0.0 {
                    pow_up(x, k)
                } else {
                    -pow_dn(-x, k)
                }
            };
            Interval {
                lo: dn(self.lo),
                hi: up(self.hi),
            }
        }
    }

    /// Parses a decimal literal into the tightest enclosing interval: a point
    /// when the literal is a binary float, otherwise one ulp wide.
    pub fn parse_decimal(s: &str) -> Result<Interval> {
        let bad = || Error::Parse(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let exact = Decimal::parse(body).ok_or_else(bad)?;
        let v: f64 = t.parse().map_err(|_| bad())?;
        if exact.digits.is_empty() {
            return Ok(Interval::ZERO);
        }
        if v.is_infinite() {
            return Ok(if neg {
                Interval {
                    lo: v,
                    hi: -f64::MAX,
                }
            } else {
                Interval {
                    lo: f64::MAX,
                    hi: v,
                }
            });
        }
        let repr = Decimal::parse(&format!("{:.800e}", v.abs())).ok_or_else(bad)?;
        // ordering of |v| relative to the literal's magnitude
        let v_vs_x = repr.cmp_magnitude(&exact);
        let below = match (v_vs_x, neg) {
            (Ordering::Equal, _) => return Ok(Interval::point(v)),
            (Ordering::Less, false) | (Ordering::Greater, true) => true,
            _ => false,
        };
        Ok(if below {
            Interval {
                lo: v,
                hi: v.next_up(),
            }
        } else {
            Interval {
                lo: v.next_down(),
                hi: v,
            }
        })
    }

    /// Shortest round-trip decimal strings of both endpoints.
    pub fn endpoint_strings(self) -> [String; 2] {
        [format!("{:e}", self.lo), format!("{:e}", self.hi)]
    }
}

// Unsigned decimal 0.d1d2d3… × 10^exp with no leading or trailing zeros.
struct Decimal {
    digits: Vec<u8>,
    exp: i64,
}

impl Decimal {
    fn parse(s: &str) -> Option<Decimal> {
        let (mant, e) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
            None => (s, 0),
        };
        let (int, frac) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut exp = int.len() as i64 + e;
        let mut digits: Vec<u8> = int.bytes().chain(frac.bytes()).map(|b| b - b'0').collect();
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        digits.drain(..lead);
        exp -= lead as i64;
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Some(Decimal { digits, exp })
    }

    fn cmp_magnitude(&self, other: &Decimal) -> Ordering {
        match (self.digits.is_empty(), other.digits.is_empty()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.exp.cmp(&other.exp).then_with(|| {
            let n = self.digits.len().max(other.digits.len());
            (0..n)
                .map(|i| {
                    let a = self.digits.get(i).copied().unwrap_or(0);
                    let b = other.digits.get(i).copied().unwrap_or(0);
                    a.cmp(&b)
                })
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl FromStr for Interval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Interval> {
        Interval::parse_decimal(s)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Interval {
        Interval::point(x)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "[{:.*e}, {:.*e}]", p, self.lo, p, self.hi),
            None => write!(f, "[{:e}, {:e}]", self.lo, self.hi),
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.endpoint_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Interval, D::Error> {
        use serde::de::Error as _;
        let [lo, hi] = <[String; 2]>::deserialize(d)?;
        let lo: f64 = lo.parse().map_err(D::Error::custom)?;
        let hi: f64 = hi.parse().map_err(D::Error::custom)?;
        Interval::new(lo, hi).map_err(D::Error::custom)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_dn(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_dn(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        if a >= 0.0 && c >= 0.0 {
            return Interval {
                lo: mul_dn(a, c),
                hi: mul_up(b, d),
            };
        }
        let lo = mul_dn(a, c)
            .min(mul_dn(a, d))
            .min(mul_dn(b, c))
            .min(mul_dn(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Returns the entire line when the divisor contains zero; see
    /// [`Interval::try_div`] for the checked variant.
    fn div(self, rhs: Interval) -> Interval {
        if rhs.contains_zero() {
            return Interval::ENTIRE;
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_dn(a, c)
            .min(div_dn(a, d))
            .min(div_dn(b, c))
            .min(div_dn(b, d));
        let hi = div_up(a, c)
            .max(div_up(a, d))
            .max(div_up(b, c))
            .max(div_up(b, d));
        Interval { lo, hi }
    }
}

macro_rules! scalar_rhs {
    ($tr:ident, $f:ident) => {
        impl $tr<f64> for Interval {
            type Output = Interval;
            fn $f(self, rhs: f64) -> Interval {
                $tr::$f(self, Interval::point(rhs))
            }
        }
        impl $tr<Interval> for f64 {
            type Output = Interval;
            fn $f(self, rhs: Interval) -> Interval {
                $tr::$f(Interval::point(self), rhs)
            }
        }
    };
}

scalar_rhs!(Add, add);
scalar_rhs!(Sub, sub);
scalar_rhs!(Mul, mul);
scalar_rhs!(Div, div);

impl AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Interval> for Interval {
    fn sum<I: Iterator<Item = &'a Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + *b)
    }
}

/// Rounded-up sum of nonnegative floats.
pub fn sum_up(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, add_up)
}

/// Rounded-up product.
pub fn mul_round_up(a: f64, b: f64) -> f64 {
    mul_up(a, b)
}

/// Rounded-up sum.
pub fn add_round_up(a: f64, b: f64) -> f64 {
    add_up(a, b)
}

/// Rounded-up square root.
pub fn sqrt_round_up(x: f64) -> f64 {
    sqrt_up(x)
}

/// Rounded-up quotient.
pub fn div_round_up(a: f64, b: f64) -> f64 {
    div_up(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn exact_integer_sums_stay_points() {
        assert_eq!(iv(1.0, 1.0) + iv(2.0, 2.0), iv(3.0, 3.0));
        assert_eq!(iv(-1.0, 2.0) * iv(3.0, 3.0), iv(-3.0, 6.0));
    }

    #[test]
    fn inexact_sum_is_one_ulp_wide() {
        let s = Interval::point(0.1) + Interval::point(0.2);
        assert_eq!(s.hi(), s.lo().next_up());
    }

    #[test]
    fn rejects_reversed_and_nan() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn division_by_zero_interval() {
        assert_eq!(
            Interval::ONE.try_div(iv(-1.0, 1.0)),
            Err(Error::DivisionByZeroInterval)
        );
        assert_eq!(Interval::ONE / iv(0.0, 1.0), Interval::ENTIRE);
    }

    #[test]
    fn sqrt_cases() {
        assert_eq!(iv(4.0, 4.0).sqrt().unwrap(), iv(2.0, 2.0));
        assert!(iv(-1e-300, 4.0).sqrt().is_err());
        let r2 = iv(2.0, 2.0).sqrt().unwrap();
        assert!(r2.lo() < r2.hi() && r2.hi() == r2.lo().next_up());
    }

    #[test]
    fn exp_of_zero_is_one() {
        assert_eq!(Interval::ZERO.exp(), Interval::ONE);
        assert!(iv(1.0, 1.0).exp().contains(std::f64::consts::E));
    }

    #[test]
    fn trig_extrema() {
        let c = iv(-0.5, 0.5).cos();
        assert_eq!(c.hi(), 1.0);
        let s = iv(1.0, 2.0).sin();
        assert_eq!(s.hi(), 1.0);
        let s = iv(4.0, 5.0).sin();
        assert_eq!(s.lo(), -1.0);
        let c = Interval::pi().cos();
        assert!(c.contains(-1.0));
    }

    #[test]
    fn powers_handle_signs() {
        assert_eq!(iv(-1.0, 2.0).powi(2), iv(0.0, 4.0));
        assert_eq!(iv(-2.0, 1.0).powi(3), iv(-8.0, 1.0));
        assert_eq!(iv(2.0, 2.0).powi(-2), iv(0.25, 0.25));
    }

    #[test]
    fn pi_is_tight() {
        let p = Interval::pi();
        assert_eq!(p.hi(), p.lo().next_up());
    }

    #[test]
    fn decimal_parse_is_outward() {
        let a = Interval::parse_decimal("0.1").unwrap();
        assert_eq!(a.hi(), a.lo().next_up());
        assert!(a.lo() < 0.1 || a.hi() > 0.1);
        assert_eq!(Interval::parse_decimal("0.5").unwrap(), iv(0.5, 0.5));
        assert_eq!(Interval::parse_decimal("1.2e1").unwrap(), iv(12.0, 12.0));
        let n = Interval::parse_decimal("-1.2").unwrap();
        assert!(n.hi() == n.lo().next_up());
        assert!(Interval::parse_decimal("1.2.3").is_err());
        assert!(Interval::parse_decimal("").is_err());
    }

    #[test]
    fn one_point_two_enclosure_direction() {
        // 1.2 is stored as 1.1999999999999999555910790149937...
        let a = Interval::parse_decimal("1.2").unwrap();
        assert_eq!(a.lo(), 1.2);
        assert_eq!(a.hi(), 1.2f64.next_up());
    }

    #[test]
    fn serde_round_trip() {
        let a = Interval::parse_decimal("0.3").unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: Interval = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&Interval::point(0.5)).unwrap(),
            "[\"5e-1\",\"5e-1\"]"
        );
    }

    #[test]
    fn cosh_is_even_and_at_least_one() {
        assert_eq!(Interval::ZERO.cosh(), Interval::ONE);
        let c = iv(-1.0, 0.5).cosh();
        assert_eq!(c.lo(), 1.0);
        assert!(c.contains(1.0f64.cosh()));
    }

    #[test]
    fn tiny_products_are_enclosed() {
        let t = Interval::point(1e-200) * Interval::point(1e-200);
        assert!(t.lo() <= 0.0 && t.hi() > 0.0);
    }
}
