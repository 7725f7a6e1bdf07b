//! Cosine-cosine coefficient sequences on ℕ₀².
//!
//! A [`CoeffSeq`] with entries `U[n]` on the box `0 ≤ n ≤ N` represents
//!
//! ```text
//! u(x) = Σ α(n) U[n] cos(π n₁ x₁ / d₁) cos(π n₂ x₂ / d₂)
//! ```
//!
//! on `[-d₁, d₁] × [-d₂, d₂]`, with weights `α(n) ∈ {1, 2, 4}` counting the
//! sign reflections of `n`. Equivalently `U` is the restriction to ℕ₀² of an
//! even sequence on ℤ², which is the view used by the convolution.

use crate::error::{Error, Result};
use crate::fft;
use crate::interval::Interval;
use crate::scalar::{Scalar, ScalarKind};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;

/// Number of sign reflections of `n` in ℤ².
pub fn alpha(n1: usize, n2: usize) -> u32 {
    match (n1 == 0, n2 == 0) {
        (true, true) => 1,
        (true, false) | (false, true) => 2,
        (false, false) => 4,
    }
}

/// The index set `{0..=n1} × {0..=n2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexBox {
    pub n1: usize,
    pub n2: usize,
}

impl IndexBox {
    pub const fn new(n1: usize, n2: usize) -> IndexBox {
        IndexBox { n1, n2 }
    }

    pub fn len(&self) -> usize {
        (self.n1 + 1) * (self.n2 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major flat index.
    pub fn idx(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.n2 + 1) + n2
    }

    pub fn unflat(&self, k: usize) -> (usize, usize) {
        (k / (self.n2 + 1), k % (self.n2 + 1))
    }

    pub fn contains(&self, n1: usize, n2: usize) -> bool {
        n1 <= self.n1 && n2 <= self.n2
    }

    pub fn contains_box(&self, other: &IndexBox) -> bool {
        other.n1 <= self.n1 && other.n2 <= self.n2
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n2 = self.n2;
        (0..=self.n1).flat_map(move |a| (0..=n2).map(move |b| (a, b)))
    }

    /// Box of the convolution of sequences on `self` and `other`.
    pub fn minkowski(&self, other: &IndexBox) -> IndexBox {
        IndexBox::new(self.n1 + other.n1, self.n2 + other.n2)
    }

    pub fn scaled(&self, k: usize) -> IndexBox {
        IndexBox::new(self.n1 * k, self.n2 * k)
    }

    pub fn union(&self, other: &IndexBox) -> IndexBox {
        IndexBox::new(self.n1.max(other.n1), self.n2.max(other.n2))
    }

    pub fn intersection(&self, other: &IndexBox) -> IndexBox {
        IndexBox::new(self.n1.min(other.n1), self.n2.min(other.n2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSeq<T> {
    bx: IndexBox,
    data: Vec<T>,
    d1: f64,
    d2: f64,
}

impl<T: Scalar> CoeffSeq<T> {
    pub fn zeros(bx: IndexBox, d1: f64, d2: f64) -> CoeffSeq<T> {
        assert!(d1 > 0.0 && d2 > 0.0, "half-periods must be positive");
        CoeffSeq {
            bx,
            data: vec![T::zero(); bx.len()],
            d1,
            d2,
        }
    }

    /// Unit sequence e₀, the constant function 1.
    pub fn unit(bx: IndexBox, d1: f64, d2: f64) -> CoeffSeq<T> {
        let mut s = CoeffSeq::zeros(bx, d1, d2);
        s.data[0] = T::one();
        s
    }

    pub fn from_fn(bx: IndexBox, d1: f64, d2: f64, f: impl Fn(usize, usize) -> T) -> CoeffSeq<T> {
        let mut s = CoeffSeq::zeros(bx, d1, d2);
        for (a, b) in bx.iter() {
            s.data[bx.idx(a, b)] = f(a, b);
        }
        s
    }

    pub fn from_vec(bx: IndexBox, d1: f64, d2: f64, data: Vec<T>) -> Result<CoeffSeq<T>> {
        if data.len() != bx.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a box of {}",
                data.len(),
                bx.len()
            )));
        }
        Ok(CoeffSeq { bx, data, d1, d2 })
    }

    pub fn index_box(&self) -> IndexBox {
        self.bx
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Entry at `n`, zero outside the box.
    pub fn get(&self, n1: usize, n2: usize) -> T {
        if self.bx.contains(n1, n2) {
            self.data[self.bx.idx(n1, n2)]
        } else {
            T::zero()
        }
    }

    /// Entry at a signed index, using evenness.
    pub fn get_signed(&self, m1: i64, m2: i64) -> T {
        self.get(m1.unsigned_abs() as usize, m2.unsigned_abs() as usize)
    }

    pub fn set(&mut self, n1: usize, n2: usize, v: T) {
        let k = self.bx.idx(n1, n2);
        self.data[k] = v;
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(T) -> S) -> CoeffSeq<S> {
        CoeffSeq {
            bx: self.bx,
            data: self.data.iter().map(|&x| f(x)).collect(),
            d1: self.d1,
            d2: self.d2,
        }
    }

    pub fn map_indexed(&self, f: impl Fn(usize, usize, T) -> T) -> CoeffSeq<T> {
        let mut out = self.clone();
        for (a, b) in self.bx.iter() {
            let k = self.bx.idx(a, b);
            out.data[k] = f(a, b, self.data[k]);
        }
        out
    }

    pub fn to_interval(&self) -> CoeffSeq<Interval> {
        self.map(|x| x.to_interval())
    }

    pub fn mid(&self) -> CoeffSeq<f64> {
        self.map(|x| x.mid())
    }

    /// Copy on another box, truncating or zero-padding.
    pub fn resized(&self, bx: IndexBox) -> CoeffSeq<T> {
        CoeffSeq::from_fn(bx, self.d1, self.d2, |a, b| self.get(a, b))
    }

    fn check_domain(&self, other: &CoeffSeq<T>) {
        assert!(
            self.d1 == other.d1 && self.d2 == other.d2,
            "sequences live on different domains"
        );
    }

    pub fn add(&self, other: &CoeffSeq<T>) -> CoeffSeq<T> {
        self.check_domain(other);
        let bx = self.bx.union(&other.bx);
        CoeffSeq::from_fn(bx, self.d1, self.d2, |a, b| {
            self.get(a, b) + other.get(a, b)
        })
    }

    pub fn sub(&self, other: &CoeffSeq<T>) -> CoeffSeq<T> {
        self.check_domain(other);
        let bx = self.bx.union(&other.bx);
        CoeffSeq::from_fn(bx, self.d1, self.d2, |a, b| {
            self.get(a, b) - other.get(a, b)
        })
    }

    pub fn scale(&self, s: T) -> CoeffSeq<T> {
        self.map(|x| x * s)
    }

    /// α-weighted ℓ¹ norm.
    pub fn norm1(&self) -> T {
        self.bx
            .iter()
            .map(|(a, b)| T::from_f64(alpha(a, b) as f64) * self.get(a, b).abs())
            .sum()
    }

    /// α-weighted ℓ² norm.
    pub fn norm2(&self) -> T {
        self.norm2_sq().sqrt()
    }

    pub fn norm2_sq(&self) -> T {
        self.bx
            .iter()
            .map(|(a, b)| T::from_f64(alpha(a, b) as f64) * self.get(a, b).sqr())
            .sum()
    }

    /// `lp_norm(p)` for `p ∈ {1, 2}`.
    pub fn lp_norm(&self, p: u32) -> T {
        match p {
            1 => self.norm1(),
            2 => self.norm2(),
            _ => panic!("only p = 1 and p = 2 are supported"),
        }
    }

    /// Largest absolute entry (upper bound).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.mag()).fold(0.0, f64::max)
    }

    /// α-weighted inner product `Σ α(n) U[n] V[n]`.
    pub fn inner(&self, other: &CoeffSeq<T>) -> T {
        self.check_domain(other);
        let bx = self.bx.intersection(&other.bx);
        bx.iter()
            .map(|(a, b)| T::from_f64(alpha(a, b) as f64) * self.get(a, b) * other.get(a, b))
            .sum()
    }

    /// Reflected convolution `(U∗V)[n] = Σ_{m∈ℤ²} U[|m|] V[|n−m|]`, summed
    /// directly in a fixed order.
    pub fn convolve(&self, other: &CoeffSeq<T>) -> CoeffSeq<T> {
        let bx = self.bx.minkowski(&other.bx);
        self.convolve_into(other, bx)
    }

    /// Convolution restricted to the output box `out`.
    pub fn convolve_into(&self, other: &CoeffSeq<T>, out: IndexBox) -> CoeffSeq<T> {
        self.check_domain(other);
        let (p1, p2) = (self.bx.n1 as i64, self.bx.n2 as i64);
        let (q1, q2) = (other.bx.n1 as i64, other.bx.n2 as i64);
        CoeffSeq::from_fn(out, self.d1, self.d2, |n1, n2| {
            let (n1, n2) = (n1 as i64, n2 as i64);
            let mut acc = T::zero();
            for m1 in (-p1).max(n1 - q1)..=p1.min(n1 + q1) {
                for m2 in (-p2).max(n2 - q2)..=p2.min(n2 + q2) {
                    acc += self.get_signed(m1, m2) * other.get_signed(n1 - m1, n2 - m2);
                }
            }
            acc
        })
    }

    /// π^N (`Inside`, result on `bx`) or π_N (`Outside`, result on the
    /// original box with the entries of `bx` zeroed).
    pub fn project(&self, bx: IndexBox, side: Side) -> CoeffSeq<T> {
        match side {
            Side::Inside => self.resized(bx),
            Side::Outside => {
                self.map_indexed(|a, b, x| if bx.contains(a, b) { T::zero() } else { x })
            }
        }
    }

    /// Value of the represented function at `(x1, x2)`.
    pub fn eval(&self, x1: T, x2: T) -> T {
        let pi = T::pi();
        let w1 = pi * x1 / T::from_f64(self.d1);
        let w2 = pi * x2 / T::from_f64(self.d2);
        let c1: Vec<T> = (0..=self.bx.n1)
            .map(|k| (T::from_f64(k as f64) * w1).cos())
            .collect();
        let c2: Vec<T> = (0..=self.bx.n2)
            .map(|k| (T::from_f64(k as f64) * w2).cos())
            .collect();
        self.bx
            .iter()
            .map(|(a, b)| T::from_f64(alpha(a, b) as f64) * self.get(a, b) * c1[a] * c2[b])
            .sum()
    }

    /// Values at a list of points of `[-d₁, d₁] × [-d₂, d₂]`.
    pub fn eval_grid(&self, xs: &[(f64, f64)]) -> Result<Vec<T>> {
        xs.iter()
            .map(|&(x1, x2)| {
                if x1.abs() > self.d1 || x2.abs() > self.d2 || x1.is_nan() || x2.is_nan() {
                    Err(Error::PointOutsideDomain(x1, x2))
                } else {
                    Ok(self.eval(T::from_f64(x1), T::from_f64(x2)))
                }
            })
            .collect()
    }

    /// Truncated power series of e^U with a rigorous ℓ¹ remainder.
    ///
    /// The remainder after K terms is at most `‖U‖₁^{K+1} e^{‖U‖₁} / (K+1)!`.
    /// In interval mode it is added to every entry; in float mode it is only
    /// reported.
    pub fn seq_exp(&self, tol: f64) -> Result<SeqExp<T>> {
        const MAX_TERMS: usize = 200;
        let norm = self.norm1().to_interval().hi();
        let e_norm = Interval::point(norm).exp();
        let mut term = CoeffSeq::unit(IndexBox::new(0, 0), self.d1, self.d2);
        let mut sum = term.clone();
        // bound = ‖U‖₁^{k+1} e^{‖U‖₁} / (k+1)!
        let mut power = Interval::point(norm);
        let mut fact = Interval::ONE;
        for k in 0..=MAX_TERMS {
            let bound = (power / fact * e_norm).hi();
            if bound <= tol {
                return Ok(SeqExp {
                    seq: sum.map(|x: T| x.inflate(bound)),
                    tail_l1: bound,
                    terms: k + 1,
                });
            }
            let next = k + 1;
            term = term
                .convolve(self)
                .scale(T::one() / T::from_f64(next as f64));
            sum = sum.add(&term);
            power = power * Interval::point(norm);
            fact = fact * Interval::point((next + 1) as f64);
        }
        Err(Error::NonConvergence {
            iterations: MAX_TERMS,
            residual: (power / fact * e_norm).hi(),
        })
    }

    /// Writes the coefficient container.
    pub fn to_file_value(&self, c: &str) -> Value {
        json!({
            "format": FILE_FORMAT,
            "version": 1,
            "c": c,
            "d1": format!("{:e}", self.d1),
            "d2": format!("{:e}", self.d2),
            "box": [self.bx.n1, self.bx.n2],
            "scalar": T::KIND,
            "entries": self.data.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn write_file(&self, path: &Path, c: &str) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file_value(c))
            .map_err(|e| Error::Format(e.to_string()))?;
        crate::util::write_atomic(path, text.as_bytes())
    }
}

/// Output of [`CoeffSeq::seq_exp`].
#[derive(Clone, Debug)]
pub struct SeqExp<T> {
    pub seq: CoeffSeq<T>,
    pub tail_l1: f64,
    pub terms: usize,
}

pub const FILE_FORMAT: &str = "bridgewave-coefficients";

/// Parsed coefficient container.
#[derive(Clone, Debug)]
pub struct CoeffFile {
    pub c: String,
    pub kind: ScalarKind,
    pub float: Option<CoeffSeq<f64>>,
    pub interval: Option<CoeffSeq<Interval>>,
}

impl CoeffFile {
    pub fn read(path: &Path) -> Result<CoeffFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        CoeffFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<CoeffFile> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Format(format!("missing field {k:?}")))
        };
        if field("format")?.as_str() != Some(FILE_FORMAT) {
            return Err(Error::Format("not a coefficient file".into()));
        }
        let c = field("c")?
            .as_str()
            .ok_or_else(|| Error::Format("c must be a string".into()))?
            .to_string();
        let num = |k: &str| -> Result<f64> {
            let x = f64::from_json(field(k)?)?;
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::Format(format!("{k} must be positive")))
            }
        };
        let (d1, d2) = (num("d1")?, num("d2")?);
        let bx: [usize; 2] = serde_json::from_value(field("box")?.clone())
            .map_err(|e| Error::Format(e.to_string()))?;
        let bx = IndexBox::new(bx[0], bx[1]);
        let kind: ScalarKind = serde_json::from_value(field("scalar")?.clone())
            .map_err(|e| Error::Format(e.to_string()))?;
        let entries = field("entries")?
            .as_array()
            .ok_or_else(|| Error::Format("entries must be an array".into()))?;
        let mut out = CoeffFile {
            c,
            kind,
            float: None,
            interval: None,
        };
        match kind {
            ScalarKind::Float => {
                let data = entries
                    .iter()
                    .map(f64::from_json)
                    .collect::<Result<Vec<_>>>()?;
                out.float = Some(CoeffSeq::from_vec(bx, d1, d2, data)?);
            }
            ScalarKind::Interval => {
                let data = entries
                    .iter()
                    .map(Interval::from_json)
                    .collect::<Result<Vec<_>>>()?;
                out.interval = Some(CoeffSeq::from_vec(bx, d1, d2, data)?);
            }
        }
        Ok(out)
    }

    /// Float view (midpoints for interval files).
    pub fn as_float(&self) -> CoeffSeq<f64> {
        match (&self.float, &self.interval) {
            (Some(f), _) => f.clone(),
            (None, Some(i)) => i.mid(),
            _ => unreachable!("coefficient file without data"),
        }
    }
}

impl CoeffSeq<f64> {
    /// Convolution through a zero-padded FFT; exact up to roundoff.
    pub fn convolve_fft(&self, other: &CoeffSeq<f64>) -> CoeffSeq<f64> {
        self.check_domain(other);
        let out = self.bx.minkowski(&other.bx);
        let m1 = (2 * out.n1 + 2).next_power_of_two();
        let m2 = (2 * out.n2 + 2).next_power_of_two();
        let g = fft::synthesize(self, m1, m2);
        let h = fft::synthesize(other, m1, m2);
        let prod: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a * b).collect();
        fft::analyze(&prod, m1, m2, out, self.d1, self.d2)
    }
}
