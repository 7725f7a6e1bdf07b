//! Grid transforms between cosine coefficients and samples.
//!
//! Samples live on the periodic grid `x = (2d₁ j₁ / M₁, 2d₂ j₂ / M₂)`. The
//! float path uses `rustfft`; the interval path is a radix-2 transform over
//! complex intervals with rigorously enclosed twiddle factors.

use crate::interval::Interval;
use crate::sequences::{CoeffSeq, IndexBox};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::ops::{Add, Mul, Sub};

fn wrap(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

fn transform_2d(buf: &mut [Complex64], m1: usize, m2: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (f1, f2) = if inverse {
        (planner.plan_fft_inverse(m1), planner.plan_fft_inverse(m2))
    } else {
        (planner.plan_fft_forward(m1), planner.plan_fft_forward(m2))
    };
    for row in buf.chunks_mut(m2) {
        f2.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m1];
    for j in 0..m2 {
        for i in 0..m1 {
            col[i] = buf[i * m2 + j];
        }
        f1.process(&mut col);
        for i in 0..m1 {
            buf[i * m2 + j] = col[i];
        }
    }
}

/// Coefficients `c[k] = U[|k|]` placed at `k mod M`; entries beyond `M/2`
/// fold over, matching what sampling does.
fn place(
    u: &CoeffSeq<f64>,
    m1: usize,
    m2: usize,
    weight: impl Fn(i64, i64) -> f64,
) -> Vec<Complex64> {
    let bx = u.index_box();
    let mut buf = vec![Complex64::new(0.0, 0.0); m1 * m2];
    let (n1, n2) = (bx.n1 as i64, bx.n2 as i64);
    for k1 in -n1..=n1 {
        for k2 in -n2..=n2 {
            let v = u.get_signed(k1, k2) * weight(k1, k2);
            buf[wrap(k1, m1) * m2 + wrap(k2, m2)] += v;
        }
    }
    buf
}

/// Samples of `u` on the `m1 × m2` grid, row-major.
pub fn synthesize(u: &CoeffSeq<f64>, m1: usize, m2: usize) -> Vec<f64> {
    let mut buf = place(u, m1, m2, |_, _| 1.0);
    transform_2d(&mut buf, m1, m2, true);
    buf.into_iter().map(|z| z.re).collect()
}

/// Samples of the first `x₁`-derivative pair `(∂₁u, ∂₁²u)` are obtained by
/// weighting coefficients; this returns samples of the sequence multiplied
/// entrywise by `weight(k₁, k₂)` over signed indices.
pub fn synthesize_weighted(
    u: &CoeffSeq<f64>,
    m1: usize,
    m2: usize,
    weight: impl Fn(i64, i64) -> f64,
) -> Vec<f64> {
    let mut buf = place(u, m1, m2, weight);
    transform_2d(&mut buf, m1, m2, true);
    buf.into_iter().map(|z| z.re).collect()
}

/// Discrete cosine coefficients of grid samples on the box `out`.
pub fn analyze(g: &[f64], m1: usize, m2: usize, out: IndexBox, d1: f64, d2: f64) -> CoeffSeq<f64> {
    assert_eq!(g.len(), m1 * m2);
    let mut buf: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform_2d(&mut buf, m1, m2, false);
    let scale = 1.0 / (m1 * m2) as f64;
    CoeffSeq::from_fn(out, d1, d2, |a, b| buf[(a % m1) * m2 + (b % m2)].re * scale)
}

/// Complex interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub const ZERO: CInterval = CInterval {
        re: Interval::ZERO,
        im: Interval::ZERO,
    };

    pub fn real(re: Interval) -> CInterval {
        CInterval {
            re,
            im: Interval::ZERO,
        }
    }

    pub fn exp(self) -> CInterval {
        let r = self.re.exp();
        CInterval {
            re: r * self.im.cos(),
            im: r * self.im.sin(),
        }
    }

    pub fn abs_sq(self) -> Interval {
        self.re.sqr() + self.im.sqr()
    }

    pub fn scale(self, s: Interval) -> CInterval {
        CInterval {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

impl Add for CInterval {
    type Output = CInterval;
    fn add(self, o: CInterval) -> CInterval {
        CInterval {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for CInterval {
    type Output = CInterval;
    fn sub(self, o: CInterval) -> CInterval {
        CInterval {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for CInterval {
    type Output = CInterval;
    fn mul(self, o: CInterval) -> CInterval {
        CInterval {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Enclosures of `exp(∓2πik/m)` for `k < m/2`.
fn twiddles(m: usize, inverse: bool) -> Vec<CInterval> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..m / 2)
        .map(|k| {
            let theta = Interval::pi() * (2.0 * k as f64 / m as f64);
            CInterval {
                re: theta.cos(),
                im: theta.sin() * sign,
            }
        })
        .collect()
}

fn fft_1d(a: &mut [CInterval], tw: &[CInterval]) {
    let m = a.len();
    let bits = m.trailing_zeros();
    for i in 0..m {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= m {
        let stride = m / len;
        for start in (0..m).step_by(len) {
            for k in 0..len / 2 {
                let t = tw[k * stride] * a[start + k + len / 2];
                let u = a[start + k];
                a[start + k] = u + t;
                a[start + k + len / 2] = u - t;
            }
        }
        len *= 2;
    }
}

/// In-place two-dimensional interval DFT (unnormalized). Sizes must be
/// powers of two.
pub fn interval_fft_2d(buf: &mut [CInterval], m1: usize, m2: usize, inverse: bool) {
    assert!(m1.is_power_of_two() && m2.is_power_of_two());
    assert_eq!(buf.len(), m1 * m2);
    let t2 = twiddles(m2, inverse);
    let t1 = twiddles(m1, inverse);
    buf.par_chunks_mut(m2).for_each(|row| fft_1d(row, &t2));
    let mut cols: Vec<Vec<CInterval>> = (0..m2)
        .into_par_iter()
        .map(|j| (0..m1).map(|i| buf[i * m2 + j]).collect())
        .collect();
    cols.par_iter_mut().for_each(|c| fft_1d(c, &t1));
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            buf[i * m2 + j] = *v;
        }
    }
}

/// Rigorous samples of the complexified function
/// `Σ_k c_k w(k) e^{iπ(k₁x₁/d₁ + k₂x₂/d₂)}` with `c_k = U[|k|]`.
pub fn interval_synthesize(
    u: &CoeffSeq<Interval>,
    m1: usize,
    m2: usize,
    weight: impl Fn(i64, i64) -> Interval,
) -> Vec<CInterval> {
    let bx = u.index_box();
    assert!(
        2 * bx.n1 < m1 && 2 * bx.n2 < m2,
        "grid too coarse for the box"
    );
    let mut buf = vec![CInterval::ZERO; m1 * m2];
    let (n1, n2) = (bx.n1 as i64, bx.n2 as i64);
    for k1 in -n1..=n1 {
        for k2 in -n2..=n2 {
            buf[wrap(k1, m1) * m2 + wrap(k2, m2)] =
                CInterval::real(u.get_signed(k1, k2) * weight(k1, k2));
        }
    }
    interval_fft_2d(&mut buf, m1, m2, true);
    buf
}

/// Rigorous discrete coefficients `(1/M) Σ_j g_j e^{-2πi k·j/M}` on `out`,
/// real parts only.
pub fn interval_analyze(
    mut g: Vec<CInterval>,
    m1: usize,
    m2: usize,
    out: IndexBox,
    d1: f64,
    d2: f64,
) -> CoeffSeq<Interval> {
    interval_fft_2d(&mut g, m1, m2, false);
    let scale = Interval::point(1.0 / (m1 * m2) as f64);
    CoeffSeq::from_fn(out, d1, d2, |a, b| g[(a % m1) * m2 + (b % m2)].re * scale)
}
