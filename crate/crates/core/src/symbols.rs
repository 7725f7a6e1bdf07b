//! The Fourier symbol of the linear part and the constants derived from it.
//!
//! With `ω₁ = 2πξ₁` and `β = πn₂/d₂` the symbol of the `n₂`-th mode is
//! `l_{n₂}(ξ₁) = (ω₁² + β²)² − c²ω₁² + 1`. Everything here is evaluated in
//! interval arithmetic. A nonzero `delta0` replaces `l` by `l − δ₀`, the
//! spectrally shifted operator.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::sequences::{CoeffSeq, IndexBox};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolParams {
    pub c: Interval,
    pub d2: f64,
    pub delta0: Interval,
}

impl SymbolParams {
    pub fn new(c: Interval, d2: f64) -> Result<SymbolParams> {
        if !(c.lo() > 0.0) || !(d2 > 0.0) {
            return Err(Error::InvalidParams("c and d2 must be positive".into()));
        }
        let p = SymbolParams {
            c,
            d2,
            delta0: Interval::ZERO,
        };
        if !p.floor().is_positive() {
            return Err(Error::InvalidParams(format!(
                "c = {c} is not inside (0, √2)"
            )));
        }
        Ok(p)
    }

    /// The same symbol shifted by `δ₀ ∈ [0, 1 − c⁴/4)`.
    pub fn shifted(self, delta0: Interval) -> Result<SymbolParams> {
        if delta0.lo() < 0.0 || !delta0.certainly_lt(self.floor()) {
            return Err(Error::InvalidParams(format!(
                "shift {delta0} must lie in [0, 1 - c^4/4)"
            )));
        }
        Ok(SymbolParams { delta0, ..self })
    }

    pub fn c2(&self) -> Interval {
        self.c.sqr()
    }

    /// `1 − c⁴/4`, the bottom of the essential spectrum.
    pub fn floor(&self) -> Interval {
        Interval::ONE - self.c.powi(4) * 0.25
    }

    /// `β = π n₂ / d₂`.
    pub fn beta(&self, n2: usize) -> Interval {
        omega(n2, self.d2)
    }
}

/// `π n / d`, the angular frequency of index `n` on a half-period `d`.
pub fn omega(n: usize, d: f64) -> Interval {
    Interval::pi() * n as f64 / d
}

fn l_from_squares(p: &SymbolParams, w1sq: Interval, beta_sq: Interval) -> Interval {
    (w1sq + beta_sq).sqr() - p.c2() * w1sq + Interval::ONE - p.delta0
}

/// `l(ξ) = |2πξ|⁴ − c²(2πξ₁)² + 1`.
pub fn symbol_l(p: &SymbolParams, xi1: Interval, xi2: Interval) -> Interval {
    let two_pi = Interval::pi() * 2.0;
    l_from_squares(p, (two_pi * xi1).sqr(), (two_pi * xi2).sqr())
}

/// `l_{n₂}(ξ₁)` with `ñ₂ = n₂/(2d₂)`.
pub fn symbol_l_n2(p: &SymbolParams, n2: usize, xi1: Interval) -> Interval {
    let w1 = Interval::pi() * 2.0 * xi1;
    l_from_squares(p, w1.sqr(), p.beta(n2).sqr())
}

/// `l(ñ)` at the lattice point `n` of the periodic problem on `(d₁, d₂)`.
pub fn l_lattice(p: &SymbolParams, d1: f64, n1: usize, n2: usize) -> Interval {
    l_from_squares(p, omega(n1, d1).sqr(), p.beta(n2).sqr())
}

/// `inf_{ξ₁} l_{n₂}(ξ₁)`: `c²β² + 1 − c⁴/4` while `β² ≤ c²/2`, else `β⁴ + 1`.
///
/// The first expression never exceeds the second, so it is returned
/// whenever the branch cannot be decided.
pub fn min_l_n2(p: &SymbolParams, n2: usize) -> Interval {
    let b2 = p.beta(n2).sqr();
    let half_c2 = p.c2() * 0.5;
    let inner = p.c2() * b2 + p.floor() - p.delta0;
    let outer = b2.sqr() + Interval::ONE - p.delta0;
    if b2.lo() > half_c2.hi() {
        outer
    } else {
        inner
    }
}

/// `κ₁ = 1/(1 − c⁴/4)`.
pub fn kappa1(p: &SymbolParams) -> Interval {
    p.floor().recip()
}

/// Enclosure of `‖1/l_{n₂}‖²_{L²(ℝ)}`: interval Riemann sums on `[0, Ξ]`
/// plus the analytic tail `4/(7(2π)⁸Ξ⁷)` beyond `Ξ`.
pub fn inv_l_norm_sq(p: &SymbolParams, n2: usize, xi_cut: f64, pieces: usize) -> Result<Interval> {
    let two_pi = Interval::pi() * 2.0;
    // l ≥ (2π)⁴ξ⁴/2 needs (2πξ)² ≥ 2c²
    let need = (p.c2() * 2.0).sqrt_clamped() / two_pi;
    if !(xi_cut > need.hi()) {
        return Err(Error::InvalidParams(format!(
            "quadrature cut {xi_cut} must exceed {}",
            need.hi()
        )));
    }
    let floor = min_l_n2(p, n2);
    let b2 = p.beta(n2).sqr();
    let h = Interval::point(xi_cut) / pieces as f64;
    let (mut lower, mut upper) = (Interval::ZERO, Interval::ZERO);
    for k in 0..pieces {
        let a = h * k as f64;
        let b = h * (k + 1) as f64;
        let xi = a.hull(b);
        let l = l_from_squares(p, (two_pi * xi).sqr(), b2);
        let lo = l.lo().max(floor.lo());
        upper += Interval::point(h.hi()) / Interval::point(lo).sqr();
        lower += Interval::point(h.lo()) / Interval::point(l.hi()).sqr();
    }
    let tail = Interval::point(4.0) / (two_pi.powi(8) * 7.0 * Interval::point(xi_cut).powi(7));
    // both half-lines
    let lo = (lower * 2.0).lo();
    let hi = ((upper + tail) * 2.0).hi();
    Interval::new(lo.min(hi), hi)
}

/// Bound on `Σ_{n₂>N} ‖1/l_{n₂}‖²`, valid for `N > d₂c/π`.
pub fn inv_l_tail_sum(p: &SymbolParams, n: usize) -> Result<Interval> {
    let threshold = p.c * p.d2 / Interval::pi();
    if !(n as f64 > threshold.hi()) {
        return Err(Error::InvalidSplit {
            split: n,
            threshold: threshold.hi(),
        });
    }
    let two_pi = Interval::pi() * 2.0;
    Ok(Interval::point(5.0) * Interval::point(2.0 * p.d2).powi(7)
        / (two_pi.powi(7) * 48.0 * Interval::point(n as f64).powi(6)))
}

/// `κ₂ = (‖1/l₀‖² + 2Σ_{n₂≥1} ‖1/l_{n₂}‖²)^{1/2}`.
pub fn kappa2(p: &SymbolParams, n2_split: usize, xi_cut: f64) -> Result<Interval> {
    kappa2_with(p, n2_split, xi_cut, 4096)
}

pub fn kappa2_with(
    p: &SymbolParams,
    n2_split: usize,
    xi_cut: f64,
    pieces: usize,
) -> Result<Interval> {
    let tail = inv_l_tail_sum(p, n2_split)?;
    let mut total = inv_l_norm_sq(p, 0, xi_cut, pieces)?;
    for n2 in 1..=n2_split {
        total += inv_l_norm_sq(p, n2, xi_cut, pieces)? * 2.0;
    }
    let total = total + Interval::new(0.0, (tail * 2.0).hi())?;
    total.sqrt()
}

/// Decay data of `f_{n₂} = F⁻¹(1/l_{n₂})`: `|f_{n₂}(x)| ≤ C e^{−a|x|}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayConstants {
    pub n2: usize,
    pub a: Interval,
    pub b: Interval,
    pub c_amp: Interval,
}

/// Closed-form roots of `l_{n₂}(ξ/2π) − δ₀`, which sit at `±b ± ia`.
///
/// The residues at the two roots in the upper half plane give
/// `|f_{n₂}(x)| ≤ e^{−a|x|} / (√(a² + b²) √(4(1 + c²β²) − c⁴))`.
pub fn decay_constants(p: &SymbolParams, n2: usize) -> Result<DecayConstants> {
    let b2 = p.beta(n2).sqr();
    let c2 = p.c2();
    let one = Interval::ONE - p.delta0;
    let disc = (c2 * b2 + one) * 4.0 - c2.sqr();
    if !disc.is_positive() {
        return Err(Error::RadicandNotPositive(n2));
    }
    let modulus = (b2.sqr() + one).sqrt()?;
    let radicand = c2 - b2 * 2.0 + modulus * 2.0;
    if !radicand.is_positive() {
        return Err(Error::RadicandNotPositive(n2));
    }
    let b = radicand.sqrt()? * 0.5;
    let a = disc.sqrt()? / (b * 4.0);
    let c_amp = ((a.sqr() + b.sqr()).sqrt()? * disc.sqrt()?).recip();
    Ok(DecayConstants { n2, a, b, c_amp })
}

/// `inf_{n₂} a_{n₂}`. Since `a_{n₂}² = (√(β⁴+1−δ₀) + β² − c²/2)/2` is
/// increasing in `β`, the infimum is attained at `n₂ = 0`.
pub fn inf_a(p: &SymbolParams) -> Result<Interval> {
    Ok(decay_constants(p, 0)?.a)
}

/// `E_{n}` of the exterior estimate on `box`: the cosine coefficients of
/// `C²_{n₂} e^{−2a d₁} cosh(2a x)/a` on `(−d₁, d₁)`,
/// `C²(−1)^{n₁}(1 − e^{−4a d₁})/(d₁(4a² + ω₁²))`.
pub fn e_sequence(p: &SymbolParams, bx: IndexBox, d1: f64) -> Result<CoeffSeq<Interval>> {
    let consts: Vec<DecayConstants> = (0..=bx.n2)
        .map(|n2| decay_constants(p, n2))
        .collect::<Result<_>>()?;
    Ok(CoeffSeq::from_fn(bx, d1, p.d2, |n1, n2| {
        e_entry(&consts[n2], n1, d1)
    }))
}

fn e_entry(k: &DecayConstants, n1: usize, d1: f64) -> Interval {
    let a = k.a;
    let num = k.c_amp.sqr() * (Interval::ONE - (a * (-4.0 * d1)).exp());
    let den = (a.sqr() * 4.0 + omega(n1, d1).sqr()) * d1;
    let v = num / den;
    if n1 % 2 == 0 {
        v
    } else {
        -v
    }
}

/// `Ē_{n₁} = Σ_{n₂∈ℤ} E_{n₁,|n₂|}` on `0..=n1_max`, stored on the row
/// `n₂ = 0`. Modes beyond `n2_cut` are bounded analytically using
/// `C²/a² ≤ 1/(8π²c²β⁶)`, valid once `β² ≥ c²/2`.
pub fn e_collapsed(
    p: &SymbolParams,
    n1_max: usize,
    d1: f64,
    n2_cut: usize,
) -> Result<CoeffSeq<Interval>> {
    let b_cut = p.beta(n2_cut + 1).sqr();
    if !(b_cut.lo() >= (p.c2() * 0.5).hi()) {
        return Err(Error::InvalidParams(format!(
            "n2 cut {n2_cut} too small for the tail bound"
        )));
    }
    let consts: Vec<DecayConstants> = (0..=n2_cut)
        .map(|n2| decay_constants(p, n2))
        .collect::<Result<_>>()?;
    // Σ_{n>K} β_n^{-6} ≤ (d₂/π)⁶ / (5K⁵); E ≤ C²/(4a²d₁); both signs of n₂
    let pi = Interval::pi();
    let k = Interval::point(n2_cut as f64);
    let zeta_tail = (Interval::point(p.d2) / pi).powi(6) / (k.powi(5) * 5.0);
    let tail = zeta_tail / (pi.sqr() * 8.0 * p.c2()) / (d1 * 4.0) * 2.0;
    let tail = Interval::symmetric(tail.hi());
    Ok(CoeffSeq::from_fn(
        IndexBox::new(n1_max, 0),
        d1,
        p.d2,
        |n1, _| {
            let mut s = e_entry(&consts[0], n1, d1);
            for c in &consts[1..] {
                s += e_entry(c, n1, d1) * 2.0;
            }
            s + tail
        },
    ))
}

/// `C(d₁) = 4d₁ + 4e^{−ad₁}/(a(1−e^{−3ad₁/2})) + 2/(a(1−e^{−2ad₁}))` with
/// `a = inf a_{n₂}`.
pub fn c_of_d1(p: &SymbolParams, d1: f64) -> Result<Interval> {
    let a = inf_a(p)?;
    let d = Interval::point(d1);
    let t1 = d * 4.0;
    let t2 = (a * d * -1.0).exp() * 4.0 / (a * (Interval::ONE - (a * d * -1.5).exp()));
    let t3 = Interval::point(2.0) / (a * (Interval::ONE - (a * d * -2.0).exp()));
    Ok(t1 + t2 + t3)
}

/// Lower bound of `l(ñ)` over lattice points outside `bx`.
///
/// `l` grows with `n₂`, and with `n₁` once `ω₁² ≥ c²/2`, so only the two
/// boundary layers need scanning, each until that threshold.
pub fn min_l_outside(p: &SymbolParams, d1: f64, bx: IndexBox) -> Interval {
    let half_c2 = (p.c2() * 0.5).hi();
    let mut best: Option<Interval> = None;
    let mut take = |v: Interval| {
        best = Some(match best {
            Some(b) => b.min(v),
            None => v,
        })
    };
    // n₂ = N₂+1, all n₁
    let mut n1 = 0;
    loop {
        take(l_lattice(p, d1, n1, bx.n2 + 1));
        if omega(n1, d1).sqr().lo() >= half_c2 {
            break;
        }
        n1 += 1;
    }
    // n₁ ≥ N₁+1, n₂ = 0
    let mut n1 = bx.n1 + 1;
    loop {
        take(l_lattice(p, d1, n1, 0));
        if omega(n1, d1).sqr().lo() >= half_c2 {
            break;
        }
        n1 += 1;
    }
    best.expect("at least one candidate")
}
