//! Rigorous Fourier coefficients of `e^Ū`.
//!
//! The coefficients are computed from grid samples and inflated by the
//! aliasing error, which is controlled through geometric decay of the true
//! coefficients: `|(e^Ū)ₙ| ≤ C ν₁^{−|n₁|} ν₂^{−|n₂|}` for `n ≠ 0`.

use crate::error::{Error, Result};
use crate::fft::{self, CInterval};
use crate::interval::{add_round_up, mul_round_up, Interval};
use crate::sequences::{alpha, CoeffSeq, IndexBox};
use serde::{Deserialize, Serialize};

/// How the decay amplitude `C` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeMethod {
    /// `C = exp(‖Ū‖_ν)`, from the Banach algebra property.
    Banach,
    /// `C` from the `L²` mean of `e^ū − 1` on the shifted contour
    /// `x − iρ` with `ν = e^{πρ/d}`.
    Contour,
}

/// How grid transforms are carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FftMode {
    /// Complex interval arithmetic throughout.
    Strict,
    /// Floating-point FFT plus an a priori roundoff bound.
    Gamma,
}

/// Constant in the a priori FFT roundoff model
/// `‖fl(Fx) − Fx‖₂ ≤ FFT_GAMMA · log₂(M) · u · ‖Fx‖₂`.
pub const FFT_GAMMA: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityParams {
    pub nu: (f64, f64),
    /// Half grid sizes; the grids have `2 N^FFT` points per axis.
    pub nfft: (usize, usize),
    pub amplitude: AmplitudeMethod,
    pub fft_mode: FftMode,
}

impl AnalyticityParams {
    pub fn new(nu: (f64, f64), nfft: (usize, usize)) -> Result<Self> {
        let p = AnalyticityParams {
            nu,
            nfft,
            amplitude: AmplitudeMethod::Contour,
            fft_mode: FftMode::Strict,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.0 > 1.0 && self.nu.1 > 1.0 && self.nu.0.is_finite() && self.nu.1.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "decay bases must exceed 1, got {:?}",
                self.nu
            )));
        }
        if !(self.nfft.0.is_power_of_two() && self.nfft.1.is_power_of_two()) {
            return Err(Error::InvalidParams(format!(
                "N^FFT must be powers of two, got {:?}",
                self.nfft
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> (usize, usize) {
        (2 * self.nfft.0, 2 * self.nfft.1)
    }

    /// Checks that the grid resolves a sequence on `bx`.
    pub fn check_box(&self, bx: IndexBox) -> Result<()> {
        if self.nfft.0 < 2 * (bx.n1 + 1) || self.nfft.1 < 2 * (bx.n2 + 1) {
            return Err(Error::InvalidParams(format!(
                "N^FFT {:?} too small for box ({}, {})",
                self.nfft, bx.n1, bx.n2
            )));
        }
        Ok(())
    }
}

/// `ν^{−k}` enclosed.
fn nu_pow_neg(nu: f64, k: usize) -> Interval {
    Interval::point(nu).powi(-(k as i32))
}

fn nu_pow(nu: f64, k: usize) -> Interval {
    Interval::point(nu).powi(k as i32)
}

/// The aliasing factor `εₙ`.
pub fn epsilon_n(apar: &AnalyticityParams, n: (i64, i64)) -> Interval {
    let (m1, m2) = apar.grid();
    let x1 = nu_pow_neg(apar.nu.0, m1);
    let x2 = nu_pow_neg(apar.nu.1, m2);
    let g = nu_pow(apar.nu.0, n.0.unsigned_abs() as usize)
        * nu_pow(apar.nu.1, n.1.unsigned_abs() as usize);
    g * 2.0 * (x1 + x2) / ((Interval::ONE - x1) * (Interval::ONE - x2))
}

/// `‖Ū‖_ν = Σ αₙ |Ūₙ| ν₁^{n₁} ν₂^{n₂}`, upper bound.
pub fn nu_norm(u: &CoeffSeq<Interval>, nu: (f64, f64)) -> f64 {
    let mut s = Interval::ZERO;
    for (a, b) in u.index_box().iter() {
        let w = nu_pow(nu.0, a) * nu_pow(nu.1, b) * alpha(a, b) as f64;
        s += Interval::point(u.get(a, b).mag()) * w;
    }
    s.hi()
}

/// `exp(‖Ū‖_ν)`, valid for every index including `0`.
pub fn amplitude_banach(u: &CoeffSeq<Interval>, nu: (f64, f64)) -> Result<Interval> {
    let s = nu_norm(u, nu);
    if s > 700.0 {
        return Err(Error::Overflow(format!("exp of nu-norm {s}")));
    }
    Ok(Interval::new(0.0, Interval::point(s).exp().hi())?)
}

/// `Σ_{m≥1} ν'^{−mM} = ν'^{−M}/(1 − ν'^{−M})`.
fn alias_sum(nu: f64, m: usize) -> Interval {
    let x = nu_pow_neg(nu, m);
    x / (Interval::ONE - x)
}

/// Contour amplitude: `|(e^Ū)ₙ| ν^{|n|} ≤ C` for `n ≠ 0`.
///
/// `C² ≥ mean |v(x − iρ)|²` with `v = e^ū − 1`, the mean taken over the
/// torus. It is evaluated as the grid mean plus the trapezoid error, which
/// is bounded through the decay of `|v|²` on a wider strip with bases
/// `ν·ν'`.
pub fn amplitude_contour(u: &CoeffSeq<Interval>, apar: &AnalyticityParams) -> Result<Interval> {
    let (m1, m2) = apar.grid();
    let nu = apar.nu;
    let g = fft::interval_synthesize(u, m1, m2, |k1, k2| {
        Interval::point(nu.0).powi(k1 as i32) * Interval::point(nu.1).powi(k2 as i32)
    });
    // sum of |e^{u} − 1|² over the grid
    let one = CInterval::real(Interval::ONE);
    let mut total = Interval::ZERO;
    for z in g {
        let v = z.exp() - one;
        total += v.abs_sq();
    }
    if !total.is_finite() {
        return Err(Error::Overflow("contour samples".into()));
    }
    let mean = total / (m1 * m2) as f64;
    // trapezoid error with an extra strip: pick ν' among a few candidates
    let mut best: Option<Interval> = None;
    for extra in [1.02, 1.05, 1.1, 1.2, 1.4] {
        let wide = (nu.0 * extra, nu.1 * extra);
        let s = nu_norm(u, wide);
        if s > 300.0 {
            continue;
        }
        let sup = (Interval::point(s).exp() + Interval::ONE).sqr();
        let a1 = alias_sum(extra, m1);
        let a2 = alias_sum(extra, m2);
        // (1 + 2a₁)(1 + 2a₂) − 1 without cancellation
        let err = sup * ((a1 + a2) * 2.0 + a1 * a2 * 4.0);
        let c2 = Interval::new(0.0, (mean + err).hi())?;
        if best.is_none_or(|b| c2.hi() < b.hi()) {
            best = Some(c2);
        }
    }
    let c2 = best.ok_or_else(|| Error::Overflow("contour amplitude: nu-norm too large".into()))?;
    Ok(c2.sqrt_clamped())
}

pub fn amplitude_c(u: &CoeffSeq<Interval>, apar: &AnalyticityParams) -> Result<Interval> {
    match apar.amplitude {
        AmplitudeMethod::Banach => amplitude_banach(u, apar.nu),
        AmplitudeMethod::Contour => amplitude_contour(u, apar),
    }
}

/// Geometric tails of the envelope `ν₁^{−|n₁|} ν₂^{−|n₂|}` outside a box,
/// weighted by `α`. With `q = ν^{−p}` this is `Σ_{n∉box} αₙ q^n`.
fn envelope_sum_outside(q: (Interval, Interval), bx: IndexBox) -> Interval {
    let one = Interval::ONE;
    let full = |q: Interval| (one + q) / (one - q);
    let inside = |q: Interval, n: usize| one + q * 2.0 * (one - q.powi(n as i32)) / (one - q);
    let beyond = |q: Interval, n: usize| q.powi(n as i32 + 1) * 2.0 / (one - q);
    let (t1, t2) = (beyond(q.0, bx.n1), beyond(q.1, bx.n2));
    (t1 * full(q.1) + inside(q.0, bx.n1) * t2).clamp_nonneg()
}

/// `Σ_{n∉box} αₙ C ν^{−|n|}`: the ℓ¹ norm of the envelope outside `bx`.
pub fn tail_l1(c: Interval, nu: (f64, f64), bx: IndexBox) -> Interval {
    let q = (Interval::point(nu.0).recip(), Interval::point(nu.1).recip());
    c * envelope_sum_outside(q, bx)
}

/// `Σ_{n∉box} αₙ (C ν^{−|n|})²`: the squared ℓ² norm outside `bx`.
pub fn tail_l2_sq(c: Interval, nu: (f64, f64), bx: IndexBox) -> Interval {
    let q = (
        Interval::point(nu.0).powi(-2),
        Interval::point(nu.1).powi(-2),
    );
    c.sqr() * envelope_sum_outside(q, bx)
}

/// Coefficients of `e^Ū` on a head box plus a decay envelope elsewhere.
#[derive(Clone, Debug)]
pub struct EnclosedSeq {
    pub head: CoeffSeq<Interval>,
    pub c: Interval,
    pub nu: (f64, f64),
    pub fft_mode: FftMode,
    pub amplitude: AmplitudeMethod,
}

impl EnclosedSeq {
    /// Enclosure of entry `n` for any signed index.
    pub fn entry(&self, n1: i64, n2: i64) -> Interval {
        let (a, b) = (n1.unsigned_abs() as usize, n2.unsigned_abs() as usize);
        if self.head.index_box().contains(a, b) {
            self.head.get(a, b)
        } else {
            Interval::symmetric(self.envelope(a, b).hi())
        }
    }

    pub fn envelope(&self, a: usize, b: usize) -> Interval {
        self.c * nu_pow_neg(self.nu.0, a) * nu_pow_neg(self.nu.1, b)
    }

    pub fn tail_l1(&self) -> Interval {
        tail_l1(self.c, self.nu, self.head.index_box())
    }

    pub fn tail_l2_sq(&self) -> Interval {
        tail_l2_sq(self.c, self.nu, self.head.index_box())
    }

    /// Upper bound of `‖e^Ū‖₁`.
    pub fn norm1(&self) -> Interval {
        let h = self.head.norm1();
        Interval::new(0.0, (h + self.tail_l1()).hi()).expect("finite norm")
    }

    /// Head of `V̄ = e^Ū − e₀`.
    pub fn v_head(&self) -> CoeffSeq<Interval> {
        let mut v = self.head.clone();
        v.set(0, 0, v.get(0, 0) - Interval::ONE);
        v
    }

    /// Head restricted or extended (with envelope intervals) to `bx`.
    pub fn on_box(&self, bx: IndexBox) -> CoeffSeq<Interval> {
        CoeffSeq::from_fn(bx, self.head.d1(), self.head.d2(), |a, b| {
            self.entry(a as i64, b as i64)
        })
    }
}

/// Rigorous enclosure of `e^Ū` on `head_box`.
pub fn rigorous_exp(
    u: &CoeffSeq<Interval>,
    apar: &AnalyticityParams,
    head_box: IndexBox,
) -> Result<EnclosedSeq> {
    apar.validate()?;
    apar.check_box(u.index_box())?;
    apar.check_box(head_box)?;
    let c = amplitude_c(u, apar)?;
    let (m1, m2) = apar.grid();
    let (d1, d2) = (u.d1(), u.d2());
    let raw = match apar.fft_mode {
        FftMode::Strict => {
            let g: Vec<CInterval> = fft::interval_synthesize(u, m1, m2, |_, _| Interval::ONE)
                .into_iter()
                .map(|z| CInterval::real(z.re.exp()))
                .collect();
            fft::interval_analyze(g, m1, m2, head_box, d1, d2)
        }
        FftMode::Gamma => gamma_exp(u, m1, m2, head_box)?,
    };
    let head = CoeffSeq::from_fn(head_box, d1, d2, |a, b| {
        let e = epsilon_n(apar, (a as i64, b as i64));
        raw.get(a, b) + Interval::symmetric((c * e).hi())
    });
    Ok(EnclosedSeq {
        head,
        c,
        nu: apar.nu,
        fft_mode: apar.fft_mode,
        amplitude: apar.amplitude,
    })
}

/// Discrete coefficients of `e^ū` through the float FFT, each inflated by
/// the a priori roundoff bound.
fn gamma_exp(
    u: &CoeffSeq<Interval>,
    m1: usize,
    m2: usize,
    out: IndexBox,
) -> Result<CoeffSeq<Interval>> {
    let mid = u.mid();
    let urad = u.data().iter().map(|x| x.rad()).fold(0.0, f64::max);
    let unit = f64::EPSILON / 2.0;
    let logm = ((m1 * m2) as f64).log2();
    let gam = FFT_GAMMA * logm * unit;
    // synthesis: ‖Fx‖₂ = √M ‖U‖₂ by Parseval on the grid
    let mm = (m1 * m2) as f64;
    let rad_norm1 = u
        .index_box()
        .iter()
        .map(|(a, b)| alpha(a, b) as f64 * urad)
        .sum::<f64>();
    let s_err = add_round_up(
        mul_round_up(mul_round_up(gam, mm.sqrt()), mid.norm2() * (1.0 + 1e-12)),
        rad_norm1 * (1.0 + 1e-12),
    );
    let samples = fft::synthesize(&mid, m1, m2);
    let ymax = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let top = Interval::point(ymax + s_err).exp();
    // |fl(exp(ŷ)) − e^y| ≤ e^{top}(e^{s} − 1) + 2u e^{top}
    let g_err = top * (Interval::point(s_err).exp_m1() + 2.0 * unit);
    let g: Vec<f64> = samples.iter().map(|&y| y.exp()).collect();
    let gmax = g.iter().cloned().fold(0.0, f64::max);
    let a_err = mul_round_up(gam, gmax * (1.0 + 1e-12));
    let r = add_round_up(g_err.hi(), a_err);
    if !r.is_finite() {
        return Err(Error::Overflow("gamma-mode FFT bound".into()));
    }
    let coeffs = fft::analyze(&g, m1, m2, out, u.d1(), u.d2());
    Ok(CoeffSeq::from_fn(out, u.d1(), u.d2(), |a, b| {
        Interval::symmetric(r) + coeffs.get(a, b)
    }))
}
