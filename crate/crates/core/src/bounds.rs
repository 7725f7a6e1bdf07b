//! Newton–Kantorovich bounds around `Ū` and the radii verification.
//!
//! All matrices are in hat coordinates of the even sector, so weighted
//! operator norms are plain spectral norms.

use crate::aliasing::EnclosedSeq;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::IMat;
use crate::operators::{self, Index, Sector};
use crate::sequences::{alpha, CoeffSeq, IndexBox};
use crate::symbols::{c_of_d1, e_collapsed, inf_a, kappa1, l_lattice, min_l_outside, SymbolParams};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// The bound suite. `Z₂(r) = z2_coeff · (e^{κ₂r} − 1)/r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub y0: Interval,
    pub z1: Interval,
    pub z2_coeff: Interval,
    pub kappa2: Interval,
    pub norm_bn: Interval,
    pub parts: BoundParts,
}

/// Intermediate quantities, kept for the certificate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParts {
    pub z1_n: Interval,
    pub z1_periodic: Interval,
    pub zu: Interval,
    pub zu1: Interval,
    pub zu2: Interval,
    pub v_tail_l1: Interval,
    pub v_n_l1: Interval,
    pub min_l_outside: Interval,
    pub kappa1: Interval,
    pub amplitude_c: Interval,
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

/// Nonnegative upper bound as an interval `[0, x]`.
fn upper(x: f64) -> Interval {
    Interval::new(0.0, x).unwrap_or(Interval::ENTIRE)
}

fn check_finite(x: Interval, what: &str) -> Result<Interval> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::UnboundedInterval(what.into()))
    }
}

fn column(v: Vec<Interval>) -> IMat {
    IMat::from_fn(v.len(), 1, |i, _| v[i])
}

fn l_inv(p: &SymbolParams, d1: f64, idx: &[Index]) -> Vec<Interval> {
    operators::l_values(p, d1, idx)
        .into_iter()
        .map(|l| l.recip())
        .collect()
}

/// `F(Ū)ₙ = (l(ñ) − 1)Ūₙ + (e^Ū)ₙ − δₙ₀` from the enclosure.
fn f_entry(
    p: &SymbolParams,
    u: &CoeffSeq<Interval>,
    enc: &EnclosedSeq,
    a: usize,
    b: usize,
) -> Interval {
    let l = l_lattice(p, u.d1(), a, b);
    let unit = if a == 0 && b == 0 {
        Interval::ONE
    } else {
        Interval::ZERO
    };
    (l - Interval::ONE) * u.get(a, b) + enc.entry(a as i64, b as i64) - unit
}

/// `𝒴₀ = √(2d₁) (‖B^N π^N F(Ū)‖² + ‖(π^H − π^N)F(Ū)‖² + C²·tail)^{1/2}`,
/// where `H` is the head box of the enclosure.
pub fn y0_bound(
    u: &CoeffSeq<Interval>,
    bn: &DMatrix<f64>,
    enc: &EnclosedSeq,
    p: &SymbolParams,
    n: IndexBox,
) -> Result<Interval> {
    let head = enc.head.index_box();
    if !head.contains_box(&n) || !head.contains_box(&u.index_box()) {
        return Err(Error::ShapeMismatch(
            "enclosure head must cover N and the box of U".into(),
        ));
    }
    let idx = operators::sector_indices(n, Sector::Even);
    let f = CoeffSeq::from_fn(n, u.d1(), u.d2(), |a, b| f_entry(p, u, enc, a, b));
    let fh = column(operators::to_hat(&f, Sector::Even, &idx));
    let bf = IMat::from_float(bn.clone()).mul(&fh);
    let inner = upper(bf.norm_frobenius()).sqr();
    let mut middle = Interval::ZERO;
    for (a, b) in head.iter().filter(|&(a, b)| !n.contains(a, b)) {
        middle += f_entry(p, u, enc, a, b).sqr() * alpha(a, b) as f64;
    }
    let tail = enc.tail_l2_sq();
    let total = inner + middle + tail;
    check_finite((Interval::point(2.0 * u.d1()) * total).sqrt_clamped(), "Y0")
}

/// `‖B^N‖₂` enclosed from above.
pub fn norm_bn(bn: &DMatrix<f64>) -> Interval {
    upper(IMat::from_float(bn.clone()).norm2())
}

/// `Z₁^N` and the periodic `Z₁`.
///
/// `Z₁^N` combines `‖π^N − B^N(I + M_{V^N}L⁻¹)π^{2N}‖` and
/// `‖(π^{2N} − π^N)M_{V^N}L⁻¹π^N‖` in quadrature; `Z₁` adds
/// `‖V^N‖₁ / min_{n∉I_N} l(ñ)`.
pub fn z1n_bound(
    v: &CoeffSeq<Interval>,
    bn: &DMatrix<f64>,
    p: &SymbolParams,
    n: IndexBox,
) -> Result<(Interval, Interval)> {
    let vn = v.resized(n);
    let d1 = v.d1();
    let rows = operators::sector_indices(n, Sector::Even);
    let all = operators::ordered_indices(n, n.scaled(2), Sector::Even);
    let outer = &all[rows.len()..];
    let b = IMat::from_float(bn.clone());

    // block 1: [I | 0] − B^N [(I + M L⁻¹)_{N,N} | (M L⁻¹)_{N,2N∖N}]
    let linv_all = l_inv(p, d1, &all);
    let m = operators::mult_matrix(&vn, Sector::Even, &rows, &all)
        .scale_rows_cols(None, Some(&linv_all));
    let mut target = m;
    for i in 0..rows.len() {
        target.set(i, i, target.get(i, i) + Interval::ONE);
    }
    let mut block1 = b.mul(&target);
    for i in 0..rows.len() {
        block1.set(i, i, Interval::ONE - block1.get(i, i));
    }
    for j in 0..all.len() {
        for i in 0..rows.len() {
            if i != j {
                block1.mid[(i, j)] = -block1.mid[(i, j)];
            }
        }
    }
    // block 2: (π^{2N} − π^N) M L⁻¹ π^N
    let linv_n = l_inv(p, d1, &rows);
    let block2 = operators::mult_matrix(&vn, Sector::Even, outer, &rows)
        .scale_rows_cols(None, Some(&linv_n));
    let z1n = (upper(block1.norm2()).sqr() + upper(block2.norm2()).sqr()).sqrt_clamped();
    let lmin = min_l_outside(p, d1, n);
    let z1 = (z1n.sqr() + (vn.norm1().abs() / lmin).sqr()).sqrt_clamped();
    Ok((check_finite(z1n, "Z1^N")?, check_finite(z1, "Z1")?))
}

/// `(V, V∗Ē)₂` with `Ē` collapsed over `n₂`.
pub fn v_ve_inner(vn: &CoeffSeq<Interval>, p: &SymbolParams) -> Result<Interval> {
    let bx = vn.index_box();
    let d1 = vn.d1();
    let n2_cut = n2_cut_for(p);
    let e = e_collapsed(p, 2 * bx.n1, d1, n2_cut)?;
    let conv = vn.convolve_into(&e, bx);
    Ok(vn.inner(&conv))
}

/// Smallest cut with `β(K+1)² ≥ c²/2`, at least 256.
///
/// The analytic tail beyond the cut is added entrywise and so loses the
/// sign cancellation of the explicit terms; a generous cut keeps it
/// negligible.
fn n2_cut_for(p: &SymbolParams) -> usize {
    let half = (p.c2() * 0.5).hi();
    let mut k = 256;
    while p.beta(k + 1).sqr().lo() < half {
        k += 1;
    }
    k
}

/// `(𝒵_u, 𝒵_{u,1}, 𝒵_{u,2})` for the unbounded-domain correction.
pub fn zu_bound(
    vn: &CoeffSeq<Interval>,
    p: &SymbolParams,
    norm_bn: Interval,
) -> Result<(Interval, Interval, Interval)> {
    let d1 = vn.d1();
    let ip = v_ve_inner(vn, p)?.clamp_nonneg();
    let zu1_sq = ip * (2.0 * d1);
    let a = inf_a(p)?;
    let cd = c_of_d1(p, d1)?;
    let zu2_sq = zu1_sq + cd * (a * (-2.0 * d1)).exp() * ip;
    let factor = norm_bn.max(Interval::ONE);
    let zu = factor * (zu1_sq + zu2_sq).sqrt_clamped();
    Ok((
        check_finite(zu, "Zu")?,
        zu1_sq.sqrt_clamped(),
        zu2_sq.sqrt_clamped(),
    ))
}

/// `𝒵₁ = Z₁ + 𝒵_u + max(1, ‖B^N‖) κ₁ ‖V − V^N‖₁`.
pub fn z1_total(
    z1: Interval,
    zu: Interval,
    v_tail_l1: Interval,
    norm_bn: Interval,
    p: &SymbolParams,
) -> Interval {
    z1 + zu + norm_bn.max(Interval::ONE) * kappa1(p) * v_tail_l1
}

/// `‖V − V^N‖₁` from the enclosure head and envelope.
pub fn v_tail_l1(enc: &EnclosedSeq, n: IndexBox) -> Interval {
    let head = enc.head.index_box();
    let mut s = Interval::ZERO;
    for (a, b) in head.iter().filter(|&(a, b)| !n.contains(a, b)) {
        s += enc.head.get(a, b).abs() * alpha(a, b) as f64;
    }
    upper((s + enc.tail_l1()).hi())
}

/// `κ₁ max(1, ‖B M_W‖)` with `W = e^Ū` and `B = B^N π^N + π_N`.
///
/// With `W = Wʰ + Wᵗ` split at the box `k`,
/// `‖B M_W‖ ≤ (‖B^N π^N M_{Wʰ}‖² + ‖Wʰ‖₁²)^{1/2} + max(1, ‖B^N‖)‖Wᵗ‖₁`.
pub fn z2_coeff(
    enc: &EnclosedSeq,
    bn: &DMatrix<f64>,
    norm_bn: Interval,
    p: &SymbolParams,
    n: IndexBox,
    k: IndexBox,
) -> Result<Interval> {
    let head = enc.head.index_box();
    let k = k.intersection(&head);
    let wh = enc.head.resized(k);
    let rows = operators::sector_indices(n, Sector::Even);
    let cols = operators::ordered_indices(n, n.minkowski(&k), Sector::Even);
    let m = operators::mult_matrix(&wh, Sector::Even, &rows, &cols);
    let bm = IMat::from_float(bn.clone()).mul(&m);
    let finite = (upper(bm.norm2()).sqr() + wh.norm1().abs().sqr()).sqrt_clamped();
    let mut wt = enc.tail_l1();
    for (a, b) in head.iter().filter(|&(a, b)| !k.contains(a, b)) {
        wt += enc.head.get(a, b).abs() * alpha(a, b) as f64;
    }
    let total = finite + norm_bn.max(Interval::ONE) * wt;
    check_finite(kappa1(p) * total.max(Interval::ONE), "Z2")
}

/// Which inequality blocked a radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailedCondition {
    /// `𝒵₁ < 1` could not be verified.
    Contraction,
    /// `½𝒵₂(r)r² − (1 − 𝒵₁)r + 𝒴₀ < 0` failed at every tested radius.
    Quadratic,
    /// `𝒵₁ + 𝒵₂(r)r < 1` failed where the quadratic condition held.
    Derivative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiiResult {
    pub success: bool,
    pub r_min: Option<Interval>,
    pub r_max: Option<Interval>,
    pub failed_condition: Option<FailedCondition>,
    /// Radius at which the blocking condition was last tested.
    pub blocked_at: Option<f64>,
}

/// Interval values of the two conditions at `r`.
pub fn conditions(b: &BoundSet, r: f64) -> (Interval, Interval) {
    let r = Interval::point(r);
    let growth = (b.kappa2 * r).exp_m1();
    let quad = b.z2_coeff * growth * r * 0.5 - (Interval::ONE - b.z1) * r + b.y0;
    let deriv = b.z1 + b.z2_coeff * growth;
    (quad, deriv)
}

fn verified(b: &BoundSet, r: f64) -> (bool, bool) {
    let (q, d) = conditions(b, r);
    (q.hi() < 0.0, d.hi() < 1.0)
}

const BISECT_STEPS: usize = 21;

/// Smallest and largest dyadic radii in `[𝒴₀, 1]` that verify both
/// conditions, refined by bisection to relative accuracy `2⁻²⁰`.
pub fn radii_check(b: &BoundSet) -> RadiiResult {
    let fail = |c, at| RadiiResult {
        success: false,
        r_min: None,
        r_max: None,
        failed_condition: Some(c),
        blocked_at: at,
    };
    if !(b.z1.hi() < 1.0) {
        return fail(FailedCondition::Contraction, None);
    }
    let start = b.y0.hi().max(f64::MIN_POSITIVE * 1e10);
    let mut r = start;
    let mut prev = None;
    let mut found = None;
    let mut last_block = FailedCondition::Quadratic;
    while r <= 1.0 {
        match verified(b, r) {
            (true, true) => {
                found = Some(r);
                break;
            }
            (true, false) => last_block = FailedCondition::Derivative,
            _ => {}
        }
        prev = Some(r);
        r *= 2.0;
    }
    let Some(hi) = found else {
        return fail(last_block, Some(prev.unwrap_or(start)));
    };
    // bisect down towards the left end of the feasible set
    let mut r_min = hi;
    if let Some(mut lo) = prev {
        let mut up = hi;
        for _ in 0..BISECT_STEPS {
            let mid = 0.5 * (lo + up);
            if verified(b, mid) == (true, true) {
                up = mid;
            } else {
                lo = mid;
            }
        }
        r_min = up;
    }
    // scan up for the right end
    let mut good = hi;
    let mut next = hi * 2.0;
    while next <= 1.0 && verified(b, next) == (true, true) {
        good = next;
        next *= 2.0;
    }
    let mut r_max = good;
    if next <= 1.0 {
        let (mut lo, mut up) = (good, next);
        for _ in 0..BISECT_STEPS {
            let mid = 0.5 * (lo + up);
            if verified(b, mid) == (true, true) {
                lo = mid;
            } else {
                up = mid;
            }
        }
        r_max = lo;
    }
    RadiiResult {
        success: true,
        r_min: Some(Interval::point(r_min)),
        r_max: Some(Interval::point(r_max)),
        failed_condition: None,
        blocked_at: None,
    }
}

/// Inputs of [`compute_bounds`].
pub struct BoundInputs<'a> {
    pub ubar: &'a CoeffSeq<Interval>,
    pub bn: &'a DMatrix<f64>,
    pub enc: &'a EnclosedSeq,
    pub params: &'a SymbolParams,
    pub n: IndexBox,
    /// Box of the finite part of `M_{e^Ū}` in the `Z₂` bound.
    pub z2_box: IndexBox,
    pub kappa2: Interval,
}

pub fn compute_bounds(inp: &BoundInputs) -> Result<BoundSet> {
    let BoundInputs {
        ubar,
        bn,
        enc,
        params: p,
        n,
        z2_box,
        kappa2,
    } = *inp;
    let nb = norm_bn(bn);
    let y0 = y0_bound(ubar, bn, enc, p, n)?;
    let v = enc.v_head();
    let vn = v.resized(n);
    let (z1_n, z1_periodic) = z1n_bound(&v, bn, p, n)?;
    let (zu, zu1, zu2) = zu_bound(&vn, p, nb)?;
    let tail = v_tail_l1(enc, n);
    let z1 = z1_total(z1_periodic, zu, tail, nb, p);
    let z2 = z2_coeff(enc, bn, nb, p, n, z2_box)?;
    Ok(BoundSet {
        y0,
        z1,
        z2_coeff: z2,
        kappa2,
        norm_bn: nb,
        parts: BoundParts {
            z1_n,
            z1_periodic,
            zu,
            zu1,
            zu2,
            v_tail_l1: tail,
            v_n_l1: vn.norm1().abs(),
            min_l_outside: min_l_outside(p, ubar.d1(), n),
            kappa1: kappa1(p),
            amplitude_c: enc.c,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aliasing::{rigorous_exp, AnalyticityParams};

    fn params() -> SymbolParams {
        SymbolParams::new(Interval::parse_decimal("1.2").unwrap(), 6.0).unwrap()
    }

    fn set(y0: f64, z1: f64, z2: f64, k2: f64) -> BoundSet {
        BoundSet {
            y0: Interval::point(y0),
            z1: Interval::point(z1),
            z2_coeff: Interval::point(z2),
            kappa2: Interval::point(k2),
            norm_bn: Interval::ONE,
            parts: BoundParts::default(),
        }
    }

    #[test]
    fn zero_wave_has_zero_residual_bounds() {
        let p = params();
        let n = IndexBox::new(4, 3);
        let u = CoeffSeq::<Interval>::zeros(IndexBox::new(6, 4), 10.0, 6.0);
        let apar = AnalyticityParams::new((1.1, 1.1), (256, 256)).unwrap();
        let enc = rigorous_exp(&u, &apar, IndexBox::new(8, 6)).unwrap();
        let bn = DMatrix::identity(n.len(), n.len());
        let b = compute_bounds(&BoundInputs {
            ubar: &u,
            bn: &bn,
            enc: &enc,
            params: &p,
            n,
            z2_box: IndexBox::new(6, 4),
            kappa2: Interval::ONE,
        })
        .unwrap();
        assert!(b.y0.hi() < 1e-10, "{:?}", b.y0);
        assert!(b.z1.hi() < 1e-6, "{:#?}", b);
        let r = radii_check(&b);
        assert!(r.success);
    }

    #[test]
    fn contraction_failure_is_reported() {
        let r = radii_check(&set(1e-6, 1.0, 1.0, 1.0));
        assert_eq!(r.failed_condition, Some(FailedCondition::Contraction));
    }

    #[test]
    fn radius_brackets_linear_estimate() {
        let b = set(6.0005e-8, 0.36608, 22.7926, 3.0);
        let r = radii_check(&b);
        assert!(r.success);
        let rmin = r.r_min.unwrap().hi();
        let lin = 6.0005e-8 / (1.0 - 0.36608);
        assert!(rmin >= lin && rmin < lin * 1.001, "{rmin} vs {lin}");
        let (q, d) = conditions(&b, rmin);
        assert!(q.hi() < 0.0 && d.hi() < 1.0);
        assert!(r.r_max.unwrap().hi() > rmin);
    }

    #[test]
    fn inner_product_matches_direct_sum() {
        let p = params();
        let v = CoeffSeq::from_fn(IndexBox::new(3, 2), 10.0, 6.0, |a, b| {
            Interval::point(0.1 / (1.0 + (a + b) as f64))
        });
        let ip = v_ve_inner(&v, &p).unwrap();
        let e = e_collapsed(&p, 6, 10.0, n2_cut_for(&p)).unwrap();
        let mut s = Interval::ZERO;
        for (a, b) in v.index_box().iter() {
            let mut conv = Interval::ZERO;
            for m1 in -3i64..=3 {
                for m2 in -2i64..=2 {
                    let k1 = a as i64 - m1;
                    if m2 == b as i64 {
                        conv += v.get_signed(m1, m2) * e.get_signed(k1, 0);
                    }
                }
            }
            s += v.get(a, b) * conv * alpha(a, b) as f64;
        }
        assert!(ip.overlaps(s), "{ip:?} vs {s:?}");
    }
}
