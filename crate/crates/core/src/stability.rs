//! Spectral enclosure of the linearization around a certified wave and the
//! orbital-stability verdict.
//!
//! Eigenvalues below `δ₀` are trapped in intervals `[λₙ − εₙ, λₙ + εₙ]`
//! around the diagonal of `P⁻¹ DF(Ū) P`, where `P` is an approximate
//! eigenbasis of the finite block. Each `x₁`-symmetry sector is handled on
//! its own. The sign of `θ` is enclosed separately and the pair is fed
//! through the classification table.
//!
//! All function norms use the same normalization as the existence radius:
//! `‖u‖ = √(2d₁) ‖U‖₂`.

use crate::aliasing::EnclosedSeq;
use crate::approximation::{self, Eigenbasis};
use crate::bounds::v_ve_inner;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::IMat;
use crate::operators::{self, Sector};
use crate::sequences::{alpha, CoeffSeq, IndexBox};
use crate::symbols::{c_of_d1, inf_a, kappa1, min_l_outside, omega, SymbolParams};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// `1 − c⁴/4`, the bottom of the essential spectrum.
pub fn essential_spectrum_floor(p: &SymbolParams) -> Interval {
    Interval::ONE - p.c.powi(4) * 0.25
}

/// `λ_min = −e^{κ₂r₀}‖e^Ū‖₁ − c⁴/4`, a lower bound for every eigenvalue.
pub fn lambda_min_bound(
    enc: &EnclosedSeq,
    kappa2: Interval,
    r0: Interval,
    p: &SymbolParams,
) -> Interval {
    let w = Interval::point(enc.norm1().hi());
    -((kappa2 * r0).exp() * w) - p.c.powi(4) * 0.25
}

/// The search window `𝒥 = [λ_min, δ₀]` and the shift `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub lambda_min: Interval,
    pub delta0: Interval,
    pub t: Interval,
}

impl SpectralWindow {
    pub fn new(lambda_min: f64, delta0: f64, t: f64, p: &SymbolParams) -> Result<SpectralWindow> {
        let floor = essential_spectrum_floor(p);
        if !(delta0 > 0.0) || !(delta0 < floor.lo()) {
            return Err(Error::InvalidParams(format!(
                "delta0 = {delta0} must lie in (0, {})",
                floor.lo()
            )));
        }
        if !(lambda_min < delta0) {
            return Err(Error::InvalidParams(format!(
                "lambda_min = {lambda_min} must be below delta0"
            )));
        }
        if !(t > -lambda_min) {
            return Err(Error::InvalidParams(format!(
                "shift t = {t} must exceed {}",
                -lambda_min
            )));
        }
        Ok(SpectralWindow {
            lambda_min: Interval::point(lambda_min),
            delta0: Interval::point(delta0),
            t: Interval::point(t),
        })
    }

    /// `δ₀ = fraction · (1 − c⁴/4)` and `t = 1 + |λ_min|`.
    pub fn with_defaults(
        lambda_min: f64,
        delta0_fraction: Option<f64>,
        p: &SymbolParams,
    ) -> Result<SpectralWindow> {
        let frac = delta0_fraction.unwrap_or(0.9);
        if !(frac > 0.0 && frac < 1.0) {
            return Err(Error::InvalidParams(format!(
                "delta0 fraction {frac} must lie in (0, 1)"
            )));
        }
        let delta0 = essential_spectrum_floor(p).lo() * frac;
        SpectralWindow::new(lambda_min, delta0, 1.0 + lambda_min.abs(), p)
    }
}

/// Everything the sector enclosure needs besides the eigenbasis.
pub struct SpectralInputs<'a> {
    /// `V̄ = e^Ū − e₀` on the head box of the enclosure.
    pub v: &'a CoeffSeq<Interval>,
    /// `‖V̄ − V̄^N‖₁`.
    pub v_tail_l1: Interval,
    /// Upper bound of `‖e^Ū‖₁`.
    pub exp_norm1: Interval,
    pub kappa2: Interval,
    pub r0: Interval,
    pub n: IndexBox,
    pub params: &'a SymbolParams,
}

/// The constants entering the enclosure radii.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GershgorinConstants {
    pub z11: Interval,
    pub z12: Interval,
    pub z13: Interval,
    pub z14: Interval,
    pub zu1: Interval,
    pub zu2: Interval,
    pub zu3: Interval,
    pub c1_r0: Interval,
    pub c2_r0: Interval,
    pub beta1: Interval,
    pub beta2: Interval,
    pub norm_p: Interval,
    /// `‖π^N(S + t)⁻¹P⁻¹(L − δ₀)‖₂`.
    pub norm_g: Interval,
    /// Sup-norm bound of the multiplier discarded from the finite model.
    pub perturbation: Interval,
    /// `εₙ / |λₙ + t|` for the two radius formulas.
    pub k_q: Interval,
    pub k_inf: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GershgorinSet {
    pub sector: Sector,
    pub window: SpectralWindow,
    /// `λₙ`, ascending.
    pub centers: Vec<Interval>,
    pub radii: Vec<Interval>,
    /// Lower bound of `l(ñ)` for `n` outside the finite block.
    pub tail_floor: Interval,
    /// Whether the intervals of all indices outside the block lie right of `δ₀`.
    pub tail_clear: bool,
    pub constants: GershgorinConstants,
}

impl GershgorinSet {
    pub fn intervals(&self) -> Vec<Interval> {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(&c, &r)| Interval::spanning((c - r).lo(), (c + r).hi()))
            .collect()
    }
}

/// `P⁻¹` enclosed from `Q = Pᵀ`: with `E = I − QP`, `‖P⁻¹ − Q‖₂ ≤ ‖E‖‖Q‖/(1 − ‖E‖)`,
/// which also bounds every entry of the difference.
pub fn inverse_enclosure(p: &DMatrix<f64>) -> Result<IMat> {
    let n = p.nrows();
    let q = p.transpose();
    let e = IMat::identity(n).sub(&IMat::from_float(q.clone()).mul(&IMat::from_float(p.clone())));
    let delta = e.norm2();
    if !(delta < 0.5) {
        return Err(Error::EigSolverFailure(format!(
            "eigenbasis too far from orthogonal: {delta:e}"
        )));
    }
    let nq = IMat::from_float(q.clone()).norm2();
    let rho = (Interval::point(delta) / (Interval::ONE - delta) * nq).hi();
    Ok(IMat {
        mid: q,
        rad: DMatrix::from_element(n, n, rho),
    })
}

fn upper(x: f64) -> Interval {
    Interval::new(0.0, x).unwrap_or(Interval::ENTIRE)
}

/// `(𝒵_{u,1}, 𝒵_{u,2})` for the shifted symbol, as square roots of
/// `4d₁(V, V∗E)` and `4d₁(V, V∗E) + 2C(d₁)e^{−2ad₁}(V, V∗E)`.
pub fn zu_stability(
    vn: &CoeffSeq<Interval>,
    shifted: &SymbolParams,
) -> Result<(Interval, Interval)> {
    let d1 = vn.d1();
    let ip = v_ve_inner(vn, shifted)?.clamp_nonneg();
    let z1 = ip * (4.0 * d1);
    let a = inf_a(shifted)?;
    let z2 = z1 + c_of_d1(shifted, d1)? * (a * (-2.0 * d1)).exp() * ip * 2.0;
    Ok((z1.sqrt_clamped(), z2.sqrt_clamped()))
}

/// Enclosure intervals for one sector.
pub fn gershgorin_enclosure(
    inp: &SpectralInputs,
    basis: &Eigenbasis,
    window: &SpectralWindow,
) -> Result<GershgorinSet> {
    let p = inp.params;
    let sector = basis.sector;
    let n = inp.n;
    let d1 = inp.v.d1();
    let idx = &basis.indices;
    if idx.len() != basis.p.nrows() || *idx != operators::sector_indices(n, sector) {
        return Err(Error::ShapeMismatch(
            "eigenbasis does not match the block".into(),
        ));
    }
    let floor = essential_spectrum_floor(p);
    let delta0 = window.delta0;
    let t = window.t;
    let gap = floor - delta0;
    if !gap.is_positive() {
        return Err(Error::HypothesisFailed(
            "delta0 must lie below the essential spectrum".into(),
        ));
    }
    let vn = inp.v.resized(n);
    let shifted = p.shifted(delta0)?;

    let pm = IMat::from_float(basis.p.clone());
    let pinv = inverse_enclosure(&basis.p)?;
    let l = operators::l_values(p, d1, idx);
    let mut h = operators::mult_matrix(&vn, sector, idx, idx);
    for (k, lk) in l.iter().enumerate() {
        h.set(k, k, h.get(k, k) + *lk);
    }
    let d = pinv.mul(&h.mul(&pm));
    let dim = idx.len();
    let centers: Vec<Interval> = (0..dim).map(|k| Interval::point(d.mid[(k, k)])).collect();
    let mut r = d;
    for k in 0..dim {
        r.mid[(k, k)] = 0.0;
    }
    let st_inv: Vec<Interval> = centers
        .iter()
        .map(|&lam| {
            let s = lam + t;
            if s.is_positive() {
                Ok(s.recip())
            } else {
                Err(Error::HypothesisFailed(format!(
                    "lambda + t = {s} is not positive"
                )))
            }
        })
        .collect::<Result<_>>()?;

    let all = operators::ordered_indices(n, n.scaled(2), sector);
    let outer = &all[dim..];
    let z13 = upper(r.scale_rows_cols(Some(&st_inv), None).norm2());
    let pinv_s = pinv.scale_rows_cols(Some(&st_inv), None);
    let m_out = operators::mult_matrix(&vn, sector, idx, outer);
    let z14 = upper(pinv_s.mul(&m_out).norm2());
    let l_out_shift: Vec<Interval> = operators::l_values(p, d1, outer)
        .into_iter()
        .map(|x| (x - delta0).recip())
        .collect();
    let a = m_out.transpose().scale_rows_cols(Some(&l_out_shift), None);
    let norm_p = upper(pm.norm2());
    let z11 = upper(a.norm2()) * norm_p / gap;
    let tail_floor = min_l_outside(p, d1, n);
    let z12 = vn.norm1().abs() / ((tail_floor - delta0) * gap);
    let l_shift: Vec<Interval> = l.iter().map(|&x| x - delta0).collect();
    let norm_g = upper(pinv_s.scale_rows_cols(None, Some(&l_shift)).norm2());

    let (zu1, zu2) = zu_stability(&vn, &shifted)?;
    let zu3 = norm_g * zu2;
    let perturbation = inp.exp_norm1 * (inp.kappa2 * inp.r0).exp_m1() + inp.v_tail_l1;
    let c1_r0 = perturbation / gap;
    let c2_r0 = perturbation * norm_g / gap;
    if !(c1_r0.hi() < 1.0) {
        return Err(Error::HypothesisFailed(format!(
            "C1 r0 = {c1_r0} is not below 1"
        )));
    }
    let beta1 = (zu1 + c1_r0) / (Interval::ONE - c1_r0);
    let root = (Interval::ONE + beta1.sqr()).sqrt_clamped();
    let den = Interval::ONE - z12 - zu2 - root * c1_r0;
    if !den.is_positive() {
        return Err(Error::HypothesisFailed(format!(
            "beta denominator {den} is not positive"
        )));
    }
    let beta2 = (z11 + (zu2 + root * c1_r0) * norm_p) / den;
    let q_frac = (z11 + zu2 * norm_p) / (Interval::ONE - z12 - zu2);
    let k_q = z13 + z14 * q_frac + zu3 * (norm_p + q_frac);
    let k_inf = z13 + z14 * beta2 + (zu3 + c2_r0 * root) * (norm_p + beta2);
    let k = k_q.max(k_inf);
    let radii: Vec<Interval> = centers.iter().map(|&lam| (lam + t).abs() * k).collect();
    let tail_low = (Interval::ONE - k) * tail_floor - t * k;
    let tail_clear = k.hi() < 1.0 && tail_low.lo() > delta0.hi();
    Ok(GershgorinSet {
        sector,
        window: *window,
        centers,
        radii,
        tail_floor,
        tail_clear,
        constants: GershgorinConstants {
            z11,
            z12,
            z13,
            z14,
            zu1,
            zu2,
            zu3,
            c1_r0,
            c2_r0,
            beta1,
            beta2,
            norm_p,
            norm_g,
            perturbation,
            k_q,
            k_inf,
        },
    })
}

/// Overlap clusters of a sector's intervals: `(hull, member count)`.
fn clusters(gs: &GershgorinSet) -> Vec<(Interval, usize)> {
    let mut iv = gs.intervals();
    iv.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
    let mut out: Vec<(Interval, usize)> = Vec::new();
    for x in iv {
        match out.last_mut() {
            Some((h, k)) if x.lo() <= h.hi() => {
                *h = h.hull(x);
                *k += 1;
            }
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Outcome of counting negative eigenvalues over both sectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCount {
    /// `None` when the enclosures do not separate the spectrum.
    pub n_negative: Option<usize>,
    pub zero_mode: bool,
    pub note: Option<String>,
}

fn count_sector(
    gs: &GershgorinSet,
    n: &mut usize,
    zero_mode: &mut bool,
) -> std::result::Result<(), String> {
    let name = format!("{:?}", gs.sector).to_lowercase();
    if !gs.tail_clear {
        return Err(format!("{name} sector: tail intervals reach the window"));
    }
    let w = &gs.window;
    for (h, k) in clusters(gs) {
        if h.lo() > 0.0 {
            continue;
        }
        if !(h.lo() >= w.lambda_min.hi() && h.hi() < w.delta0.lo()) {
            return Err(format!(
                "{name} sector: cluster {h} is not inside the window"
            ));
        }
        if h.hi() < 0.0 {
            *n += k;
        } else if gs.sector == Sector::Odd && k == 1 && !*zero_mode {
            *zero_mode = true;
        } else {
            return Err(format!("{name} sector: cluster {h} of {k} straddles zero"));
        }
    }
    Ok(())
}

/// Counts negative eigenvalues; an isolated odd interval around zero is the
/// translation eigenvalue and is not counted.
pub fn count_negative(even: &GershgorinSet, odd: &GershgorinSet) -> SpectralCount {
    let mut n = 0;
    let mut zero_mode = false;
    let res = count_sector(even, &mut n, &mut zero_mode)
        .and_then(|_| count_sector(odd, &mut n, &mut zero_mode));
    match res {
        Ok(()) => SpectralCount {
            n_negative: Some(n),
            zero_mode,
            note: None,
        },
        Err(msg) => SpectralCount {
            n_negative: None,
            zero_mode,
            note: Some(msg),
        },
    }
}

/// Upper bound of `‖DF_e(ũ)⁻¹‖₂` from the even-sector enclosure: the
/// spectrum in the window lies in the intervals, the rest is above `δ₀`.
pub fn even_inverse_norm(even: &GershgorinSet) -> Option<Interval> {
    if even.sector != Sector::Even || !even.tail_clear {
        return None;
    }
    let w = &even.window;
    let mut dist = w.delta0.lo();
    for x in even.intervals() {
        if x.lo() >= w.delta0.hi() {
            continue;
        }
        if x.contains_zero() {
            return None;
        }
        dist = dist.min(x.mig());
    }
    (dist > 0.0).then(|| Interval::ONE / Interval::point(dist))
}

/// A narrower window from a first enclosure: every eigenvalue below `δ₀`
/// lies in the union of intervals, so `λ_min` may move up to its left end.
pub fn refined_window(even: &GershgorinSet, odd: &GershgorinSet) -> Option<SpectralWindow> {
    let w = even.window;
    if !even.tail_clear || !odd.tail_clear {
        return None;
    }
    let lo = even
        .intervals()
        .into_iter()
        .chain(odd.intervals())
        .filter(|x| x.lo() < w.delta0.hi())
        .map(|x| x.lo())
        .fold(f64::INFINITY, f64::min);
    let lam = lo.max(w.lambda_min.lo());
    if !(lam > w.lambda_min.lo()) || !lam.is_finite() {
        return None;
    }
    Some(SpectralWindow {
        lambda_min: Interval::point(lam),
        delta0: w.delta0,
        t: Interval::point(1.0 + lam.abs()),
    })
}

/// Approximation of `w̃ = −2c DF(ũ)⁻¹ ∂²ₓ₁ũ`.
#[derive(Clone, Debug)]
pub struct WbarSolution {
    pub w: CoeffSeq<f64>,
    /// `‖∂²ₓ₁Ū + DF(Ū)W/(2c)‖₂` for the unconstrained solve.
    pub raw_defect: f64,
    /// The same for the returned, trace-constrained `W̄`.
    pub defect: f64,
}

fn d11<T: crate::scalar::Scalar>(u: &CoeffSeq<T>) -> CoeffSeq<T> {
    u.map_indexed(|a, _, x| x * T::from_interval(-omega(a, u.d1()).sqr()))
}

fn float_defect(u: &CoeffSeq<f64>, w: &DVector<f64>, j: &DMatrix<f64>, c: f64) -> f64 {
    let du = d11(u);
    let jw = j * w;
    let bx = u.index_box();
    let r = CoeffSeq::from_fn(bx, u.d1(), u.d2(), |a, b| {
        du.get(a, b) + jw[bx.idx(a, b)] / (2.0 * c)
    });
    r.norm2()
}

/// Least squares for `DF(Ū)W = −2c∂²ₓ₁Ū` over the kernel of the trace
/// matrix, in the α-weighted norm, so that `w̄` lies in the domain.
pub fn solve_wbar(u: &CoeffSeq<f64>, p: &SymbolParams) -> Result<WbarSolution> {
    let bx = u.index_box();
    let c = p.c.mid();
    let j = approximation::jacobian(u, p);
    let rhs = DVector::from_iterator(bx.len(), d11(u).data().iter().map(|x| -2.0 * c * x));
    let raw = j
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularBlock("DF(U) for w".into()))?;
    let raw_defect = float_defect(u, &raw, &j, c);
    let k = approximation::pin_matrix(bx);
    let sw = DVector::from_iterator(
        bx.len(),
        bx.iter().map(|(a, b)| (alpha(a, b) as f64).sqrt()),
    );
    let a = DMatrix::from_diagonal(&sw) * &j * &k;
    let b = rhs.component_mul(&sw);
    let svd = a.svd(true, true);
    let z = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::SingularBlock(format!("trace-constrained w: {e}")))?;
    let w = &k * z;
    let defect = float_defect(u, &w, &j, c);
    let w = CoeffSeq::from_vec(bx, u.d1(), u.d2(), w.as_slice().to_vec())?;
    Ok(WbarSolution {
        w,
        raw_defect,
        defect,
    })
}

/// `θ₀ = |Ω₀| (Ū + 2cW̄, ∂²ₓ₁Ū)₂`.
pub fn theta0(u: &CoeffSeq<Interval>, w: &CoeffSeq<Interval>, c: Interval) -> Interval {
    let area = Interval::point(4.0 * u.d1()) * u.d2();
    let s = u.add(&w.scale(c * 2.0));
    area * s.inner(&d11(u))
}

/// Inputs of [`theta_enclosure`].
pub struct ThetaInputs<'a> {
    pub ubar: &'a CoeffSeq<Interval>,
    pub wbar: &'a CoeffSeq<Interval>,
    pub enc: &'a EnclosedSeq,
    pub r0: Interval,
    /// Upper bound of `‖DF_e(ũ)⁻¹‖₂`.
    pub inv_norm: Interval,
    pub kappa2: Interval,
    pub params: &'a SymbolParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEnclosure {
    pub theta0: Interval,
    pub eps0: Interval,
    pub eps: Interval,
    /// `‖∂²ₓ₁ū + DF(ū)w̄/(2c)‖` as a function norm.
    pub defect: Interval,
    pub theta: Interval,
}

/// `θ ∈ [θ₀ − ε, θ₀ + ε]`, reported on the `|Ω₀|` scale of `θ₀`.
pub fn theta_enclosure(inp: &ThetaInputs) -> Result<ThetaEnclosure> {
    let p = inp.params;
    let (u, w, enc) = (inp.ubar, inp.wbar, inp.enc);
    let d1 = u.d1();
    let c = p.c;
    let r0 = inp.r0;
    let s = Interval::point(2.0 * d1).sqrt_clamped();
    let k1 = kappa1(p);
    let d2l = (Interval::point(2.0) - p.c2()).recip();

    // defect ∂²U + (LW + V∗W)/(2c) with V split into head and envelope tail
    let v = enc.v_head();
    let out = v.index_box().minkowski(&w.index_box());
    let vw = v.convolve_into(w, out);
    let du = d11(u);
    let defect_seq = CoeffSeq::from_fn(out, d1, u.d2(), |a, b| {
        let lw = crate::symbols::l_lattice(p, d1, a, b) * w.get(a, b);
        du.get(a, b) + (lw + vw.get(a, b)) / (c * 2.0)
    });
    let w2 = w.norm2_sq().sqrt_clamped();
    let defect_seq_norm = defect_seq.norm2_sq().sqrt_clamped() + enc.tail_l1() * w2 / (c * 2.0);
    let defect = s * defect_seq_norm;

    let growth = (inp.kappa2 * r0).exp_m1();
    let exp_term = growth * s * Interval::point(enc.norm1().hi()) * w2 / (c * 2.0);
    let eps0 = k1 * r0 + c.sqr() * 4.0 * inp.inv_norm * (defect + r0 * d2l + exp_term);
    let uw = u.add(&w.scale(c * 2.0));
    let eps = s * uw.norm2_sq().sqrt_clamped() * d2l * r0
        + eps0 * (s * du.norm2_sq().sqrt_clamped() + r0 * d2l);
    let to_area = Interval::point(2.0 * u.d2());
    let t0 = theta0(u, w, c);
    let eps = upper((eps * to_area).hi());
    Ok(ThetaEnclosure {
        theta0: t0,
        eps0,
        eps,
        defect,
        theta: Interval::spanning((t0 - eps).lo(), (t0 + eps).hi()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub n_negative: Option<usize>,
    pub zero_is_translation_mode: bool,
    pub theta: Interval,
    pub verdict: Verdict,
}

/// The classification table: no negative eigenvalue, or one with `θ > 0`,
/// is stable; `θ > 0` with an even count, or `θ < 0` with an odd count, is
/// unstable; everything else is inconclusive.
pub fn classify(n_negative: Option<usize>, zero_mode: bool, theta: Interval) -> StabilityVerdict {
    let pos = theta.is_positive();
    let neg = theta.is_negative();
    let verdict = match n_negative {
        None => Verdict::Inconclusive,
        Some(0) => Verdict::Stable,
        Some(1) if pos => Verdict::Stable,
        Some(k) if pos && k % 2 == 0 => Verdict::Unstable,
        Some(k) if neg && k % 2 == 1 => Verdict::Unstable,
        Some(_) => Verdict::Inconclusive,
    };
    StabilityVerdict {
        n_negative,
        zero_is_translation_mode: zero_mode,
        theta,
        verdict,
    }
}
