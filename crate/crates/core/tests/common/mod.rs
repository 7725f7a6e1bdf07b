//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use bridgewave::{CoeffSeq, IndexBox};
use rand::Rng;

/// Arbitrary-precision reference values.
pub mod hp {
    use astro_float::{BigFloat, Consts, RoundingMode};
    use bridgewave::Interval;

    /// About 96 decimal digits.
    pub const P: usize = 320;
    const RM: RoundingMode = RoundingMode::ToEven;

    pub fn contains(iv: Interval, v: &BigFloat) -> bool {
        !v.is_nan() && BigFloat::from_f64(iv.lo(), P) <= *v && *v <= BigFloat::from_f64(iv.hi(), P)
    }

    pub struct Hp {
        cc: Consts,
    }

    impl Default for Hp {
        fn default() -> Self {
            Hp {
                cc: Consts::new().expect("constants cache"),
            }
        }
    }

    impl Hp {
        pub fn num(&self, x: f64) -> BigFloat {
            BigFloat::from_f64(x, P)
        }

        pub fn pi(&mut self) -> BigFloat {
            self.cc.pi(P, RM)
        }

        pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
            a.add(b, P, RM)
        }

        pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
            a.mul(b, P, RM)
        }

        pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
            a.div(b, P, RM)
        }

        pub fn exp(&mut self, x: f64) -> BigFloat {
            self.num(x).exp(P, RM, &mut self.cc)
        }

        pub fn ln(&mut self, x: f64) -> BigFloat {
            self.num(x).ln(P, RM, &mut self.cc)
        }

        pub fn sin(&mut self, x: f64) -> BigFloat {
            self.num(x).sin(P, RM, &mut self.cc)
        }

        pub fn cos(&mut self, x: f64) -> BigFloat {
            self.num(x).cos(P, RM, &mut self.cc)
        }

        pub fn cosh(&mut self, x: f64) -> BigFloat {
            self.num(x).cosh(P, RM, &mut self.cc)
        }

        pub fn sqrt(&self, x: f64) -> BigFloat {
            self.num(x).sqrt(P, RM)
        }

        pub fn exp_m1(&mut self, x: f64) -> BigFloat {
            let e = self.exp(x);
            e.sub(&BigFloat::from_f64(1.0, P), P, RM)
        }

        /// Nearest `f64`, via the decimal representation.
        pub fn to_f64(&mut self, v: &BigFloat) -> f64 {
            let s = v
                .format(astro_float::Radix::Dec, RM, &mut self.cc)
                .expect("format");
            s.parse().expect("decimal")
        }
    }
}

/// Exact rational arithmetic on binary64 inputs.
pub mod exact {
    use bridgewave::Interval;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};

    pub fn q(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite")
    }

    pub fn zero() -> BigRational {
        BigRational::zero()
    }

    pub fn int(k: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(k))
    }

    /// `|x − r|` exactly.
    pub fn abs_err(x: f64, r: &BigRational) -> BigRational {
        (q(x) - r).abs()
    }

    pub fn contains(iv: Interval, v: &BigRational) -> bool {
        let lo_ok = iv.lo() == f64::NEG_INFINITY || q(iv.lo()) <= *v;
        let hi_ok = iv.hi() == f64::INFINITY || *v <= q(iv.hi());
        lo_ok && hi_ok
    }
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature.
pub mod quad {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];

    /// `(K15, |K15 − G7|)` on `[a, b]`.
    pub fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for j in 0..7 {
            let (f1, f2) = (f(c - h * XK[j]), f(c + h * XK[j]));
            k += WK[j] * (f1 + f2);
            if j % 2 == 1 {
                g += WG[j / 2] * (f1 + f2);
            }
        }
        (k * h, ((k - g) * h).abs())
    }

    /// Integral and accumulated error estimate; intervals are bisected
    /// until each local estimate is below its share of `tol`.
    pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
        let total = b - a;
        let mut stack = vec![(a, b, 0u32)];
        let (mut value, mut err) = (0.0, 0.0);
        while let Some((lo, hi, depth)) = stack.pop() {
            let (v, e) = gk15(f, lo, hi);
            if e <= tol * (hi - lo) / total || depth >= 40 {
                value += v;
                err += e;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        (value, err)
    }
}

/// `l_{n₂}(ξ)` in binary64.
pub fn l_n2(c: f64, d2: f64, n2: usize, xi: f64) -> f64 {
    let w = (2.0 * std::f64::consts::PI * xi).powi(2);
    let b = (std::f64::consts::PI * n2 as f64 / d2).powi(2);
    (w + b).powi(2) - c * c * w + 1.0
}

/// Point beyond which `l_{n₂}(ξ) ≥ (2πξ)⁴/2`.
fn quartic_cut(c: f64) -> f64 {
    (2.0 * c * c).sqrt() / (2.0 * std::f64::consts::PI)
}

/// `f_{n₂}(x) = ∫ e^{2πiξx}/l_{n₂}(ξ) dξ` and an error budget covering
/// quadrature and the truncated tail.
pub fn f_n2(c: f64, d2: f64, n2: usize, x: f64) -> (f64, f64) {
    let cut = 80.0f64;
    assert!(cut > quartic_cut(c));
    let two_pi = 2.0 * std::f64::consts::PI;
    let g = |xi: f64| (two_pi * xi * x).cos() / l_n2(c, d2, n2, xi);
    let (mut v, mut e) = (0.0, 0.0);
    let pieces = 160;
    for k in 0..pieces {
        let a = cut * k as f64 / pieces as f64;
        let b = cut * (k + 1) as f64 / pieces as f64;
        let (pv, pe) = quad::integrate(&g, a, b, 1e-13);
        v += pv;
        e += pe;
    }
    // ∫_cut^∞ 2/(2πξ)⁴ dξ on each half-line
    let tail = 2.0 * 2.0 / (3.0 * two_pi.powi(4) * cut.powi(3));
    (2.0 * v, 2.0 * e + tail + 1e-15 * v.abs())
}

/// `‖1/l_{n₂}‖²_{L²(ℝ)}` by quadrature, with its error budget.
pub fn inv_l_norm_sq(c: f64, d2: f64, n2: usize) -> (f64, f64) {
    let cut = 20.0f64;
    assert!(cut > quartic_cut(c));
    let g = |xi: f64| l_n2(c, d2, n2, xi).powi(-2);
    let (mut v, mut e) = (0.0, 0.0);
    for k in 0..40 {
        let (a, b) = (cut * k as f64 / 40.0, cut * (k + 1) as f64 / 40.0);
        let (pv, pe) = quad::integrate(&g, a, b, 1e-14);
        v += pv;
        e += pe;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let tail = 4.0 / (7.0 * two_pi.powi(8) * cut.powi(7));
    (2.0 * v, 2.0 * (e + tail) + 1e-14 * v)
}

/// Random coefficients on `bx` with geometric decay, scaled to the given
/// α-weighted ℓ¹ norm.
pub fn random_seq<R: Rng>(rng: &mut R, bx: IndexBox, d1: f64, d2: f64, l1: f64) -> CoeffSeq<f64> {
    let decay: f64 = rng.gen_range(0.3..0.9);
    let data = bx
        .iter()
        .map(|(a, b)| rng.gen_range(-1.0..1.0) * decay.powi((a + b) as i32))
        .collect();
    let u = CoeffSeq::from_vec(bx, d1, d2, data).expect("box-sized data");
    let n = u.norm1();
    if n == 0.0 {
        return u;
    }
    u.scale(l1 / n)
}

/// Random box with at most `(m1, m2)`.
pub fn random_box<R: Rng>(rng: &mut R, m1: usize, m2: usize) -> IndexBox {
    IndexBox::new(rng.gen_range(0..=m1), rng.gen_range(0..=m2))
}

/// Reflected convolution by the defining sum over `ℤ²`, in exact rationals.
pub fn convolution_exact(
    u: &CoeffSeq<f64>,
    v: &CoeffSeq<f64>,
    out: IndexBox,
) -> Vec<num_rational::BigRational> {
    // terms with m outside the support of u vanish
    let bu = u.index_box();
    let (r1, r2) = (bu.n1 as i64, bu.n2 as i64);
    out.iter()
        .map(|(n1, n2)| {
            let mut acc = exact::zero();
            for m1 in -r1..=r1 {
                for m2 in -r2..=r2 {
                    let a = u.get_signed(m1, m2);
                    let b = v.get_signed(n1 as i64 - m1, n2 as i64 - m2);
                    if a != 0.0 && b != 0.0 {
                        acc += exact::q(a) * exact::q(b);
                    }
                }
            }
            acc
        })
        .collect()
}

/// `θ₀ = |Ω₀| Σ_{m∈ℤ²} (U + 2cW)_{|m|} · (−(πm₁/d₁)²) U_{|m|}` at high
/// precision, summing every signed index.
pub fn theta0_reference(u: &CoeffSeq<f64>, w: &CoeffSeq<f64>, c: f64) -> f64 {
    let mut h = hp::Hp::default();
    let pi = h.pi();
    let d1 = h.num(u.d1());
    let w1 = h.div(&pi, &d1);
    let two_c = h.num(2.0 * c);
    let bx = u.index_box().union(&w.index_box());
    let mut acc = h.num(0.0);
    for m1 in -(bx.n1 as i64)..=bx.n1 as i64 {
        for m2 in -(bx.n2 as i64)..=bx.n2 as i64 {
            let uu = h.num(u.get_signed(m1, m2));
            let ww = h.num(w.get_signed(m1, m2));
            let s = h.add(&uu, &h.mul(&two_c, &ww));
            let k = h.mul(&w1, &h.num(m1 as f64));
            let d = h.mul(&h.mul(&k, &k), &uu);
            acc = acc.sub(&h.mul(&s, &d), hp::P, astro_float::RoundingMode::ToEven);
        }
    }
    let area = h.mul(&h.num(4.0 * u.d1()), &h.num(u.d2()));
    let v = h.mul(&area, &acc);
    h.to_f64(&v)
}

/// Compares the FFT enclosure of `e^U` with the power series: entrywise the
/// interval results must intersect, and the float series must lie inside the
/// FFT enclosure.
pub fn exp_cross_check(u: &CoeffSeq<f64>, nfft: usize, nu: f64) -> Result<(), String> {
    use bridgewave::aliasing::{rigorous_exp, AnalyticityParams};
    let ui = u.to_interval();
    let apar = AnalyticityParams::new((nu, nu), (nfft, nfft)).map_err(|e| e.to_string())?;
    let head = u.index_box().scaled(2);
    let enc = rigorous_exp(&ui, &apar, head).map_err(|e| e.to_string())?;
    let series_iv = ui.seq_exp(1e-15).map_err(|e| e.to_string())?;
    let series = u.seq_exp(1e-15).map_err(|e| e.to_string())?;
    for (a, b) in head.iter() {
        let fft = enc.head.get(a, b);
        let (si, sf) = (series_iv.seq.get(a, b), series.seq.get(a, b));
        let si = if series_iv.seq.index_box().contains(a, b) {
            si
        } else {
            bridgewave::Interval::symmetric(series_iv.tail_l1)
        };
        if !fft.overlaps(si) {
            return Err(format!("({a},{b}): fft {fft} and series {si} are disjoint"));
        }
        if !fft.contains(sf) {
            return Err(format!("({a},{b}): series value {sf:e} outside fft {fft}"));
        }
    }
    Ok(())
}

/// Expected verdict from the negative count `n` and the sign of `θ`
/// (`0` meaning undetermined): with `p = 1` for `θ > 0` and `0` for `θ < 0`,
/// `n = 0` or `n − p = 0` is stable and odd `n − p` is unstable.
pub fn expected_verdict(n: usize, theta_sign: i32) -> bridgewave::stability::Verdict {
    use bridgewave::stability::Verdict;
    if n == 0 {
        return Verdict::Stable;
    }
    let p = match theta_sign {
        1 => 1,
        -1 => 0,
        _ => return Verdict::Inconclusive,
    };
    match n - p {
        0 => Verdict::Stable,
        k if k % 2 == 1 => Verdict::Unstable,
        _ => Verdict::Inconclusive,
    }
}

/// `θ` interval with the given sign.
pub fn theta_with_sign(sign: i32) -> bridgewave::Interval {
    use bridgewave::Interval;
    match sign {
        1 => Interval::new(0.5, 2.0).unwrap(),
        -1 => Interval::new(-2.0, -0.5).unwrap(),
        _ => Interval::new(-0.1, 0.3).unwrap(),
    }
}

/// Checks every `(n, sign θ)` cell for `n ∈ 0..5`; returns the mismatches.
pub fn classify_mismatches() -> Vec<String> {
    use bridgewave::stability::classify;
    let mut bad = Vec::new();
    for n in 0..5 {
        for sign in [-1, 0, 1] {
            let got = classify(Some(n), false, theta_with_sign(sign)).verdict;
            let want = expected_verdict(n, sign);
            if got != want {
                bad.push(format!("n={n} sign={sign}: {got:?} != {want:?}"));
            }
        }
    }
    bad
}

/// A random pair `(Ū, W̄)` for the θ checks.
pub fn theta_fixture<R: Rng>(rng: &mut R) -> (CoeffSeq<f64>, CoeffSeq<f64>) {
    let d1 = rng.gen_range(6.0..16.0);
    let d2 = std::f64::consts::PI / 0.24;
    let draw = |rng: &mut R| {
        let bx = IndexBox::new(rng.gen_range(2..10), rng.gen_range(0..4));
        let l1 = rng.gen_range(0.1..2.0);
        random_seq(rng, bx, d1, d2, l1)
    };
    let u = draw(rng);
    let w = draw(rng);
    (u, w)
}

/// `|θ₀ − reference| ≤ tol·max(1, |reference|)`, and the enclosure must
/// contain the reference up to its final rounding.
pub fn theta0_check(u: &CoeffSeq<f64>, w: &CoeffSeq<f64>, c: f64, tol: f64) -> Result<(), String> {
    use bridgewave::Interval;
    let reference = theta0_reference(u, w, c);
    let wi = w.resized(u.index_box().union(&w.index_box()));
    let t = bridgewave::stability::theta0(
        &u.resized(wi.index_box()).to_interval(),
        &wi.to_interval(),
        Interval::point(c),
    );
    let scale = reference.abs().max(1.0);
    let slack = reference.abs() * f64::EPSILON;
    if (t.mid() - reference).abs() > tol * scale {
        return Err(format!("θ₀ {t} vs reference {reference:e}"));
    }
    if !(t.lo() - slack <= reference && reference <= t.hi() + slack) {
        return Err(format!("θ₀ enclosure {t} misses {reference:e}"));
    }
    Ok(())
}

/// Upper bounds of `ε` at increasing `r₀`; fails unless nondecreasing.
pub fn eps_scan(u: &CoeffSeq<f64>, w: &CoeffSeq<f64>, r0s: &[f64]) -> Result<Vec<f64>, String> {
    use bridgewave::aliasing::{rigorous_exp, AnalyticityParams};
    use bridgewave::stability::{theta_enclosure, ThetaInputs};
    use bridgewave::symbols::SymbolParams;
    use bridgewave::Interval;
    let p = SymbolParams::new(Interval::parse_decimal("1.2").unwrap(), u.d2())
        .map_err(|e| e.to_string())?;
    let ui = u.to_interval();
    let apar = AnalyticityParams::new((1.1, 1.1), (64, 32)).map_err(|e| e.to_string())?;
    let enc = rigorous_exp(&ui, &apar, u.index_box().scaled(2)).map_err(|e| e.to_string())?;
    let wi = w.to_interval();
    let mut out = Vec::new();
    for &r0 in r0s {
        let inp = ThetaInputs {
            ubar: &ui,
            wbar: &wi,
            enc: &enc,
            r0: Interval::point(r0),
            inv_norm: Interval::point(3.0),
            kappa2: Interval::point(2.0),
            params: &p,
        };
        let th = theta_enclosure(&inp).map_err(|e| e.to_string())?;
        if let Some(&prev) = out.last() {
            if th.eps.hi() < prev {
                return Err(format!(
                    "ε dropped to {:e} at r₀ = {r0:e} from {prev:e}",
                    th.eps.hi()
                ));
            }
        }
        if !th.theta.contains(th.theta0.mid()) {
            return Err(format!("θ {} does not contain θ₀", th.theta));
        }
        out.push(th.eps.hi());
    }
    Ok(out)
}

/// With `V̄ = 0` and `r₀ = 0` no eigenvalue enters the window in either
/// sector and the verdict is stable.
pub fn unperturbed_check(c: &str, d1: f64, n: IndexBox) -> Result<(), String> {
    use bridgewave::aliasing::{rigorous_exp, AnalyticityParams};
    use bridgewave::approximation::build_p;
    use bridgewave::operators::Sector;
    use bridgewave::stability::*;
    use bridgewave::symbols::SymbolParams;
    use bridgewave::Interval;
    let e = |x: bridgewave::Error| x.to_string();
    let p = SymbolParams::new(
        Interval::parse_decimal(c).map_err(e)?,
        std::f64::consts::PI / 0.24,
    )
    .map_err(e)?;
    let u = CoeffSeq::<Interval>::zeros(n, d1, p.d2);
    let apar = AnalyticityParams::new((1.1, 1.1), (64, 64)).map_err(e)?;
    let enc = rigorous_exp(&u, &apar, n.scaled(2)).map_err(e)?;
    let lam = lambda_min_bound(&enc, Interval::point(2.0), Interval::ZERO, &p);
    let window = SpectralWindow::with_defaults(lam.lo(), None, &p).map_err(e)?;
    let v = u.clone();
    let inp = SpectralInputs {
        v: &v,
        v_tail_l1: Interval::ZERO,
        exp_norm1: Interval::ONE,
        kappa2: Interval::point(2.0),
        r0: Interval::ZERO,
        n,
        params: &p,
    };
    let mut sets = Vec::new();
    for sector in [Sector::Even, Sector::Odd] {
        let basis = build_p(&v.mid(), &p, n, sector).map_err(e)?;
        let gs = gershgorin_enclosure(&inp, &basis, &window).map_err(e)?;
        if let Some(x) = gs
            .intervals()
            .into_iter()
            .find(|x| x.lo() <= window.delta0.hi())
        {
            return Err(format!("{sector:?} interval {x} reaches the window"));
        }
        sets.push(gs);
    }
    let count = count_negative(&sets[0], &sets[1]);
    if count.n_negative != Some(0) {
        return Err(format!("count {count:?}"));
    }
    let v = classify(count.n_negative, count.zero_mode, Interval::symmetric(1.0));
    if v.verdict != Verdict::Stable {
        return Err(format!("verdict {:?}", v.verdict));
    }
    Ok(())
}
