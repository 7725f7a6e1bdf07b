//! The acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use bridgewave::symbols::{decay_constants, inv_l_tail_sum, kappa1, min_l_n2, SymbolParams};
use bridgewave::{CoeffSeq, IndexBox, Interval};
use bridgewave_cli::commands::{cmd_certify, RunOptions};
use bridgewave_cli::Config;
use common::{exact, hp, hp::Hp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn desk_symbols() -> SymbolParams {
    SymbolParams::new(Interval::parse_decimal("1.2").unwrap(), PI / 0.24).unwrap()
}

fn random_interval(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> (Interval, f64) {
    let a = r.gen_range(lo..hi);
    let w = r.gen_range(0.0..1.0) * r.gen_range(0.0..1.0);
    let iv = Interval::new(a, a + w).unwrap();
    let x = (a + r.gen_range(0.0..=1.0) * w).clamp(iv.lo(), iv.hi());
    (iv, x)
}

fn interval_containment() -> Outcome {
    let mut r = rng(1);
    let mut h = Hp::default();
    let mut checks = 0;
    for k in 0..2000 {
        let (a, x) = random_interval(&mut r, -1e3, 1e3);
        let (b, y) = random_interval(&mut r, -1e3, 1e3);
        let (qx, qy) = (exact::q(x), exact::q(y));
        let ring = [
            (a + b, &qx + &qy),
            (a - b, &qx - &qy),
            (a * b, &qx * &qy),
            if b.contains_zero() {
                (a.sqr(), &qx * &qx)
            } else {
                (a / b, &qx / &qy)
            },
        ];
        for (iv, v) in &ring {
            ensure(exact::contains(*iv, v), || {
                format!("ring check failed: {iv} at x={x:e}, y={y:e}")
            })?;
        }
        let (p, z) = random_interval(&mut r, 1e-3, 50.0);
        let (s, t) = (a * Interval::point(0.02), x * 0.02);
        let (iv, v) = match k % 7 {
            0 => (s.exp(), h.exp(t)),
            1 => (s.exp_m1(), h.exp_m1(t)),
            2 => (s.cosh(), h.cosh(t)),
            3 => (a.sin(), h.sin(x)),
            4 => (a.cos(), h.cos(x)),
            5 => (p.ln().unwrap(), h.ln(z)),
            _ => (p.sqrt().unwrap(), h.sqrt(z)),
        };
        ensure(hp::contains(iv, &v), || {
            format!("transcendental {} failed: {iv}", k % 7)
        })?;
        checks += ring.len() + 1;
    }
    Ok(format!("{checks} checks"))
}

fn pair(r: &mut ChaCha8Rng) -> (CoeffSeq<f64>, CoeffSeq<f64>) {
    let (bu, bv) = (common::random_box(r, 6, 6), common::random_box(r, 6, 6));
    let (n1, n2) = (r.gen_range(0.1..3.0), r.gen_range(0.1..3.0));
    (
        common::random_seq(r, bu, 5.0, 3.0, n1),
        common::random_seq(r, bv, 5.0, 3.0, n2),
    )
}

fn convolution_oracle() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (u, v) = pair(&mut r);
        let out = u.index_box().minkowski(&v.index_box());
        let reference = common::convolution_exact(&u, &v, out);
        let fast = u.convolve(&v);
        let encl = u.to_interval().convolve(&v.to_interval());
        let scale = u.norm1() * v.norm1();
        for (k, (a, b)) in out.iter().enumerate() {
            ensure(exact::contains(encl.get(a, b), &reference[k]), || {
                format!("({a},{b}) not enclosed")
            })?;
            let err = exact::abs_err(fast.get(a, b), &reference[k]);
            let rel = num_traits::ToPrimitive::to_f64(&err).unwrap() / scale.max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 1e-12, || format!("relative error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} relative to |u|1 |v|1"))
}

fn young_and_seq_exp() -> Outcome {
    let mut r = rng(3);
    for _ in 0..200 {
        let (u, v) = pair(&mut r);
        let (ui, vi) = (u.to_interval(), v.to_interval());
        let w = ui.convolve(&vi);
        ensure(w.norm2().lo() <= (ui.norm2() * vi.norm1()).hi(), || {
            "l2 Young inequality".into()
        })?;
        ensure(w.norm1().lo() <= (ui.norm1() * vi.norm1()).hi(), || {
            "l1 Young inequality".into()
        })?;
    }
    let (u, _) = pair(&mut r);
    let e = u.seq_exp(1e-12).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let (x1, x2) = (
                u.d1() * (i as f64 / 2.0 - 1.0),
                u.d2() * (j as f64 / 2.0 - 1.0),
            );
            let want = u.eval(x1, x2).exp();
            let gap = (e.seq.eval(x1, x2) - want).abs();
            ensure(gap <= e.tail_l1 + 1e-13 * want.max(1.0), || {
                format!("seq_exp off by {gap:e} at ({x1}, {x2})")
            })?;
            worst = worst.max(gap);
        }
    }
    Ok(format!(
        "200 pairs; seq_exp max gap {worst:.1e} (tail {:.1e})",
        e.tail_l1
    ))
}

fn decay_bound() -> Outcome {
    let p = desk_symbols();
    let mut tightest = f64::INFINITY;
    for n2 in [0, 1, 3, 10] {
        let dc = decay_constants(&p, n2).map_err(|e| e.to_string())?;
        for k in 0..50 {
            let x = 0.1 + 19.9 * k as f64 / 49.0;
            let (f, budget) = common::f_n2(1.2, p.d2, n2, x);
            ensure(budget <= 1e-8, || format!("budget {budget:e}"))?;
            let bound = (dc.c_amp * (-(dc.a * x)).exp()).hi();
            ensure(f.abs() <= bound + budget, || {
                format!("n2={n2} x={x}: |f|={:e} > {bound:e}", f.abs())
            })?;
            if bound > 1e-6 {
                tightest = tightest.min(bound / f.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(format!("200 points; smallest bound/|f| = {tightest:.3}"))
}

fn min_l_and_tail() -> Outcome {
    let mut r = rng(5);
    for _ in 0..20 {
        let (c, d2, n2) = (
            r.gen_range(0.1..1.4),
            r.gen_range(0.5..20.0),
            r.gen_range(0..30usize),
        );
        let p = SymbolParams::new(Interval::point(c), d2).unwrap();
        let m = min_l_n2(&p, n2);
        let grid = (0..=20_000)
            .map(|k| common::l_n2(c, d2, n2, k as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        ensure(m.lo() <= grid && (m.mid() - grid).abs() <= 1e-6, || {
            format!("c={c} d2={d2} n2={n2}: {m} vs grid {grid}")
        })?;
    }
    let mut cases = Vec::new();
    for (c, n) in [
        ("1.0", 5),
        ("1.2", 10),
        ("1.2", 20),
        ("1.0", 10),
        ("1.0", 20),
    ] {
        let cf: f64 = c.parse().unwrap();
        let p = SymbolParams::new(Interval::parse_decimal(c).unwrap(), PI / 0.24).unwrap();
        let bound = inv_l_tail_sum(&p, n).map_err(|e| e.to_string())?;
        let partial: f64 = (n + 1..=n + 100)
            .map(|k| common::inv_l_norm_sq(cf, p.d2, k).0)
            .sum();
        ensure(partial <= bound.lo(), || {
            format!("c={c} N={n}: {partial:e} > {bound}")
        })?;
        cases.push(format!("c={c} N={n}"));
    }
    Ok(format!("20 draws; tail for {}", cases.join(", ")))
}

fn kappa1_and_floor() -> Outcome {
    let p = desk_symbols();
    let k1 = kappa1(&p);
    let want = exact::int(10000) / exact::int(4816);
    ensure(exact::contains(k1, &want), || {
        format!("kappa1 {k1} misses 1/0.4816")
    })?;
    ensure(k1.width() <= 1e-12, || {
        format!("kappa1 width {:e}", k1.width())
    })?;
    let floor = bridgewave::stability::essential_spectrum_floor(&p);
    ensure(
        exact::contains(floor, &(exact::int(4816) / exact::int(10000))),
        || format!("floor {floor}"),
    )?;
    Ok(format!("kappa1 = {k1}, width {:.1e}", k1.width()))
}

fn aliasing_cross_check() -> Outcome {
    let mut r = rng(7);
    for k in 0..50 {
        let bx = common::random_box(&mut r, 6, 6);
        let l1 = r.gen_range(0.0..=2.0);
        let (d1, d2) = (r.gen_range(2.0..20.0), r.gen_range(2.0..20.0));
        let u = common::random_seq(&mut r, bx, d1, d2, l1);
        common::exp_cross_check(&u, 256, 1.1).map_err(|e| format!("draw {k}: {e}"))?;
    }
    Ok("50 draws".into())
}

fn preset() -> (Config, PathBuf) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    (
        Config::load(&dir.join("desk.toml")).expect("desk preset"),
        dir.join("desk_wave.json"),
    )
}

fn desk_certification() -> Outcome {
    let (cfg, coeffs) = preset();
    let cert = cmd_certify(&cfg, &coeffs, RunOptions::default()).map_err(|e| format!("{e:#}"))?;
    ensure(cert.success, || {
        format!(
            "certificate failed: {:?} {:?}",
            cert.failed_condition, cert.error
        )
    })?;
    let r = cert
        .radii
        .as_ref()
        .and_then(|x| x.r_min)
        .ok_or("no radius")?;
    ensure(r.hi() <= 1e-2, || format!("r = {r}"))?;
    Ok(format!("success, r <= {:.3e}", r.hi()))
}

fn unperturbed_stability() -> Outcome {
    common::unperturbed_check("1.2", 10.0, IndexBox::new(12, 6))?;
    Ok("no eigenvalue in the window; stable".into())
}

fn classify_table() -> Outcome {
    let bad = common::classify_mismatches();
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("15 cells".into())
}

fn theta_machinery() -> Outcome {
    let mut r = rng(11);
    for _ in 0..20 {
        let (u, w) = common::theta_fixture(&mut r);
        common::theta0_check(&u, &w, r.gen_range(0.5..1.4), 1e-12)?;
    }
    let (u, w) = common::theta_fixture(&mut r);
    let eps = common::eps_scan(&u, &w, &[0.0, 1e-8, 1e-5, 1e-3, 1e-1])?;
    let shown: Vec<String> = eps.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(format!("20 theta0 draws; eps = [{}]", shown.join(", ")))
}

fn determinism() -> Outcome {
    let (cfg, coeffs) = preset();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let opts = RunOptions {
        deterministic: true,
    };
    let run = || {
        pool.install(|| cmd_certify(&cfg, &coeffs, opts))
            .map_err(|e| format!("{e:#}"))
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    run()?.write(&a).map_err(|e| e.to_string())?;
    run()?.write(&b).map_err(|e| e.to_string())?;
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    ensure(x == y, || "certificates differ".into())?;
    Ok(format!("{} identical bytes", x.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("interval containment", interval_containment),
        ("convolution oracle", convolution_oracle),
        ("Young inequality and seq_exp", young_and_seq_exp),
        ("decay bound vs quadrature", decay_bound),
        ("min_l grid search and tail sums", min_l_and_tail),
        ("kappa1 and essential spectrum floor", kappa1_and_floor),
        ("aliasing cross-check", aliasing_cross_check),
        ("desk certification", desk_certification),
        ("unperturbed stability", unperturbed_stability),
        ("classify table", classify_table),
        ("theta machinery", theta_machinery),
        ("certificate determinism", determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
