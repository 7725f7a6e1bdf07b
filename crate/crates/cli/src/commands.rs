//! The pipeline stages behind each subcommand.

use crate::certificate::{
    Certificate, CertificateKind, FileDigest, Metadata, SpectralPass, SpectralReport, WbarReport,
};
use crate::config::{Config, ProblemParams};
use anyhow::{anyhow, bail, Context, Result};
use bridgewave::aliasing::{rigorous_exp, EnclosedSeq};
use bridgewave::approximation::{build_bn, build_p, newton_solve, trace_pin, NewtonOptions};
use bridgewave::bounds::{compute_bounds, radii_check, v_tail_l1, BoundInputs};
use bridgewave::operators::Sector;
use bridgewave::sequences::CoeffFile;
use bridgewave::stability::{
    classify, count_negative, even_inverse_norm, gershgorin_enclosure, lambda_min_bound,
    refined_window, solve_wbar, theta_enclosure, GershgorinSet, SpectralInputs, SpectralWindow,
    ThetaInputs,
};
use bridgewave::symbols::{kappa2, SymbolParams};
use bridgewave::{CoeffSeq, Interval};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

/// Options shared by the certifying commands.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Leave out wall-clock time so repeated runs give identical bytes.
    pub deterministic: bool,
}

#[derive(Clone, Debug)]
pub struct ApproxSummary {
    pub iterations: usize,
    pub residual: f64,
    pub trace_norm: f64,
    pub u: CoeffSeq<f64>,
}

/// Reads a coefficient file and checks it against the configuration.
pub fn load_coefficients(params: &ProblemParams, path: &Path) -> Result<CoeffSeq<f64>> {
    let file = CoeffFile::read(path)
        .with_context(|| format!("reading coefficients {}", path.display()))?;
    let c = Interval::parse_decimal(&file.c)?;
    if c != params.c_enclosure {
        bail!(
            "{}: wave speed {} differs from the configured {}",
            path.display(),
            file.c,
            params.c
        );
    }
    let u = file.as_float();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
    if !close(u.d1(), params.d1) || !close(u.d2(), params.d2) {
        bail!(
            "{}: domain ({:e}, {:e}) differs from the configured ({:e}, {:e})",
            path.display(),
            u.d1(),
            u.d2(),
            params.d1,
            params.d2
        );
    }
    if u.data().iter().any(|x| !x.is_finite()) {
        bail!("{}: non-finite coefficient", path.display());
    }
    Ok(u)
}

/// Newton iteration from the configured guess, resized to `N⁰`.
pub fn cmd_approx(cfg: &Config, guess: Option<&Path>) -> Result<ApproxSummary> {
    let params = cfg.resolve()?;
    let path = match guess {
        Some(g) => g.to_path_buf(),
        None => cfg
            .guess_path()
            .ok_or_else(|| anyhow!("the config names no initial guess"))?,
    };
    let u0 = load_coefficients(&params, &path)?.resized(params.n0_box());
    let p = params.symbols()?;
    let opts = NewtonOptions {
        tol: cfg.newton.tol,
        max_iter: cfg.newton.max_iter,
    };
    let rep = newton_solve(&u0, &p, opts)?;
    if let Some(max) = cfg.newton.max_residual {
        if !(rep.residual <= max) {
            bail!(
                "Newton stopped at residual {:e}, above the configured {:e}",
                rep.residual,
                max
            );
        }
    }
    Ok(ApproxSummary {
        iterations: rep.iterations,
        residual: rep.residual,
        trace_norm: rep.trace_norm,
        u: rep.u,
    })
}

struct Prepared {
    p: SymbolParams,
    ubar: CoeffSeq<Interval>,
    enc: EnclosedSeq,
    k2: Interval,
}

fn prepare(params: &ProblemParams, u: &CoeffSeq<f64>) -> Result<Prepared> {
    let p = params.symbols()?;
    let apar = params.analyticity()?;
    let ubar = trace_pin(&u.to_interval());
    let enc = rigorous_exp(&ubar, &apar, params.head_box(u.index_box()))?;
    let k2 = kappa2(&p, params.kappa2_split, params.kappa2_xi_cut)?;
    Ok(Prepared { p, ubar, enc, k2 })
}

fn guarded<T>(f: impl FnOnce() -> Result<T>) -> Result<T> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| e.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Err(anyhow!("internal error: {msg}"))
        }
    }
}

/// Bound suite and radii check. Errors after the inputs are read are
/// recorded in the certificate instead of being returned.
pub fn cmd_certify(cfg: &Config, coeff: &Path, opts: RunOptions) -> Result<Certificate> {
    let start = Instant::now();
    let params = cfg.resolve()?;
    let digest = FileDigest::of(coeff)?;
    let u = load_coefficients(&params, coeff)?;
    let mut cert = Certificate::new(
        CertificateKind::Bounds,
        params.clone(),
        digest,
        Metadata::current(opts.deterministic),
    );
    let run = guarded(|| {
        if u.index_box() != params.n0_box() {
            bail!(
                "coefficient box {:?} differs from the configured N0 {:?}",
                u.index_box(),
                params.n0
            );
        }
        let pre = prepare(&params, &u)?;
        let bn = build_bn(&pre.enc.v_head().mid(), &pre.p, params.n_box())?;
        let bounds = compute_bounds(&BoundInputs {
            ubar: &pre.ubar,
            bn: &bn,
            enc: &pre.enc,
            params: &pre.p,
            n: params.n_box(),
            z2_box: u.index_box(),
            kappa2: pre.k2,
        })?;
        let radii = radii_check(&bounds);
        Ok((bounds, radii))
    });
    match run {
        Ok((bounds, radii)) => {
            cert.success = radii.success;
            cert.failed_condition = radii.failed_condition.map(Into::into);
            cert.bounds = Some(bounds);
            cert.radii = Some(radii);
        }
        Err(e) => cert.fail(e),
    }
    if !opts.deterministic {
        cert.metadata.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(cert)
}

fn enclose_both(
    inp: &SpectralInputs,
    vn: &CoeffSeq<f64>,
    window: &SpectralWindow,
) -> Result<SpectralPass> {
    let run = |s: Sector| -> Result<GershgorinSet> {
        let basis = build_p(vn, inp.params, inp.n, s)?;
        Ok(gershgorin_enclosure(inp, &basis, window)?)
    };
    let (even, odd) = rayon::join(|| run(Sector::Even), || run(Sector::Odd));
    let (even, odd) = (even?, odd?);
    let count = count_negative(&even, &odd);
    Ok(SpectralPass {
        window: *window,
        even,
        odd,
        count,
    })
}

/// Spectral enclosure, `θ` and the stability verdict for a certified wave.
/// Writes nothing; the result references the bound certificate by digest.
pub fn cmd_stability(
    cfg: &Config,
    coeff: &Path,
    bound_cert: &Path,
    opts: RunOptions,
) -> Result<Certificate> {
    let start = Instant::now();
    let params = cfg.resolve()?;
    let prior = Certificate::read(bound_cert)?;
    if prior.kind != CertificateKind::Bounds {
        bail!("{} is not a bound certificate", bound_cert.display());
    }
    if !prior.success {
        bail!("{} records a failed certification", bound_cert.display());
    }
    if prior.params != params {
        bail!(
            "{} was produced with a different configuration",
            bound_cert.display()
        );
    }
    let digest = FileDigest::of(coeff)?;
    if digest.sha256 != prior.coeff_file.sha256 {
        bail!(
            "{} does not match the coefficient digest in {}",
            coeff.display(),
            bound_cert.display()
        );
    }
    let r_min = prior
        .radii
        .as_ref()
        .and_then(|r| r.r_min)
        .ok_or_else(|| anyhow!("{} carries no validated radius", bound_cert.display()))?;
    let u = load_coefficients(&params, coeff)?;
    let mut cert = Certificate::new(
        CertificateKind::Stability,
        params.clone(),
        digest,
        Metadata::current(opts.deterministic),
    );
    cert.bound_certificate = Some(FileDigest::of(bound_cert)?);
    let r0 = Interval::point(r_min.hi());
    let mut report = None;
    let run = guarded(|| {
        let pre = prepare(&params, &u)?;
        let n = params.n_box();
        let v = pre.enc.v_head();
        let inp = SpectralInputs {
            v: &v,
            v_tail_l1: v_tail_l1(&pre.enc, n),
            exp_norm1: pre.enc.norm1(),
            kappa2: pre.k2,
            r0,
            n,
            params: &pre.p,
        };
        let vn = v.resized(n).mid();
        let lambda_min = lambda_min_bound(&pre.enc, pre.k2, r0, &pre.p);
        let window = match params.t {
            Some(t) => {
                let floor = bridgewave::stability::essential_spectrum_floor(&pre.p);
                let frac = params.delta0_fraction.unwrap_or(0.9);
                SpectralWindow::new(lambda_min.lo(), frac * floor.lo(), t, &pre.p)?
            }
            None => SpectralWindow::with_defaults(lambda_min.lo(), params.delta0_fraction, &pre.p)?,
        };
        let rep = report.insert(SpectralReport {
            r0,
            lambda_min,
            passes: vec![enclose_both(&inp, &vn, &window)?],
            inverse_norm: None,
            wbar: None,
            theta: None,
        });
        if params.refine {
            let last = rep.passes.last().expect("one pass");
            if let Some(w) = refined_window(&last.even, &last.odd) {
                if w != last.window {
                    let pass = enclose_both(&inp, &vn, &w)?;
                    rep.passes.push(pass);
                }
            }
        }
        let last = rep.passes.last().expect("one pass");
        let count = last.count.clone();
        let mut theta = Interval::ENTIRE;
        if count.n_negative.is_some() {
            rep.inverse_norm = even_inverse_norm(&last.even);
        }
        if let Some(inv) = rep.inverse_norm {
            let ws = solve_wbar(&u, &pre.p)?;
            rep.wbar = Some(WbarReport {
                raw_defect: ws.raw_defect,
                defect: ws.defect,
            });
            let wbar = trace_pin(&ws.w.to_interval());
            let th = theta_enclosure(&ThetaInputs {
                ubar: &pre.ubar,
                wbar: &wbar,
                enc: &pre.enc,
                r0,
                inv_norm: inv,
                kappa2: pre.k2,
                params: &pre.p,
            })?;
            theta = th.theta;
            rep.theta = Some(th);
        }
        Ok(classify(count.n_negative, count.zero_mode, theta))
    });
    cert.spectral = report;
    match run {
        Ok(verdict) => {
            cert.success = true;
            cert.verdict = Some(verdict);
        }
        Err(e) => cert.fail(e),
    }
    if !opts.deterministic {
        cert.metadata.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(cert)
}

/// Values of `ū` on a uniform `m1 × m2` grid over `[-d₁, d₁] × [-d₂, d₂]`.
pub fn export_grid(u: &CoeffSeq<f64>, m1: usize, m2: usize) -> Result<Vec<(f64, f64, f64)>> {
    if m1 < 2 || m2 < 2 {
        bail!("grid resolution must be at least 2 x 2");
    }
    let axis = |m: usize, d: f64| -> Vec<f64> {
        (0..m)
            .map(|i| (-d + 2.0 * d * i as f64 / (m - 1) as f64).clamp(-d, d))
            .collect()
    };
    let (xs, ys) = (axis(m1, u.d1()), axis(m2, u.d2()));
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let vals = u.eval_grid(&pts)?;
    Ok(pts
        .into_iter()
        .zip(vals)
        .map(|((x, y), v)| (x, y, v))
        .collect())
}

pub fn write_grid_csv(rows: &[(f64, f64, f64)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x1", "x2", "u"])?;
    for &(x, y, v) in rows {
        w.serialize((x, y, v))?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    bridgewave::write_atomic(path, &bytes)?;
    Ok(())
}
