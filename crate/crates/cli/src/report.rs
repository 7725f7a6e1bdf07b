//! Plain-text rendering of certificates.

use crate::certificate::{Certificate, SpectralPass};
use bridgewave::stability::GershgorinSet;
use bridgewave::Interval;
use std::fmt::Write;

fn iv(x: Interval) -> String {
    format!("{x:.6}")
}

fn sector(out: &mut String, gs: &GershgorinSet, full: bool) {
    let ivs = gs.intervals();
    let shown = if full { ivs.len() } else { ivs.len().min(8) };
    let _ = writeln!(
        out,
        "    {:?}: {} intervals, tail floor {}, tail clear {}",
        gs.sector,
        ivs.len(),
        iv(gs.tail_floor),
        gs.tail_clear
    );
    for (k, x) in ivs.iter().take(shown).enumerate() {
        let _ = writeln!(out, "      {k:4}  {}", iv(*x));
    }
    if shown < ivs.len() {
        let _ = writeln!(out, "      ... {} more", ivs.len() - shown);
    }
}

fn pass(out: &mut String, k: usize, p: &SpectralPass, full: bool) {
    let w = &p.window;
    let _ = writeln!(
        out,
        "  pass {k}: window [{:.6e}, {:.6e}], t = {:.6e}",
        w.lambda_min.lo(),
        w.delta0.hi(),
        w.t.mid()
    );
    sector(out, &p.even, full);
    sector(out, &p.odd, full);
    match p.count.n_negative {
        Some(n) => {
            let _ = writeln!(
                out,
                "    negative eigenvalues: {n}, translation mode: {}",
                p.count.zero_mode
            );
        }
        None => {
            let note = p.count.note.as_deref().unwrap_or("enclosures overlap");
            let _ = writeln!(out, "    count inconclusive: {note}");
        }
    }
}

/// Summary of a certificate; `full` lists every spectral interval.
pub fn render(cert: &Certificate, full: bool) -> String {
    let mut out = String::new();
    let p = &cert.params;
    let _ = writeln!(out, "{:?} certificate for preset {:?}", cert.kind, p.name);
    let _ = writeln!(out, "  c = {}, d = ({:.6e}, {:.6e})", p.c, p.d1, p.d2);
    let _ = writeln!(
        out,
        "  N0 = {:?}, N = {:?}, N_FFT = {:?}, nu = {:?}",
        p.n0, p.n, p.nfft, p.nu
    );
    let _ = writeln!(
        out,
        "  coefficients {} (sha256 {})",
        cert.coeff_file.path, cert.coeff_file.sha256
    );
    if let Some(b) = &cert.bound_certificate {
        let _ = writeln!(out, "  bound certificate {} (sha256 {})", b.path, b.sha256);
    }
    let _ = writeln!(out, "  success: {}", cert.success);
    if let Some(f) = cert.failed_condition {
        let _ = writeln!(out, "  failed condition: {f:?}");
    }
    if let Some(e) = &cert.error {
        let _ = writeln!(out, "  error: {e}");
    }
    if let Some(b) = &cert.bounds {
        let _ = writeln!(out, "  Y0 = {}", iv(b.y0));
        let _ = writeln!(out, "  Z1 = {}", iv(b.z1));
        let _ = writeln!(
            out,
            "  Z2 coefficient = {}, kappa2 = {}",
            iv(b.z2_coeff),
            iv(b.kappa2)
        );
        let _ = writeln!(out, "  ||B^N|| = {}", iv(b.norm_bn));
    }
    if let Some(r) = &cert.radii {
        if let (Some(lo), Some(hi)) = (r.r_min, r.r_max) {
            let _ = writeln!(
                out,
                "  radii: r_min <= {:.6e}, r_max >= {:.6e}",
                lo.hi(),
                hi.lo()
            );
        }
    }
    if let Some(s) = &cert.spectral {
        let _ = writeln!(
            out,
            "  r0 = {:.6e}, lambda_min >= {:.6e}",
            s.r0.hi(),
            s.lambda_min.lo()
        );
        for (k, ps) in s.passes.iter().enumerate() {
            pass(&mut out, k, ps, full);
        }
        if let Some(inv) = s.inverse_norm {
            let _ = writeln!(out, "  even-sector inverse norm <= {:.6e}", inv.hi());
        }
        if let Some(w) = &s.wbar {
            let _ = writeln!(
                out,
                "  wbar defect {:.3e} (unconstrained {:.3e})",
                w.defect, w.raw_defect
            );
        }
        if let Some(t) = &s.theta {
            let _ = writeln!(out, "  theta0 = {}, eps = {:.6e}", iv(t.theta0), t.eps.hi());
        }
    }
    if let Some(v) = &cert.verdict {
        let _ = writeln!(out, "  theta in {}", iv(v.theta));
        let _ = writeln!(out, "  verdict: {:?}", v.verdict);
    }
    if let Some(t) = cert.metadata.wall_time_s {
        let _ = writeln!(
            out,
            "  wall time {t:.1} s on {} thread(s)",
            cert.metadata.threads
        );
    }
    out
}
