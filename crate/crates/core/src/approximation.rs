//! Floating-point constructions: the approximate wave, the trace
//! constraint, the approximate inverse block and the approximate
//! eigenbasis. Nothing here is rigorous; the outputs are promoted to
//! intervals downstream.

use crate::error::{Error, Result};
use crate::fft;
use crate::operators::{self, Index, Sector};
use crate::scalar::Scalar;
use crate::sequences::{alpha, CoeffSeq, IndexBox};
use crate::symbols::{l_lattice, omega, SymbolParams};
use nalgebra::{DMatrix, DVector};

/// Grid size per axis used to evaluate `e^U` for a box of size `n`.
pub fn grid_size(n: usize) -> usize {
    (4 * (n + 1)).next_power_of_two().max(8)
}

/// Floating-point `e^U` on `out` through the FFT.
pub fn exp_fft(u: &CoeffSeq<f64>, out: IndexBox) -> CoeffSeq<f64> {
    let bx = u.index_box();
    let m1 = grid_size(bx.n1.max(out.n1));
    let m2 = grid_size(bx.n2.max(out.n2));
    let g: Vec<f64> = fft::synthesize(u, m1, m2)
        .into_iter()
        .map(f64::exp)
        .collect();
    fft::analyze(&g, m1, m2, out, u.d1(), u.d2())
}

/// `F(U) = LU + e^U − U − e₀` on the box of `U`.
pub fn residual_f(u: &CoeffSeq<f64>, p: &SymbolParams) -> CoeffSeq<f64> {
    let bx = u.index_box();
    let e = exp_fft(u, bx);
    CoeffSeq::from_fn(bx, u.d1(), u.d2(), |a, b| {
        let l = l_lattice(p, u.d1(), a, b).mid();
        let unit = if a == 0 && b == 0 { 1.0 } else { 0.0 };
        l * u.get(a, b) + e.get(a, b) - u.get(a, b) - unit
    })
}

/// `DF(U) = diag(l − 1) + M_{e^U}` on the box of `U`, plain coordinates,
/// columns and rows in box order.
pub fn jacobian(u: &CoeffSeq<f64>, p: &SymbolParams) -> DMatrix<f64> {
    let bx = u.index_box();
    let w = exp_fft(u, bx.scaled(2));
    let idx: Vec<Index> = bx.iter().collect();
    let mut j = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        operators::mult_entry(&w, Sector::Even, idx[r], idx[c])
    });
    for (k, &(a, b)) in idx.iter().enumerate() {
        j[(k, k)] += l_lattice(p, u.d1(), a, b).mid() - 1.0;
    }
    j
}

/// The trace matrix on `n0`: rows `(0, n₂)` then `(2, n₂)`.
///
/// Row `(0, n₂)` evaluates `u(d₁, ·)` on the `n₂`-th mode and row `(2, n₂)`
/// the second `x₁`-derivative, up to sign.
pub fn trace_matrix(n0: IndexBox, d1: f64) -> DMatrix<f64> {
    let rows = 2 * (n0.n2 + 1);
    let mut t = DMatrix::zeros(rows, n0.len());
    for (a, b) in n0.iter() {
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        let w = if a == 0 { 1.0 } else { 2.0 * sign };
        t[(b, n0.idx(a, b))] = w;
        t[(n0.n2 + 1 + b, n0.idx(a, b))] = w * omega(a, d1).sqr().mid();
    }
    t
}

/// Minimal-norm projection onto `Ker(T)` in the α-weighted inner product.
pub fn trace_project(u: &CoeffSeq<f64>, t: &DMatrix<f64>) -> Result<CoeffSeq<f64>> {
    let bx = u.index_box();
    if t.ncols() != bx.len() {
        return Err(Error::ShapeMismatch(format!(
            "trace matrix has {} columns, box has {}",
            t.ncols(),
            bx.len()
        )));
    }
    let dinv = DVector::from_iterator(bx.len(), bx.iter().map(|(a, b)| 1.0 / alpha(a, b) as f64));
    let x = DVector::from_column_slice(u.data());
    let t_dinv = t * DMatrix::from_diagonal(&dinv);
    let gram = &t_dinv * t.transpose();
    // rows vanish for degenerate boxes; drop them
    let keep: Vec<usize> = (0..gram.nrows()).filter(|&i| gram[(i, i)] > 0.0).collect();
    let gram = gram.select_rows(&keep).select_columns(&keep);
    let tk = t.select_rows(&keep);
    let chol = gram.cholesky().ok_or(Error::SingularGram)?;
    let lam = chol.solve(&(&tk * &x));
    let corr = DMatrix::from_diagonal(&dinv) * tk.transpose() * lam;
    let out = x - corr;
    CoeffSeq::from_vec(bx, u.d1(), u.d2(), out.as_slice().to_vec())
}

/// Recomputes the columns `n₁ ∈ {0, 1}` from the others so that the trace
/// conditions hold exactly in the scalar's arithmetic:
/// `U₁ = Σ_{n₁≥2} (−1)^{n₁} n₁² U_{n₁}` and `U₀ = −2 Σ_{n₁≥1} (−1)^{n₁} U_{n₁}`.
pub fn trace_pin<T: Scalar>(u: &CoeffSeq<T>) -> CoeffSeq<T> {
    let bx = u.index_box();
    let mut out = u.clone();
    for b in 0..=bx.n2 {
        if bx.n1 == 0 {
            out.set(0, b, T::zero());
            continue;
        }
        let mut u1 = T::zero();
        for a in 2..=bx.n1 {
            let w = T::from_f64(((a * a) as f64) * if a % 2 == 0 { 1.0 } else { -1.0 });
            u1 += w * u.get(a, b);
        }
        out.set(1, b, u1);
        let mut s = T::zero();
        for a in 1..=bx.n1 {
            let v = out.get(a, b);
            s += if a % 2 == 0 { v } else { -v };
        }
        out.set(0, b, s * T::from_f64(-2.0));
    }
    out
}

/// Linear map from kernel coordinates `z = (U_{n₁,n₂})_{n₁≥2}` to `U`.
pub(crate) fn pin_matrix(bx: IndexBox) -> DMatrix<f64> {
    let free: Vec<Index> = bx.iter().filter(|&(a, _)| a >= 2).collect();
    let mut k = DMatrix::zeros(bx.len(), free.len());
    for (j, &(a, b)) in free.iter().enumerate() {
        let mut e = CoeffSeq::<f64>::zeros(bx, 1.0, 1.0);
        e.set(a, b, 1.0);
        let e = trace_pin(&e);
        for (r, v) in e.data().iter().enumerate() {
            k[(r, j)] = *v;
        }
    }
    k
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Stop once the step's α-weighted 2-norm is below this, relative to
    /// `max(1, ‖U‖₂)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub u: CoeffSeq<f64>,
    pub iterations: usize,
    /// `‖F(Ū)‖₂` on the box.
    pub residual: f64,
    /// `‖TŪ‖_∞`.
    pub trace_norm: f64,
    /// Residual after each iteration.
    pub history: Vec<f64>,
}

/// Gauss–Newton in the kernel of the trace matrix with backtracking.
///
/// Iterates stay in `Ker(T)` by construction. The trace condition usually
/// conflicts with an exact periodic zero, so the iteration converges to an
/// α-weighted least-squares minimizer of `F`; convergence is declared on
/// the step size.
pub fn newton_solve(
    u0: &CoeffSeq<f64>,
    p: &SymbolParams,
    opts: NewtonOptions,
) -> Result<NewtonReport> {
    let bx = u0.index_box();
    let (d1, d2) = (u0.d1(), u0.d2());
    if bx.n1 < 2 {
        return Err(Error::InvalidParams(
            "the box needs at least three modes in x1".into(),
        ));
    }
    let t = trace_matrix(bx, d1);
    let k = pin_matrix(bx);
    let free: Vec<usize> = bx
        .iter()
        .filter(|&(a, _)| a >= 2)
        .map(|(a, b)| bx.idx(a, b))
        .collect();
    let sw = DVector::from_iterator(
        bx.len(),
        bx.iter().map(|(a, b)| (alpha(a, b) as f64).sqrt()),
    );
    let colscale = DVector::from_iterator(
        free.len(),
        free.iter().map(|&i| {
            let (a, b) = bx.unflat(i);
            1.0 / l_lattice(p, d1, a, b).mid()
        }),
    );
    let wnorm = |f: &CoeffSeq<f64>| f.norm2();

    let start = trace_project(u0, &t)?;
    let mut z = DVector::from_iterator(free.len(), free.iter().map(|&i| start.data()[i]));
    let to_u = |z: &DVector<f64>| CoeffSeq::from_vec(bx, d1, d2, (&k * z).as_slice().to_vec());
    let mut u = to_u(&z)?;
    let mut f = residual_f(&u, p);
    let mut res = wnorm(&f);
    let mut history = Vec::new();
    for it in 0..opts.max_iter {
        let j = jacobian(&u, p) * &k;
        let js = DMatrix::from_diagonal(&sw) * j * DMatrix::from_diagonal(&colscale);
        let rhs = -(DMatrix::from_diagonal(&sw) * DVector::from_column_slice(f.data()));
        let normal = js.transpose() * &js;
        let g = js.transpose() * rhs;
        let step = match normal.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => normal
                .lu()
                .solve(&g)
                .ok_or_else(|| Error::SingularBlock("Gauss-Newton normal equations".into()))?,
        };
        let dz = step.component_mul(&colscale);
        let dz_norm = to_u(&dz)?.norm2();
        let scale = u.norm2().max(1.0);
        let finish = |u: CoeffSeq<f64>, res: f64, history: Vec<f64>| {
            let trace_norm = (&t * DVector::from_column_slice(u.data())).amax();
            Ok(NewtonReport {
                u,
                iterations: it + 1,
                residual: res,
                trace_norm,
                history,
            })
        };
        // Armijo on ‖F‖², whose slope along the step is −2 g·step
        let slope = g.dot(&step).max(0.0);
        let mut lam = 1.0;
        let accepted = loop {
            let z_new = &z + &dz * lam;
            let u_new = to_u(&z_new)?;
            let f_new = residual_f(&u_new, p);
            let res_new = wnorm(&f_new);
            if res_new.is_finite() && res_new * res_new <= res * res - 2e-4 * lam * slope {
                break Some((z_new, u_new, f_new, res_new));
            }
            if lam < 1e-3 {
                break None;
            }
            lam *= 0.5;
        };
        match accepted {
            Some((z_new, u_new, f_new, res_new)) => {
                z = z_new;
                u = u_new;
                f = f_new;
                res = res_new;
                history.push(res);
                if dz_norm * lam <= opts.tol * scale {
                    return finish(u, res, history);
                }
            }
            // no decrease left: accept if the proposed step is at noise level
            None if dz_norm <= 1e3 * opts.tol * scale => {
                history.push(res);
                return finish(u, res, history);
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: it + 1,
                    residual: res,
                })
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: res,
    })
}

/// Approximate inverse of the hat block `I + M_{V̄^N} L⁻¹` on `I_N`
/// (even sector, box order).
pub fn build_bn(vbar: &CoeffSeq<f64>, p: &SymbolParams, n: IndexBox) -> Result<DMatrix<f64>> {
    let idx = operators::sector_indices(n, Sector::Even);
    let v = vbar.resized(n);
    let m = operators::mult_matrix_f64(&v, Sector::Even, &idx, &idx);
    let l = operators::l_values_f64(p, vbar.d1(), &idx);
    let a = DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
        m[(i, j)] / l[j] + if i == j { 1.0 } else { 0.0 }
    });
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::SingularBlock("I + M_V L^-1".into()))?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularBlock("I + M_V L^-1".into()));
    }
    Ok(inv)
}

/// Approximate eigenbasis of the finite block of `DF(Ū) = L + M_{V̄}` in a
/// sector, in hat coordinates.
#[derive(Clone, Debug)]
pub struct Eigenbasis {
    pub sector: Sector,
    pub indices: Vec<Index>,
    /// Columns are unit vectors in the α-weighted (hat) metric.
    pub p: DMatrix<f64>,
    /// Approximate eigenvalues, ascending.
    pub lambda: Vec<f64>,
}

pub fn build_p(
    vbar: &CoeffSeq<f64>,
    p: &SymbolParams,
    n: IndexBox,
    sector: Sector,
) -> Result<Eigenbasis> {
    let idx = operators::sector_indices(n, sector);
    let m = operators::mult_matrix_f64(vbar, sector, &idx, &idx);
    let l = operators::l_values_f64(p, vbar.d1(), &idx);
    let mut h = (&m + m.transpose()) * 0.5;
    for (k, lk) in l.iter().enumerate() {
        h[(k, k)] += lk;
    }
    let eig = h.symmetric_eigen();
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigSolverFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut pm = DMatrix::zeros(idx.len(), idx.len());
    for (j, &o) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(o);
        let nrm = col.norm();
        pm.set_column(j, &(col / nrm));
    }
    Ok(Eigenbasis {
        sector,
        indices: idx,
        p: pm,
        lambda: order.iter().map(|&o| eig.eigenvalues[o]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn params() -> SymbolParams {
        SymbolParams::new(Interval::parse_decimal("1.2").unwrap(), 4.0).unwrap()
    }

    #[test]
    fn residual_vanishes_at_zero() {
        let u = CoeffSeq::<f64>::zeros(IndexBox::new(4, 3), 6.0, 4.0);
        assert!(residual_f(&u, &params()).max_abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = params();
        let u = CoeffSeq::from_fn(IndexBox::new(4, 2), 6.0, 4.0, |a, b| {
            0.1 / (1.0 + (a + b) as f64)
        });
        let h = CoeffSeq::from_fn(IndexBox::new(4, 2), 6.0, 4.0, |a, b| {
            ((a * 3 + b) % 5) as f64 - 2.0
        });
        let j = jacobian(&u, &p);
        let jh = &j * DVector::from_column_slice(h.data());
        let eps = 1e-6;
        let f1 = residual_f(&u.add(&h.scale(eps)), &p);
        let f0 = residual_f(&u.sub(&h.scale(eps)), &p);
        for k in 0..jh.len() {
            let fd = (f1.data()[k] - f0.data()[k]) / (2.0 * eps);
            assert!((fd - jh[k]).abs() < 1e-6, "{k}: {fd} vs {}", jh[k]);
        }
    }

    #[test]
    fn projection_is_idempotent_and_pins_agree() {
        let bx = IndexBox::new(6, 2);
        let u = CoeffSeq::from_fn(bx, 6.0, 4.0, |a, b| {
            (a as f64 - 2.0) * 0.1 + b as f64 * 0.05
        });
        let t = trace_matrix(bx, 6.0);
        let once = trace_project(&u, &t).unwrap();
        let twice = trace_project(&once, &t).unwrap();
        for (x, y) in once.data().iter().zip(twice.data()) {
            assert!((x - y).abs() < 1e-13);
        }
        let tu = &t * DVector::from_column_slice(once.data());
        assert!(tu.amax() < 1e-12);
        let pinned = trace_pin(&u);
        let tp = &t * DVector::from_column_slice(pinned.data());
        assert!(tp.amax() < 1e-12);
    }

    #[test]
    fn bn_is_identity_without_potential() {
        let v = CoeffSeq::<f64>::zeros(IndexBox::new(3, 3), 6.0, 4.0);
        let b = build_bn(&v, &params(), IndexBox::new(3, 3)).unwrap();
        assert!((b - DMatrix::identity(16, 16)).amax() < 1e-15);
    }

    #[test]
    fn eigenbasis_without_potential_is_the_symbol() {
        let v = CoeffSeq::<f64>::zeros(IndexBox::new(3, 2), 6.0, 4.0);
        let p = params();
        let e = build_p(&v, &p, IndexBox::new(3, 2), Sector::Odd).unwrap();
        let mut l = operators::l_values_f64(&p, 6.0, &e.indices);
        l.sort_by(f64::total_cmp);
        for (a, b) in l.iter().zip(&e.lambda) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
