//! Interval matrices in midpoint-radius form.
//!
//! An [`IMat`] holds a float midpoint matrix and a nonnegative radius matrix;
//! it stands for every real matrix within the radius entrywise. Products go
//! through one floating-point gemm on midpoints plus rounding-error terms in
//! the style of Rump's midpoint-radius arithmetic.

use crate::interval::{add_round_up, mul_round_up, sqrt_round_up, sum_up, Interval};
use nalgebra::DMatrix;

const U: f64 = f64::EPSILON / 2.0;

fn gamma(k: usize) -> f64 {
    let ku = k as f64 * U;
    assert!(ku < 0.5, "dimension too large for the error model");
    // k u / (1 − k u), rounded up generously
    ku / (1.0 - ku) * (1.0 + 4.0 * U)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IMat {
    pub mid: DMatrix<f64>,
    pub rad: DMatrix<f64>,
}

impl IMat {
    pub fn zeros(r: usize, c: usize) -> IMat {
        IMat {
            mid: DMatrix::zeros(r, c),
            rad: DMatrix::zeros(r, c),
        }
    }

    pub fn identity(n: usize) -> IMat {
        IMat {
            mid: DMatrix::identity(n, n),
            rad: DMatrix::zeros(n, n),
        }
    }

    /// Exact float matrix.
    pub fn from_float(m: DMatrix<f64>) -> IMat {
        let (r, c) = m.shape();
        IMat {
            mid: m,
            rad: DMatrix::zeros(r, c),
        }
    }

    pub fn from_fn(r: usize, c: usize, f: impl Fn(usize, usize) -> Interval) -> IMat {
        let mut out = IMat::zeros(r, c);
        for j in 0..c {
            for i in 0..r {
                let x = f(i, j);
                out.mid[(i, j)] = x.mid();
                out.rad[(i, j)] = x.rad();
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.mid.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.mid.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        Interval::mid_rad(self.mid[(i, j)], self.rad[(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, x: Interval) {
        self.mid[(i, j)] = x.mid();
        self.rad[(i, j)] = x.rad();
    }

    pub fn transpose(&self) -> IMat {
        IMat {
            mid: self.mid.transpose(),
            rad: self.rad.transpose(),
        }
    }

    /// Entrywise map through interval arithmetic.
    pub fn map(&self, f: impl Fn(usize, usize, Interval) -> Interval) -> IMat {
        IMat::from_fn(self.nrows(), self.ncols(), |i, j| f(i, j, self.get(i, j)))
    }

    pub fn add(&self, o: &IMat) -> IMat {
        self.map(|i, j, x| x + o.get(i, j))
    }

    pub fn sub(&self, o: &IMat) -> IMat {
        self.map(|i, j, x| x - o.get(i, j))
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: Option<&[Interval]>, right: Option<&[Interval]>) -> IMat {
        self.map(|i, j, x| {
            let x = match left {
                Some(l) => l[i] * x,
                None => x,
            };
            match right {
                Some(r) => x * r[j],
                None => x,
            }
        })
    }

    pub fn columns(&self, start: usize, n: usize) -> IMat {
        IMat {
            mid: self.mid.columns(start, n).into_owned(),
            rad: self.rad.columns(start, n).into_owned(),
        }
    }

    pub fn rows(&self, start: usize, n: usize) -> IMat {
        IMat {
            mid: self.mid.rows(start, n).into_owned(),
            rad: self.rad.rows(start, n).into_owned(),
        }
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IMat {
        let mut out = IMat::zeros(rows.len(), cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for (ii, &i) in rows.iter().enumerate() {
                out.mid[(ii, jj)] = self.mid[(i, j)];
                out.rad[(ii, jj)] = self.rad[(i, j)];
            }
        }
        out
    }

    /// Rigorous enclosure of the product.
    pub fn mul(&self, o: &IMat) -> IMat {
        assert_eq!(self.ncols(), o.nrows(), "inner dimensions differ");
        let k = self.ncols();
        let mid = &self.mid * &o.mid;
        let am = self.mid.abs();
        let bm = o.mid.abs();
        let t1 = &am * &bm;
        let has_ar = self.rad.iter().any(|&x| x != 0.0);
        let has_br = o.rad.iter().any(|&x| x != 0.0);
        let t2 = has_br.then(|| &am * &o.rad);
        let t3 = has_ar.then(|| {
            let s = bm.zip_map(&o.rad, add_round_up);
            &self.rad * &s
        });
        let gk = gamma(k);
        let fudge = 1.0 + 3.0 * gamma(k + 4);
        let tiny = mul_round_up(k as f64 + 1.0, f64::MIN_POSITIVE);
        let mut rad = DMatrix::zeros(mid.nrows(), mid.ncols());
        for j in 0..mid.ncols() {
            for i in 0..mid.nrows() {
                let mut r = mul_round_up(gk, t1[(i, j)]);
                if let Some(t2) = &t2 {
                    r = add_round_up(r, t2[(i, j)]);
                }
                if let Some(t3) = &t3 {
                    r = add_round_up(r, t3[(i, j)]);
                }
                rad[(i, j)] = add_round_up(mul_round_up(r, fudge), tiny);
            }
        }
        IMat { mid, rad }
    }

    /// Upper bound of `max_i Σ_j |a_ij|`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows())
            .map(|i| {
                sum_up(
                    (0..self.ncols())
                        .map(|j| add_round_up(self.mid[(i, j)].abs(), self.rad[(i, j)])),
                )
            })
            .fold(0.0, f64::max)
    }

    /// Upper bound of `max_j Σ_i |a_ij|`.
    pub fn norm_1(&self) -> f64 {
        self.transpose().norm_inf()
    }

    /// Upper bound of the Frobenius norm.
    pub fn norm_frobenius(&self) -> f64 {
        let s = sum_up(self.mid.iter().zip(self.rad.iter()).map(|(m, r)| {
            let a = add_round_up(m.abs(), *r);
            mul_round_up(a, a)
        }));
        sqrt_round_up(s)
    }

    /// Cheap spectral norm bound `√(‖A‖₁‖A‖∞)`, also capped by Frobenius.
    pub fn norm2_cheap(&self) -> f64 {
        sqrt_round_up(mul_round_up(self.norm_1(), self.norm_inf())).min(self.norm_frobenius())
    }

    /// Rigorous upper bound on the spectral norm.
    ///
    /// Besides the cheap bounds, the Gram matrix `G = AᵀA` (or `AAᵀ`) is
    /// enclosed and a floating eigendecomposition `G ≈ QΛQᵀ` is verified:
    /// `λ_max(G) ≤ max Λ · (1 + ‖QᵀQ − I‖) + ‖G − QΛQᵀ‖`.
    pub fn norm2(&self) -> f64 {
        let cheap = self.norm2_cheap();
        if self.nrows() == 0 || self.ncols() == 0 {
            return 0.0;
        }
        let g = if self.ncols() <= self.nrows() {
            self.transpose().mul(self)
        } else {
            self.mul(&self.transpose())
        };
        let n = g.nrows();
        let sym = (&g.mid + g.mid.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let q = IMat::from_float(eig.eigenvectors.clone());
        let lam_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let ql = IMat::from_float(eig.eigenvectors.clone()).scale_rows_cols(
            None,
            Some(
                &eig.eigenvalues
                    .iter()
                    .map(|&x| Interval::point(x))
                    .collect::<Vec<_>>(),
            ),
        );
        let recon = ql.mul(&q.transpose());
        let resid = g.sub(&recon).norm2_cheap();
        let orth = q.transpose().mul(&q).sub(&IMat::identity(n)).norm2_cheap();
        let bound = add_round_up(mul_round_up(lam_max, add_round_up(1.0, orth)), resid);
        sqrt_round_up(bound).min(cheap)
    }

    /// Float matrix of upper bounds of `|a_ij|`.
    pub fn abs_upper(&self) -> DMatrix<f64> {
        self.mid.zip_map(&self.rad, |m, r| add_round_up(m.abs(), r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_contains_exact() {
        let a = IMat::from_fn(3, 4, |i, j| {
            Interval::point(1.0 / (1.0 + i as f64 + 2.0 * j as f64))
        });
        let b = IMat::from_fn(4, 2, |i, j| {
            Interval::point((i as f64 - j as f64) / 3.0).inflate(1e-9)
        });
        let c = a.mul(&b);
        for i in 0..3 {
            for j in 0..2 {
                let mut s = Interval::ZERO;
                for k in 0..4 {
                    s += a.get(i, k) * b.get(k, j);
                }
                assert!(
                    s.subset_of(c.get(i, j).inflate(1e-30)),
                    "{s:?} vs {:?}",
                    c.get(i, j)
                );
            }
        }
    }

    #[test]
    fn norm2_of_diagonal() {
        let d = IMat::from_fn(5, 5, |i, j| {
            if i == j {
                Interval::point(i as f64 - 2.5)
            } else {
                Interval::ZERO
            }
        });
        let n = d.norm2();
        assert!(n >= 2.5 && n < 2.5 * (1.0 + 1e-12));
    }

    #[test]
    fn norm2_rectangular_and_sharp() {
        let a = IMat::from_fn(6, 3, |i, j| Interval::point(((i * 3 + j) % 5) as f64 - 2.0));
        let sv = a.mid.clone().svd(false, false).singular_values[0];
        let n = a.norm2();
        assert!(n >= sv && n < sv * (1.0 + 1e-10));
    }
}
