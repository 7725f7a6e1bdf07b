//! Matrix representations of multiplication and of the linear part.
//!
//! Matrices act on flattened index lists and are expressed in orthonormal
//! ("hat") coordinates `Û[n] = √w(n) U[n]`, where `w` is the sector weight.
//! Operator 2-norms in the weighted sequence space are then ordinary matrix
//! 2-norms, and multiplication by a real even function becomes symmetric.

use crate::interval::Interval;
use crate::linalg::IMat;
use crate::scalar::Scalar;
use crate::sequences::{alpha, CoeffSeq, IndexBox};
use crate::symbols::{l_lattice, omega, SymbolParams};
use nalgebra::DMatrix;

/// Symmetry sector in `x₁`: cosines (`Even`) or sines (`Odd`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Even,
    Odd,
}

pub type Index = (usize, usize);

/// Norm weight of index `n` in a sector.
pub fn weight(sector: Sector, n: Index) -> u32 {
    match sector {
        Sector::Even => alpha(n.0, n.1),
        Sector::Odd => {
            if n.1 == 0 {
                2
            } else {
                4
            }
        }
    }
}

fn sqrt_weight(w: u32) -> Interval {
    match w {
        1 => Interval::ONE,
        2 => Interval::point(2.0).sqrt_clamped(),
        4 => Interval::point(2.0),
        _ => unreachable!("weights are 1, 2 or 4"),
    }
}

/// `√(w(n)/w(k))` enclosed.
pub fn weight_ratio(sector: Sector, n: Index, k: Index) -> Interval {
    let (a, b) = (weight(sector, n), weight(sector, k));
    if a == b {
        Interval::ONE
    } else {
        sqrt_weight(a) / sqrt_weight(b)
    }
}

/// Indices of `bx` belonging to the sector.
pub fn sector_indices(bx: IndexBox, sector: Sector) -> Vec<Index> {
    bx.iter()
        .filter(|&(a, _)| sector == Sector::Even || a >= 1)
        .collect()
}

/// Indices of `outer` in the sector, those of `inner` first.
pub fn ordered_indices(inner: IndexBox, outer: IndexBox, sector: Sector) -> Vec<Index> {
    let mut v = sector_indices(inner, sector);
    v.extend(
        sector_indices(outer, sector)
            .into_iter()
            .filter(|&(a, b)| !inner.contains(a, b)),
    );
    v
}

/// Entry `(n, k)` of multiplication by the even sequence `V` in plain
/// (unweighted) coordinates.
pub fn mult_entry<T: Scalar>(v: &CoeffSeq<T>, sector: Sector, n: Index, k: Index) -> T {
    let (n1, n2) = (n.0 as i64, n.1 as i64);
    let (k1, k2) = (k.0 as i64, k.1 as i64);
    let s2: &[i64] = if k2 == 0 { &[1] } else { &[1, -1] };
    let mut acc = T::zero();
    match sector {
        Sector::Even => {
            let s1: &[i64] = if k1 == 0 { &[1] } else { &[1, -1] };
            for &a in s1 {
                for &b in s2 {
                    acc += v.get_signed(n1 - a * k1, n2 - b * k2);
                }
            }
        }
        Sector::Odd => {
            for &b in s2 {
                acc += v.get_signed(n1 - k1, n2 - b * k2) - v.get_signed(n1 + k1, n2 - b * k2);
            }
        }
    }
    acc
}

/// Multiplication matrix in hat coordinates, floating point.
pub fn mult_matrix_f64(
    v: &CoeffSeq<f64>,
    sector: Sector,
    rows: &[Index],
    cols: &[Index],
) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let (n, k) = (rows[i], cols[j]);
        let r = (weight(sector, n) as f64 / weight(sector, k) as f64).sqrt();
        mult_entry(v, sector, n, k) * r
    })
}

/// Multiplication matrix in hat coordinates, enclosed.
pub fn mult_matrix(v: &CoeffSeq<Interval>, sector: Sector, rows: &[Index], cols: &[Index]) -> IMat {
    IMat::from_fn(rows.len(), cols.len(), |i, j| {
        let (n, k) = (rows[i], cols[j]);
        mult_entry(v, sector, n, k) * weight_ratio(sector, n, k)
    })
}

/// Symbol values `l(ñ)` on an index list.
pub fn l_values(p: &SymbolParams, d1: f64, idx: &[Index]) -> Vec<Interval> {
    idx.iter().map(|&(a, b)| l_lattice(p, d1, a, b)).collect()
}

pub fn l_values_f64(p: &SymbolParams, d1: f64, idx: &[Index]) -> Vec<f64> {
    l_values(p, d1, idx).iter().map(|x| x.mid()).collect()
}

/// `−ω₁²`, the symbol of `∂²ₓ₁`, on an index list.
pub fn d11_values(d1: f64, idx: &[Index]) -> Vec<Interval> {
    idx.iter().map(|&(a, _)| -omega(a, d1).sqr()).collect()
}

/// Flattens a sequence into hat coordinates on an index list.
pub fn to_hat<T: Scalar>(u: &CoeffSeq<T>, sector: Sector, idx: &[Index]) -> Vec<T> {
    idx.iter()
        .map(|&n| u.get(n.0, n.1) * T::from_interval(sqrt_weight(weight(sector, n))))
        .collect()
}

/// Inverse of [`to_hat`] for floats.
pub fn from_hat_f64(
    x: &[f64],
    sector: Sector,
    idx: &[Index],
    bx: IndexBox,
    d1: f64,
    d2: f64,
) -> CoeffSeq<f64> {
    let mut u = CoeffSeq::zeros(bx, d1, d2);
    for (v, &n) in x.iter().zip(idx) {
        u.set(n.0, n.1, v / (weight(sector, n) as f64).sqrt());
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v() -> CoeffSeq<f64> {
        CoeffSeq::from_fn(IndexBox::new(3, 2), 5.0, 4.0, |a, b| {
            0.3 / (1.0 + a as f64 + b as f64) - 0.05 * b as f64
        })
    }

    #[test]
    fn even_matrix_reproduces_convolution() {
        let v = v();
        let u = CoeffSeq::from_fn(IndexBox::new(2, 2), 5.0, 4.0, |a, b| {
            (a as f64 - 0.5) * (b as f64 + 1.0)
        });
        let rows = sector_indices(IndexBox::new(5, 4), Sector::Even);
        let cols = sector_indices(IndexBox::new(2, 2), Sector::Even);
        let w = v.convolve(&u);
        for &n in &rows {
            let s: f64 = cols
                .iter()
                .map(|&k| mult_entry(&v, Sector::Even, n, k) * u.get(k.0, k.1))
                .sum();
            assert!((s - w.get(n.0, n.1)).abs() < 1e-14);
        }
    }

    #[test]
    fn hat_matrices_are_symmetric() {
        let v = v();
        for sector in [Sector::Even, Sector::Odd] {
            let idx = sector_indices(IndexBox::new(4, 3), sector);
            let m = mult_matrix_f64(&v, sector, &idx, &idx);
            assert!((&m - m.transpose()).amax() < 1e-14, "{sector:?}");
        }
    }

    #[test]
    fn odd_matrix_matches_pointwise_product() {
        // multiply v(x) by w(x) = sin(πx₁/d₁)cos(πx₂/d₂) and compare sine coefficients
        let v = v();
        let (d1, d2) = (5.0, 4.0);
        let k = (1usize, 1usize);
        let n = (2usize, 1usize);
        let m = 256;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x1 = -d1 + 2.0 * d1 * (i as f64 + 0.5) / m as f64;
                let x2 = -d2 + 2.0 * d2 * (j as f64 + 0.5) / m as f64;
                let w =
                    (std::f64::consts::PI * x1 / d1).sin() * (std::f64::consts::PI * x2 / d2).cos();
                let f = v.eval(x1, x2) * w;
                acc += f
                    * (std::f64::consts::PI * 2.0 * x1 / d1).sin()
                    * (std::f64::consts::PI * x2 / d2).cos();
            }
        }
        // sine coefficient of index n with weight 4: f = Σ 4 F_n sin cos ⇒ F_n = mean(f sin cos)
        let f_n = acc / (m * m) as f64;
        // w has coefficient W_k with 4 W_k = 1
        let expected = mult_entry(&v, Sector::Odd, n, k) * 0.25;
        assert!((f_n - expected).abs() < 1e-12, "{f_n} vs {expected}");
    }
}
