//! Takagi factorization of complex symmetric matrices: `VᵗCV = diag(σ)` with
//! `V` unitary and `σ ≥ 0` ascending.
//!
//! Uses the real symmetric embedding `M = [[Re C, Im C], [Im C, −Re C]]`:
//! an eigenvector `(x, y)` of `M` for `σ > 0` gives `u = x + iy` with
//! `C ū = σu`, and such vectors are orthonormal over `C`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::C64;

/// Symmetry tolerance, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Singular values below this (times `max(1, ‖C‖)`) are reported as 0.
pub const SIGMA_ZERO: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct Takagi {
    #[serde(skip)]
    pub v: DMatrix<C64>,
    pub sigma: Vec<f64>,
    /// `max |VᵗCV − diag(σ)|`.
    pub residual: f64,
}

pub fn takagi(c: &DMatrix<C64>) -> Result<Takagi> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.ncols(),
        });
    }
    let scale = linalg::max_abs(c);
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (c[(i, j)] - c[(j, i)]).norm())
        .fold(0.0, f64::max);
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { residual: asym / scale });
    }
    let c = (c + c.transpose()) * C64::new(0.5, 0.0);
    if n == 0 {
        return Ok(Takagi {
            v: DMatrix::zeros(0, 0),
            sigma: Vec::new(),
            residual: 0.0,
        });
    }

    let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let x = c[(i % n, j % n)];
        match (bi, bj) {
            (0, 0) => x.re,
            (1, 1) => -x.re,
            _ => x.im,
        }
    });
    let (vals, vecs) = linalg::eigh_real(&m);
    let norm = vals.first().copied().unwrap_or(0.0).abs();
    let cut = SIGMA_ZERO * norm.max(1.0);

    // positive eigenvalues in descending order
    let npos = vals.iter().take(n).filter(|&&v| v > cut).count();
    let column = |k: usize| -> Vec<C64> { (0..n).map(|i| C64::new(vecs[(i, k)], vecs[(n + i, k)])).collect() };
    let mut us: Vec<Vec<C64>> = (0..npos).map(column).collect();
    let mut sigma: Vec<f64> = vals[..npos].to_vec();

    // null space: complex Gram–Schmidt over the near-zero eigenvectors
    if npos < n {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        let candidates = (npos..2 * n - npos).map(column).chain((0..n).map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[i] = C64::new(1.0, 0.0);
            e
        }));
        for mut w in candidates {
            if basis.len() == n - npos {
                break;
            }
            for u in us.iter().chain(basis.iter()) {
                let proj: C64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= proj * ui;
                }
            }
            let nw = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if nw > 0.5 {
                basis.push(w.into_iter().map(|x| x / nw).collect());
            }
        }
        us.extend(basis);
        sigma.extend(std::iter::repeat_n(0.0, n - npos));
    }

    // ascending order
    us.reverse();
    sigma.reverse();
    let v = DMatrix::from_fn(n, n, |i, k| us[k][i].conj());
    let d = v.transpose() * &c * &v;
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let target = if i == j { sigma[i] } else { 0.0 };
            (d[(i, j)] - C64::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    Ok(Takagi { v, sigma, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn check(cm: &DMatrix<C64>) -> Takagi {
        let t = takagi(cm).unwrap();
        let scale = linalg::max_abs(cm).max(1e-300);
        assert!(linalg::unitarity_residual(&t.v) < 1e-12);
        assert!(t.residual < 1e-12 * scale.max(1.0), "residual {}", t.residual);
        let mut sv: Vec<f64> = cm.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        for (a, b) in t.sigma.iter().zip(&sv) {
            assert!((a - b).abs() < 1e-12 * scale.max(1.0), "{a} vs {b}");
        }
        t
    }

    #[test]
    fn diagonal_is_reordered() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)]);
        let t = check(&m);
        assert!((t.sigma[0] - 0.1).abs() < 1e-15 && (t.sigma[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn antidiagonal_has_tied_values() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-0.4, 0.0), c(-0.4, 0.0), c(0.0, 0.0)]);
        let t = check(&m);
        assert!((t.sigma[0] - 0.4).abs() < 1e-15 && (t.sigma[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_and_rank_deficient() {
        check(&DMatrix::zeros(3, 3));
        let u = [c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0)];
        let m = DMatrix::from_fn(3, 3, |i, j| u[i] * u[j]);
        let t = check(&m);
        assert_eq!(t.sigma[0], 0.0);
        assert_eq!(t.sigma[1], 0.0);
    }

    #[test]
    fn random_symmetric_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..20 {
                let a = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                check(&(&a + a.transpose()));
            }
        }
    }

    #[test]
    fn rejects_non_symmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(takagi(&m), Err(Error::NotSymmetric { .. })));
    }
}
