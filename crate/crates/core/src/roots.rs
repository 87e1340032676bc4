//! Univariate root finding (Aberth–Ehrlich) and a numeric common-root test.

use crate::C64;

/// Trims trailing coefficients below `rel` of the largest one.
pub fn trim(coeffs: &[C64], rel: f64) -> Vec<C64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut v = coeffs.to_vec();
    while v.len() > 1 && v.last().unwrap().norm() <= rel * scale {
        v.pop();
    }
    v
}

pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of `Σ c_k z^k` (coefficients low to high). The leading
/// coefficient must be nonzero.
pub fn roots(coeffs: &[C64]) -> Vec<C64> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return vec![-monic[0]];
    }
    // Cauchy bound for the initial circle
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
            C64::from_polar(0.5 * radius, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut biggest: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = horner_with_derivative(&monic, z[i]);
            if p == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| C64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                biggest = biggest.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if biggest < 1e-15 {
            break;
        }
    }
    z
}

/// Whether every polynomial in `others` vanishes at some root of `base`,
/// relative to the size of its terms at that root.
pub fn common_root(base: &[C64], others: &[Vec<C64>], tol: f64) -> Option<C64> {
    let base = trim(base, 1e-13);
    let others: Vec<Vec<C64>> = others
        .iter()
        .map(|p| trim(p, 1e-13))
        .filter(|p| p.iter().any(|c| c.norm() > 0.0))
        .collect();
    if others.is_empty() {
        return None;
    }
    roots(&base).into_iter().find(|&rho| {
        others.iter().all(|p| {
            let scale: f64 = p
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * rho.norm().powi(k as i32))
                .sum();
            horner(p, rho).norm() <= tol * scale
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn recovers_known_roots() {
        let expected = [c(1.5, 0.0), c(-0.3, 2.0), c(0.0, -1.1), c(3.0, 0.5)];
        // expand Π (z - r_k)
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in expected {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (k, a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        let found = roots(&coeffs);
        for r in expected {
            let best = found.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "missed root {r}");
        }
    }

    #[test]
    fn detects_shared_factor() {
        // g = (1 + z/2)(1 - z/3), p = z (1 + z/2)
        let g = [c(1.0, 0.0), c(1.0 / 6.0, 0.0), c(-1.0 / 6.0, 0.0)];
        let p = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)];
        let root = common_root(&g, &[p], 1e-9).unwrap();
        assert!((root - c(-2.0, 0.0)).norm() < 1e-12);
        let q = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.4, 0.0)];
        assert!(common_root(&g, &[q], 1e-9).is_none());
    }
}
