//! Deterministic quasi-random points on the unit sphere and in the closed
//! unit ball of `Cⁿ`.

use crate::C64;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// `count` points on the unit sphere `S^{2n-1}`: Halton samples in `2n`
/// dimensions pushed through Box–Muller and normalized. `offset` shifts the
/// Halton index, which is how callers thread a seed through.
pub fn sphere_points(n: usize, count: usize, offset: u64) -> Vec<Vec<C64>> {
    assert!(2 * n <= PRIMES.len(), "sphere sampling supports n <= 8");
    (0..count)
        .map(|i| {
            let idx = offset + i as u64 + 1;
            let mut z: Vec<C64> = (0..n)
                .map(|k| {
                    let u1 = halton(idx, PRIMES[2 * k]).max(1e-300);
                    let u2 = halton(idx, PRIMES[2 * k + 1]);
                    let rad = (-2.0 * u1.ln()).sqrt();
                    let th = std::f64::consts::TAU * u2;
                    C64::new(rad * th.cos(), rad * th.sin())
                })
                .collect();
            let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                z[0] = C64::new(1.0, 0.0);
            } else {
                for c in z.iter_mut() {
                    *c /= norm;
                }
            }
            z
        })
        .collect()
}

/// Sphere directions scaled by each radius in `radii`.
pub fn shell_points(n: usize, count: usize, offset: u64, radii: &[f64]) -> Vec<Vec<C64>> {
    let dirs = sphere_points(n, count, offset);
    radii
        .iter()
        .flat_map(|&r| dirs.iter().map(move |z| z.iter().map(|c| c * r).collect::<Vec<_>>()))
        .collect()
}

/// Radii used for closed-ball checks, including the sphere itself.
pub const BALL_RADII: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base_two() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
    }

    #[test]
    fn sphere_points_are_unit_and_deterministic() {
        let a = sphere_points(3, 200, 7);
        let b = sphere_points(3, 200, 7);
        assert_eq!(a, b);
        for z in &a {
            let r: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_points_cover_all_directions() {
        // every coordinate hyperplane side gets hit
        let pts = sphere_points(2, 1000, 0);
        for k in 0..2 {
            assert!(pts.iter().any(|z| z[k].re > 0.5));
            assert!(pts.iter().any(|z| z[k].re < -0.5));
            assert!(pts.iter().any(|z| z[k].im > 0.5));
            assert!(pts.iter().any(|z| z[k].im < -0.5));
        }
    }
}
