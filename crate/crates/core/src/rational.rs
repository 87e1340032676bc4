//! Rational maps `p/g` of the ball and their validation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{HermForm, Signature, RANK_TOL};
use crate::monomial::binomial;
use crate::par::{self, Exec};
use crate::poly::{CPoly, PolyMap};
use crate::roots;
use crate::sampling;
use crate::C64;

/// A rational map `p/g : Cⁿ → C^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalBallMap {
    p: PolyMap,
    g: CPoly,
    d: u32,
}

impl RationalBallMap {
    /// Structural checks only: dimensions, `g(0) ≠ 0`, `deg g ≤ deg p`.
    /// Sampling-based checks live in [`validate`].
    pub fn new(p: PolyMap, g: CPoly) -> Result<Self> {
        if g.nvars() != p.nvars() {
            return Err(Error::DimensionMismatch {
                expected: p.nvars(),
                got: g.nvars(),
            });
        }
        if p.target_dim() == 0 {
            return Err(Error::invalid("numerator has no components"));
        }
        let g0 = g.constant_term();
        if g0.norm() <= 1e-12 * g.max_abs_coeff().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidMap {
                reason: "denominator vanishes at the origin".into(),
                residual: Some(g0.norm()),
            });
        }
        if g.degree() > p.degree() {
            return Err(Error::invalid(format!(
                "denominator degree {} exceeds numerator degree {}",
                g.degree(),
                p.degree()
            )));
        }
        let d = p.degree().max(g.degree());
        Ok(RationalBallMap { p, g, d })
    }

    /// A polynomial map, denominator 1.
    pub fn polynomial(p: PolyMap) -> Result<Self> {
        let n = p.nvars();
        RationalBallMap::new(p, CPoly::one(n))
    }

    pub fn numerator(&self) -> &PolyMap {
        &self.p
    }

    pub fn denominator(&self) -> &CPoly {
        &self.g
    }

    pub fn nvars(&self) -> usize {
        self.p.nvars()
    }

    pub fn target_dim(&self) -> usize {
        self.p.target_dim()
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        let num = self.p.eval(z)?;
        let den = self.g.eval_unchecked(z);
        Ok(num.into_iter().map(|c| c / den).collect())
    }

    /// Same map with `g(0) = 1`.
    pub fn normalized(&self) -> RationalBallMap {
        let s = C64::new(1.0, 0.0) / self.g.constant_term();
        RationalBallMap {
            p: self.p.scale(s),
            g: self.g.scale(s),
            d: self.d,
        }
    }

    /// Appends zero components up to `target` components.
    pub fn padded(&self, target: usize) -> RationalBallMap {
        RationalBallMap {
            p: self.p.padded(target),
            g: self.g.clone(),
            d: self.d,
        }
    }

    /// Largest `|‖f(z)‖² − 1|` over the given points.
    pub fn sphere_residual(&self, points: &[Vec<C64>], exec: Exec) -> f64 {
        par::max_of(points, exec, |z| {
            let den = self.g.eval_unchecked(z).norm_sqr();
            (self.p.norm_sqr_at(z) / den - 1.0).abs()
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    /// Quasi-random sphere points per source dimension.
    pub samples_per_dim: usize,
    /// Halton offset for the sample sequence.
    pub seed: u64,
    pub rank_tol: f64,
    pub exec: Exec,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            samples_per_dim: 1000,
            seed: 0,
            rank_tol: RANK_TOL,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LowestTerms {
    /// No common factor found by the heuristic.
    Verified { method: String },
    /// A numeric common root was found.
    CommonFactorSuspected { method: String, detail: String },
}

impl LowestTerms {
    pub fn is_verified(&self) -> bool {
        matches!(self, LowestTerms::Verified { .. })
    }
}

/// Restricted quadratic coefficients `g₂` on complex lines through 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadraticBound {
    /// Largest `|g₂| / (k/2)` with `k` the restricted degree.
    pub max_ratio: f64,
    pub lines: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub target_dim: usize,
    pub degree: u32,
    pub min_abs_denominator: f64,
    pub division_residual: f64,
    pub min_quotient_on_sphere: f64,
    pub sphere_residual: f64,
    pub signature: Signature,
    pub lowest_terms: LowestTerms,
    /// Present when the normalized denominator has no linear term.
    pub quadratic_bound: Option<QuadraticBound>,
}

/// Full validation: nonvanishing denominator on the closed ball, divisibility
/// of the underlying form by `1 − ‖z‖²`, positive quotient on the sphere,
/// the restricted quadratic-coefficient bound, and a lowest-terms heuristic
/// (reported, not enforced).
pub fn validate(f: &RationalBallMap, opts: &ValidationOptions) -> Result<ValidationReport> {
    let n = f.nvars();
    let count = opts.samples_per_dim * n;
    let ball = sampling::shell_points(n, count, opts.seed, &sampling::BALL_RADII);
    let g = f.denominator();
    let gscale: f64 = g.terms().map(|(_, c)| c.norm()).sum();
    let min_g = par::min_of(&ball, opts.exec, |z| g.eval_unchecked(z).norm());
    if !(min_g > 1e-10 * gscale) {
        return Err(Error::InvalidMap {
            reason: "denominator vanishes on the closed ball".into(),
            residual: Some(min_g),
        });
    }

    let r = HermForm::underlying_form(f)?;
    let (q, division_residual) = r.divide_with_residual();
    if division_residual > crate::form::DIVISION_TOL {
        return Err(Error::NotDivisible {
            residual: division_residual,
        });
    }
    let sphere = sampling::sphere_points(n, count, opts.seed);
    let min_q = par::min_of(&sphere, opts.exec, |z| q.eval_unchecked(z));
    if !(min_q > 0.0) {
        return Err(Error::InvalidMap {
            reason: "quotient form is not positive on the sphere".into(),
            residual: Some(min_q),
        });
    }
    let sphere_residual = f.sphere_residual(&sphere, opts.exec);

    let quadratic_bound = quadratic_bound(g, &sphere);
    if let Some(b) = quadratic_bound {
        if !(b.max_ratio < 1.0) {
            return Err(Error::InvalidMap {
                reason: "restricted quadratic coefficient of the denominator reaches k/2".into(),
                residual: Some(b.max_ratio),
            });
        }
    }

    Ok(ValidationReport {
        n,
        target_dim: f.target_dim(),
        degree: f.degree(),
        min_abs_denominator: min_g,
        division_residual,
        min_quotient_on_sphere: min_q,
        sphere_residual,
        signature: r.signature(opts.rank_tol),
        lowest_terms: lowest_terms(f, &r, opts),
        quadratic_bound,
    })
}

/// `|g₂(v)|/(k(v)/2)` over directions `v`, where `g(tv)/g(0) = 1 + g₂ t² + …`
/// has degree `k(v)`. `None` if `g` has a linear term.
pub fn quadratic_bound(g: &CPoly, directions: &[Vec<C64>]) -> Option<QuadraticBound> {
    let g = g.scale(C64::new(1.0, 0.0) / g.constant_term());
    let linear = g.homogeneous_part(1);
    if linear.max_abs_coeff() > 1e-9 {
        return None;
    }
    let parts: Vec<CPoly> = (0..=g.degree()).map(|k| g.homogeneous_part(k)).collect();
    let mut max_ratio: f64 = 0.0;
    for v in directions {
        let coeffs: Vec<C64> = parts.iter().map(|h| h.eval_unchecked(v)).collect();
        let g2 = coeffs.get(2).copied().unwrap_or_default();
        if g2.norm() <= 1e-14 {
            continue;
        }
        let k = coeffs.iter().rposition(|c| c.norm() > 1e-12).unwrap_or(0);
        max_ratio = max_ratio.max(g2.norm() / (k as f64 / 2.0));
    }
    Some(QuadraticBound {
        max_ratio,
        lines: directions.len(),
    })
}

/// Lowest-terms heuristic. `n = 1`: common roots of `g` and all `p_j`.
/// `n > 1`: rank of the underlying form, then common roots along
/// pseudo-random complex lines.
pub fn lowest_terms(f: &RationalBallMap, r: &HermForm, opts: &ValidationOptions) -> LowestTerms {
    let n = f.nvars();
    let d = f.degree();
    if d == 0 {
        return LowestTerms::Verified {
            method: "constant map".into(),
        };
    }
    if n == 1 {
        let basis = crate::monomial::MonomialBasis::new(1, d);
        let (g, _) = f.denominator().basis_coeffs(&basis);
        let ps: Vec<Vec<C64>> = f
            .numerator()
            .components()
            .iter()
            .map(|p| p.basis_coeffs(&basis).0)
            .collect();
        return match roots::common_root(&g, &ps, 1e-9) {
            None => LowestTerms::Verified {
                method: "univariate common roots".into(),
            },
            Some(z) => LowestTerms::CommonFactorSuspected {
                method: "univariate common roots".into(),
                detail: format!("common root at {z}"),
            },
        };
    }
    let sig = r.signature(opts.rank_tol);
    let rank = sig.pos + sig.neg;
    let lower = binomial(n + d as usize - 1, d as usize - 1);
    if rank > lower {
        return LowestTerms::Verified {
            method: format!("rank {rank} exceeds {lower}"),
        };
    }
    // lines z = a + t b through pseudo-random points
    let pts = sampling::sphere_points(n, 4, opts.seed + 17);
    for pair in pts.chunks(2) {
        let a: Vec<C64> = pair[0].iter().map(|c| c * 0.37).collect();
        let b = &pair[1];
        let line: Vec<CPoly> = (0..n)
            .map(|k| {
                CPoly::from_terms(
                    1,
                    [
                        (crate::monomial::MultiIndex::new(vec![0]), a[k]),
                        (crate::monomial::MultiIndex::new(vec![1]), b[k]),
                    ],
                )
            })
            .collect();
        let basis = crate::monomial::MonomialBasis::new(1, d);
        let g = f.denominator().compose(&line).basis_coeffs(&basis).0;
        let ps: Vec<Vec<C64>> = f
            .numerator()
            .components()
            .iter()
            .map(|p| p.compose(&line).basis_coeffs(&basis).0)
            .collect();
        if roots::common_root(&g, &ps, 1e-9).is_none() {
            return LowestTerms::Verified {
                method: "line restrictions".into(),
            };
        }
    }
    LowestTerms::CommonFactorSuspected {
        method: "line restrictions".into(),
        detail: format!("rank {rank} at most {lower} and common roots on every tested line"),
    }
}
