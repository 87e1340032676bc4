//! Target equivalence to polynomial maps into the ball, the generalized ball
//! `B_{1,N−1}`, or the Heisenberg model, for maps of maximal embedding
//! dimension.
//!
//! With `J = e₀e₀*`, `det(C − γJ) = det(C)(1 − γ e₀*C⁻¹e₀)` is affine in `γ`;
//! its zero decides the model.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{HermForm, RANK_TOL};
use crate::linalg;
use crate::monomial::binomial;
use crate::par::{self, Exec};
use crate::poly::{CPoly, PolyMap};
use crate::rational::RationalBallMap;
use crate::sampling;
use crate::C64;

/// `e₀*C⁻¹e₀` below this multiple of `‖C⁻¹‖₂` selects the Heisenberg branch.
pub const HEISENBERG_TOL: f64 = 1e-9;
/// Above the Heisenberg threshold but within this multiple, the verdict is
/// flagged as ambiguous.
pub const AMBIGUITY_BAND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model {
    Ball,
    GeneralizedBall,
    Heisenberg,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyClassification {
    pub model: Model,
    /// `None` for the Heisenberg model.
    pub gamma: Option<f64>,
    #[serde(skip)]
    pub prep: PolyMap,
    #[serde(skip)]
    pub grep: Option<CPoly>,
    pub residual: f64,
    /// The decision sat close to the Heisenberg threshold.
    pub ambiguous: bool,
    #[serde(skip)]
    pub form: HermForm,
}

impl PolyClassification {
    /// Value of the model's defining form at `z`:
    /// `γ(1 − ‖P‖²)`, `|G|² + γ − ‖P‖²`, or `Re G − ‖P‖²`.
    pub fn model_form(&self, z: &[C64]) -> f64 {
        let pp = self.prep.norm_sqr_at(z);
        match self.model {
            Model::Ball => self.gamma.unwrap() * (1.0 - pp),
            Model::GeneralizedBall => {
                let g = self.grep.as_ref().unwrap().eval_unchecked(z);
                g.norm_sqr() + self.gamma.unwrap() - pp
            }
            Model::Heisenberg => self.grep.as_ref().unwrap().eval_unchecked(z).re - pp,
        }
    }
}

/// `binomial(n + d, d) − 1`.
pub fn max_embed_dim(n: usize, d: u32) -> usize {
    binomial(n + d as usize, d as usize) - 1
}

fn factors(
    vecs: &DMatrix<C64>,
    vals: &[f64],
    basis: &crate::MonomialBasis,
    pick: impl Fn(f64) -> Option<f64>,
) -> Vec<CPoly> {
    vals.iter()
        .enumerate()
        .filter_map(|(k, &v)| pick(v).map(|w| (k, w)))
        .map(|(k, w)| {
            let col: Vec<C64> = vecs.column(k).iter().map(|c| c * w.sqrt()).collect();
            CPoly::from_basis_coeffs(basis, &col)
        })
        .collect()
}

pub fn classify_poly_equiv(f: &RationalBallMap) -> Result<PolyClassification> {
    let r = HermForm::underlying_form(f)?;
    classify_form(&r)
}

/// Classification from the underlying form directly.
pub fn classify_form(r: &HermForm) -> Result<PolyClassification> {
    let r = r.normalized()?;
    let basis = r.basis().clone();
    let n = r.nvars();
    let big_n = max_embed_dim(n, r.degree());
    let sig = r.signature(RANK_TOL);
    if sig.pos != 1 || sig.neg != big_n || sig.zero != 0 {
        return Err(Error::NotMaximalEmbedding {
            pos: sig.pos,
            neg: sig.neg,
            zero: sig.zero,
            expected: big_n,
        });
    }
    let c = r.matrix().clone();
    let inv = c
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::FactorizationFailure {
            reason: "coefficient matrix is singular".into(),
            residual: 0.0,
        })?;
    let s = inv[(0, 0)].re;
    let inv_norm = linalg::herm_norm(&inv);
    let cnorm = linalg::herm_norm(&c);
    let cut = RANK_TOL * cnorm;

    let mut cls = if s.abs() < HEISENBERG_TOL * inv_norm {
        let mixed = r.mixed_matrix();
        let (vals, vecs) = linalg::eigh(&mixed);
        let pos = vals.iter().filter(|&&v| v > cut).count();
        let neg = vals.iter().filter(|&&v| v < -cut).count();
        if pos != 0 || neg != big_n - 1 {
            return Err(Error::FactorizationFailure {
                reason: format!(
                    "mixed-term matrix should be negative semidefinite of rank {}, found {pos} positive and {neg} negative eigenvalues",
                    big_n - 1
                ),
                residual: vals[0],
            });
        }
        let prep = factors(&vecs, &vals, &basis, |v| (v < -cut).then_some(-v));
        let grep = &r.pure_part().scale(C64::new(2.0, 0.0)) - &CPoly::one(n);
        PolyClassification {
            model: Model::Heisenberg,
            gamma: None,
            prep: PolyMap::new(n, prep)?,
            grep: Some(grep),
            residual: 0.0,
            ambiguous: false,
            form: r.clone(),
        }
    } else {
        let gamma = 1.0 / s;
        let mut m = c.clone();
        m[(0, 0)] -= C64::new(gamma, 0.0);
        let (vals, vecs) = linalg::eigh(&m);
        let pos = vals.iter().filter(|&&v| v > cut).count();
        let neg = vals.iter().filter(|&&v| v < -cut).count();
        let ambiguous = s.abs() < AMBIGUITY_BAND * inv_norm || gamma.abs() < HEISENBERG_TOL;
        if gamma > 0.0 {
            if pos != 0 || neg != big_n {
                return Err(Error::FactorizationFailure {
                    reason: format!(
                        "C - γJ should have {big_n} negative eigenvalues, found {pos} positive and {neg} negative"
                    ),
                    residual: vals[0] / cnorm,
                });
            }
            let prep = factors(&vecs, &vals, &basis, |v| (v < -cut).then_some(-v / gamma));
            PolyClassification {
                model: Model::Ball,
                gamma: Some(gamma),
                prep: PolyMap::new(n, prep)?,
                grep: None,
                residual: 0.0,
                ambiguous,
                form: r.clone(),
            }
        } else {
            if pos != 1 || neg != big_n - 1 {
                return Err(Error::FactorizationFailure {
                    reason: format!(
                        "C - γJ should have 1 positive and {} negative eigenvalues, found {pos} and {neg}",
                        big_n - 1
                    ),
                    residual: vals[big_n] / cnorm,
                });
            }
            let mut grep = factors(&vecs, &vals, &basis, |v| (v > cut).then_some(v));
            let prep = factors(&vecs, &vals, &basis, |v| (v < -cut).then_some(-v));
            PolyClassification {
                model: Model::GeneralizedBall,
                gamma: Some(gamma),
                prep: PolyMap::new(n, prep)?,
                grep: grep.pop(),
                residual: 0.0,
                ambiguous,
                form: r.clone(),
            }
        }
    };
    cls.residual = verify_representative(&cls, n);
    Ok(cls)
}

/// Largest `|model form − r|` over `1000·n` quasi-random sphere points and
/// the same directions at radius 1/2.
pub fn verify_representative(cls: &PolyClassification, n: usize) -> f64 {
    verify_representative_with(cls, 1000 * n, 0, Exec::default())
}

pub fn verify_representative_with(cls: &PolyClassification, samples: usize, seed: u64, exec: Exec) -> f64 {
    let n = cls.form.nvars();
    let pts = sampling::shell_points(n, samples, seed, &[1.0, 0.5]);
    par::max_of(&pts, exec, |z| (cls.model_form(z) - cls.form.eval_unchecked(z)).abs())
}

/// Residual of a straight-line fit to `det(C − γJ)` at five values of `γ`,
/// relative to the largest determinant.
pub fn det_affinity_residual(r: &HermForm) -> f64 {
    let c = r.matrix();
    let gammas = [-2.0, -1.0, 0.0, 1.5, 3.0];
    let dets: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            let mut m = c.clone();
            m[(0, 0)] -= C64::new(g, 0.0);
            m.lu().determinant().re
        })
        .collect();
    let k = gammas.len() as f64;
    let mx = gammas.iter().sum::<f64>() / k;
    let my = dets.iter().sum::<f64>() / k;
    let sxy: f64 = gammas.iter().zip(&dets).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = gammas.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let scale = dets.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    gammas
        .iter()
        .zip(&dets)
        .map(|(x, y)| (y - (my + slope * (x - mx))).abs())
        .fold(0.0, f64::max)
        / scale
}
