//! Automorphisms `U∘φ_α` of the unit ball and their action on points, maps
//! and underlying forms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::form::HermForm;
use crate::linalg;
use crate::monomial::{MonomialBasis, MultiIndex};
use crate::poly::{CPoly, PolyMap};
use crate::rational::RationalBallMap;
use crate::C64;

/// `z ↦ U φ_α(z)` with `φ_α(z) = (α − L_α z)/(1 − ⟨z, α⟩)`.
///
/// `φ_0 = −z`, so the identity is `(α = 0, U = −I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallAutomorphism {
    alpha: Vec<C64>,
    u: DMatrix<C64>,
}

impl BallAutomorphism {
    /// `φ_α` with `U = I`.
    pub fn phi(alpha: &[C64]) -> Result<Self> {
        let n = alpha.len();
        BallAutomorphism::new(alpha, DMatrix::identity(n, n))
    }

    pub fn new(alpha: &[C64], u: DMatrix<C64>) -> Result<Self> {
        let norm = vec_norm(alpha);
        if !(norm < 1.0) {
            return Err(Error::OutsideBall { norm });
        }
        if u.nrows() != alpha.len() || u.ncols() != alpha.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                got: u.nrows(),
            });
        }
        let res = linalg::unitarity_residual(&u);
        if res > 1e-12 {
            return Err(Error::invalid(format!("matrix is not unitary (residual {res:.3e})")));
        }
        Ok(BallAutomorphism {
            alpha: alpha.to_vec(),
            u,
        })
    }

    pub fn identity(n: usize) -> Self {
        BallAutomorphism {
            alpha: vec![C64::new(0.0, 0.0); n],
            u: -DMatrix::<C64>::identity(n, n),
        }
    }

    /// A unitary map `z ↦ Vz`, written as `(−V)∘φ_0`.
    pub fn unitary(v: DMatrix<C64>) -> Result<Self> {
        let n = v.nrows();
        BallAutomorphism::new(&vec![C64::new(0.0, 0.0); n], -v)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }

    pub fn unitary_part(&self) -> &DMatrix<C64> {
        &self.u
    }

    /// `L_α = sI + αα*/(1 + s)`, `s = √(1 − ‖α‖²)`.
    pub fn l_matrix(&self) -> DMatrix<C64> {
        l_matrix(&self.alpha)
    }

    /// `U φ_α(z)`.
    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let l = self.l_matrix();
        let n = self.dim();
        let den = C64::new(1.0, 0.0) - inner(z, &self.alpha);
        let phi: Vec<C64> = (0..n)
            .map(|k| {
                let lz: C64 = (0..n).map(|j| l[(k, j)] * z[j]).sum();
                (self.alpha[k] - lz) / den
            })
            .collect();
        Ok((0..n).map(|k| (0..n).map(|j| self.u[(k, j)] * phi[j]).sum()).collect())
    }

    /// Affine numerator components `U(α − L_α z)`.
    pub fn numerator(&self) -> Vec<CPoly> {
        let n = self.dim();
        let l = self.l_matrix();
        let ul = &self.u * &l;
        let ua: Vec<C64> = (0..n)
            .map(|k| (0..n).map(|j| self.u[(k, j)] * self.alpha[j]).sum())
            .collect();
        (0..n)
            .map(|k| {
                let terms = std::iter::once((MultiIndex::zero(n), ua[k]))
                    .chain((0..n).map(|j| (MultiIndex::unit(n, j), -ul[(k, j)])));
                CPoly::from_terms(n, terms)
            })
            .collect()
    }

    /// `1 − ⟨z, α⟩`.
    pub fn denominator(&self) -> CPoly {
        let n = self.dim();
        let terms = std::iter::once((MultiIndex::zero(n), C64::new(1.0, 0.0)))
            .chain((0..n).map(|j| (MultiIndex::unit(n, j), -self.alpha[j].conj())));
        CPoly::from_terms(n, terms)
    }
}

/// `φ_α` with `U = I`; shorthand for [`BallAutomorphism::phi`].
pub fn phi(alpha: &[C64]) -> Result<BallAutomorphism> {
    BallAutomorphism::phi(alpha)
}

pub(crate) fn vec_norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨z, w⟩ = Σ z_j w̄_j`.
pub(crate) fn inner(z: &[C64], w: &[C64]) -> C64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn l_matrix(alpha: &[C64]) -> DMatrix<C64> {
    let n = alpha.len();
    let a2: f64 = alpha.iter().map(|c| c.norm_sqr()).sum();
    let s = (1.0 - a2).sqrt();
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { s } else { 0.0 };
        C64::new(diag, 0.0) + alpha[i] * alpha[j].conj() / (1.0 + s)
    })
}

/// `∂(φ_α)_k/∂z_j` at `z = 0`, which is `−L_α + αα*`.
pub fn phi_jacobian_at_origin(alpha: &[C64]) -> DMatrix<C64> {
    let l = l_matrix(alpha);
    DMatrix::from_fn(alpha.len(), alpha.len(), |k, j| -l[(k, j)] + alpha[k] * alpha[j].conj())
}

/// `T[γ, β]`: coefficient of `z^γ` in `N(z)^β D(z)^{d−|β|}`, both indices
/// in the degree-`d` basis. Then `|D|^{2d} r(N/D)` has matrix `T C T*`.
pub fn composition_matrix(basis: &MonomialBasis, num: &[CPoly], den: &CPoly) -> DMatrix<C64> {
    let d = basis.degree();
    let len = basis.len();
    let mut t = DMatrix::zeros(len, len);
    for (j, beta) in basis.iter().enumerate() {
        let mono = CPoly::from_terms(basis.nvars(), [(beta.clone(), C64::new(1.0, 0.0))]);
        let img = mono.homogenized_compose(num, den, d);
        let (col, overflow) = img.basis_coeffs(basis);
        debug_assert!(overflow == 0.0);
        for (i, v) in col.into_iter().enumerate() {
            t[(i, j)] = v;
        }
    }
    t
}

/// `|1 − ⟨z, α⟩|^{2d} r(ψ(z)) / r(ψ(0))` for `ψ = U∘φ_α`, as a form of the
/// same bidegree.
pub fn pullback(r: &HermForm, psi: &BallAutomorphism) -> Result<HermForm> {
    if psi.dim() != r.nvars() {
        return Err(Error::DimensionMismatch {
            expected: r.nvars(),
            got: psi.dim(),
        });
    }
    let t = composition_matrix(r.basis(), &psi.numerator(), &psi.denominator());
    let c = &t * r.matrix() * t.adjoint();
    let r0 = c[(0, 0)].re;
    if !(r0 > 0.0) {
        return Err(Error::InvalidMap {
            reason: "form is not positive at the automorphism's base point".into(),
            residual: Some(r0),
        });
    }
    Ok(HermForm::from_hermitian_unchecked(
        r.basis().clone(),
        c * C64::new(1.0 / r0, 0.0),
    ))
}

/// Pullback of `r` by `φ_α` at bidegree `d`, normalized so `R(0,0) = 1`.
pub fn pullback_form(r: &HermForm, alpha: &[C64], d: u32) -> Result<HermForm> {
    let r = r.rebase(d)?;
    pullback(&r, &BallAutomorphism::phi(alpha)?)
}

/// Rescales `(p, g)` so that `|g(0)|² − ‖p(0)‖² = 1` and `g(0)` is real positive.
fn renormalize(p: PolyMap, g: CPoly) -> Result<RationalBallMap> {
    let g0 = g.constant_term();
    let p0: f64 = p.components().iter().map(|c| c.constant_term().norm_sqr()).sum();
    let val = g0.norm_sqr() - p0;
    if !(val > 0.0) {
        return Err(Error::InvalidMap {
            reason: "image of the origin is not inside the ball".into(),
            residual: Some(val),
        });
    }
    let s = g0.conj() / (g0.norm() * val.sqrt());
    RationalBallMap::new(p.scale(s), g.scale(s))
}

/// `f∘ψ` with denominators cleared by `(1 − ⟨z, α⟩)^d`.
pub fn precompose(f: &RationalBallMap, psi: &BallAutomorphism) -> Result<RationalBallMap> {
    if psi.dim() != f.nvars() {
        return Err(Error::DimensionMismatch {
            expected: f.nvars(),
            got: psi.dim(),
        });
    }
    let d = f.degree();
    let num = psi.numerator();
    let den = psi.denominator();
    let comps = f
        .numerator()
        .components()
        .iter()
        .map(|c| c.homogenized_compose(&num, &den, d))
        .collect();
    let g = f.denominator().homogenized_compose(&num, &den, d);
    renormalize(PolyMap::new(f.nvars(), comps)?, g)
}

/// `τ∘f` for a target automorphism `τ = U∘φ_β` of `B_N`:
/// numerator `U(βg − L_β p)`, denominator `g − ⟨p, β⟩`.
pub fn postcompose(f: &RationalBallMap, tau: &BallAutomorphism) -> Result<RationalBallMap> {
    if tau.dim() != f.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.target_dim(),
            got: tau.dim(),
        });
    }
    let big_n = tau.dim();
    let beta = tau.alpha();
    let l = tau.l_matrix();
    let p = f.numerator().components();
    let g = f.denominator();
    let inner_part: Vec<CPoly> = (0..big_n)
        .map(|k| {
            let mut acc = g.scale(beta[k]);
            for j in 0..big_n {
                acc = &acc - &p[j].scale(l[(k, j)]);
            }
            acc
        })
        .collect();
    let pm = PolyMap::new(f.nvars(), inner_part)?.apply_target(tau.unitary_part());
    let mut den = g.clone();
    for j in 0..big_n {
        den = &den - &p[j].scale(beta[j].conj());
    }
    renormalize(pm, den)
}
