//! Hermitian coefficient matrices of real polynomials `r(z, z̄)`.
//!
//! Entry `C[α, β]` is the coefficient of `z^α z̄^β`, indexed by a
//! [`MonomialBasis`], so `r(z, z̄) = m(z)ᵀ C conj(m(z))` with `m` the vector of
//! basis monomials.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::monomial::{MonomialBasis, MultiIndex};
use crate::poly::{CPoly, PolyMap};
use crate::rational::RationalBallMap;
use crate::C64;

/// Hermiticity tolerance, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-13;
/// Relative residual accepted by [`HermForm::divide_by_sphere`].
pub const DIVISION_TOL: f64 = 1e-11;
/// Default relative tolerance for counting an eigenvalue as zero.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HermForm {
    basis: MonomialBasis,
    c: DMatrix<C64>,
}

/// Inertia of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl HermForm {
    /// Wraps a coefficient matrix, rejecting it if it is not Hermitian.
    pub fn new(basis: MonomialBasis, c: DMatrix<C64>) -> Result<Self> {
        if c.nrows() != basis.len() || c.ncols() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: c.nrows(),
            });
        }
        let residual = linalg::hermitian_residual(&c);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
        Ok(HermForm { basis, c })
    }

    pub(crate) fn from_hermitian_unchecked(basis: MonomialBasis, c: DMatrix<C64>) -> Self {
        let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
        HermForm { basis, c }
    }

    /// Builds `Σ ε_k |h_k(z)|²` for signed squares `(ε_k, h_k)`.
    pub fn from_squares(basis: MonomialBasis, squares: &[(f64, &CPoly)]) -> Self {
        let mut c = DMatrix::zeros(basis.len(), basis.len());
        for (sign, h) in squares {
            let (v, overflow) = h.basis_coeffs(&basis);
            assert!(overflow == 0.0, "square exceeds the basis degree");
            let v = nalgebra::DVector::from_vec(v);
            c += &v * v.adjoint() * C64::new(*sign, 0.0);
        }
        HermForm::from_hermitian_unchecked(basis, c)
    }

    /// Builds a form from coefficients of `z^α z̄^β`; the conjugate entry is
    /// filled in automatically for `α ≠ β` (so pass each off-diagonal pair once).
    pub fn from_terms<I>(n: usize, d: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, MultiIndex, C64)>,
    {
        let basis = MonomialBasis::new(n, d);
        let mut c = DMatrix::zeros(basis.len(), basis.len());
        for (a, b, v) in terms {
            let i = basis.index_of(&a).expect("index outside basis");
            let j = basis.index_of(&b).expect("index outside basis");
            if i == j {
                c[(i, i)] += C64::new(v.re, 0.0);
            } else {
                c[(i, j)] += v;
                c[(j, i)] += v.conj();
            }
        }
        HermForm { basis, c }
    }

    /// `|g|² − ‖p‖²` scaled so that its value at the origin is 1.
    pub fn underlying_form(f: &RationalBallMap) -> Result<Self> {
        let basis = MonomialBasis::new(f.nvars(), f.degree());
        let mut form = HermForm::from_squares(basis, &[(1.0, f.denominator())]);
        for pj in f.numerator().components() {
            let (v, _) = pj.basis_coeffs(&form.basis);
            let v = nalgebra::DVector::from_vec(v);
            form.c -= &v * v.adjoint();
        }
        form.normalized()
    }

    /// Rescales so that `r(0, 0) = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let r00 = self.c[(0, 0)].re;
        if !(r00 > 0.0) || !r00.is_finite() {
            return Err(Error::InvalidMap {
                reason: "|g(0)|^2 - |p(0)|^2 must be positive".into(),
                residual: Some(r00),
            });
        }
        Ok(self.scaled(1.0 / r00))
    }

    pub fn scaled(&self, s: f64) -> Self {
        HermForm {
            basis: self.basis.clone(),
            c: &self.c * C64::new(s, 0.0),
        }
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.c
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars()
    }

    /// Degree of the indexing basis.
    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    /// Largest `|α|` carrying an entry above `1e-14` of the largest entry.
    pub fn bidegree(&self) -> u32 {
        let cut = 1e-14 * linalg::max_abs(&self.c);
        let mut deg = 0;
        for i in 0..self.basis.len() {
            for j in 0..self.basis.len() {
                if self.c[(i, j)].norm() > cut {
                    deg = deg.max(self.basis.get(i).degree());
                }
            }
        }
        deg
    }

    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_residual(&self.c)
    }

    /// Value of `r(z, z̄)`. Fails if the imaginary residual exceeds `1e-12`
    /// of the evaluation scale.
    pub fn eval(&self, z: &[C64]) -> Result<f64> {
        if z.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                got: z.len(),
            });
        }
        let m = self.basis.eval_monomials(z);
        let val = self.quadratic(&m, &m);
        let mass: f64 = m.iter().map(|x| x.norm()).sum();
        let scale = linalg::max_abs(&self.c) * mass * mass;
        if val.im.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian {
                residual: val.im.abs() / scale,
            });
        }
        Ok(val.re)
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> f64 {
        let m = self.basis.eval_monomials(z);
        self.quadratic(&m, &m).re
    }

    /// `aᵀ C conj(b)`.
    pub(crate) fn quadratic(&self, a: &[C64], b: &[C64]) -> C64 {
        let len = self.basis.len();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..len {
            if a[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = C64::new(0.0, 0.0);
            for j in 0..len {
                row += self.c[(i, j)] * b[j].conj();
            }
            acc += a[i] * row;
        }
        acc
    }

    /// Re-indexes the form in the degree-`d` basis. Entries that do not fit
    /// must be negligible.
    pub fn rebase(&self, d: u32) -> Result<Self> {
        if d == self.degree() {
            return Ok(self.clone());
        }
        let basis = MonomialBasis::new(self.nvars(), d);
        let mut c = DMatrix::zeros(basis.len(), basis.len());
        let cut = 1e-14 * linalg::max_abs(&self.c);
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let v = self.c[(i, j)];
                match (basis.index_of(a), basis.index_of(b)) {
                    (Some(ii), Some(jj)) => c[(ii, jj)] = v,
                    _ if v.norm() <= cut => {}
                    _ => return Err(Error::invalid(format!("form has terms beyond bidegree ({d},{d})"))),
                }
            }
        }
        Ok(HermForm { basis, c })
    }

    /// Solves `r = q·(1 − ‖z‖²)` for `q` of one lower bidegree.
    ///
    /// `q[α,β] = c[α,β] + Σ_k q[α−e_k, β−e_k]`, processed in basis order;
    /// the relations with `|α| = d` or `|β| = d` are consistency checks.
    pub fn divide_by_sphere(&self) -> Result<HermForm> {
        let (q, residual) = self.divide_with_residual();
        if residual > DIVISION_TOL {
            return Err(Error::NotDivisible { residual });
        }
        Ok(q)
    }

    /// Quotient and the relative consistency residual, without judging it.
    pub fn divide_with_residual(&self) -> (HermForm, f64) {
        let n = self.nvars();
        let d = self.degree();
        let scale = linalg::max_abs(&self.c).max(f64::MIN_POSITIVE);
        if d == 0 {
            let q = HermForm {
                basis: MonomialBasis::new(n, 0),
                c: DMatrix::zeros(1, 1),
            };
            return (q, self.c[(0, 0)].norm() / scale);
        }
        let qb = MonomialBasis::new(n, d - 1);
        let len = qb.len();
        let mut q: DMatrix<C64> = DMatrix::zeros(len, len);
        for i in 0..len {
            let a = qb.get(i);
            let ia = self.basis.index_of(a).unwrap();
            for j in 0..len {
                let b = qb.get(j);
                let jb = self.basis.index_of(b).unwrap();
                let mut v = self.c[(ia, jb)];
                v += shifted_sum(&qb, &q, a, b);
                q[(i, j)] = v;
            }
        }
        let mut worst: f64 = 0.0;
        for (ia, a) in self.basis.iter().enumerate() {
            for (jb, b) in self.basis.iter().enumerate() {
                if a.degree() < d && b.degree() < d {
                    continue;
                }
                let expected = -shifted_sum(&qb, &q, a, b);
                worst = worst.max((self.c[(ia, jb)] - expected).norm());
            }
        }
        (HermForm::from_hermitian_unchecked(qb, q), worst / scale)
    }

    /// `q·(1 − ‖z‖²)`, one bidegree higher.
    pub fn multiply_by_sphere(&self) -> HermForm {
        let n = self.nvars();
        let rb = MonomialBasis::new(n, self.degree() + 1);
        let len = rb.len();
        let mut c = DMatrix::zeros(len, len);
        for (i, a) in rb.iter().enumerate() {
            for (j, b) in rb.iter().enumerate() {
                let mut v = match (self.basis.index_of(a), self.basis.index_of(b)) {
                    (Some(ii), Some(jj)) => self.c[(ii, jj)],
                    _ => C64::new(0.0, 0.0),
                };
                v -= shifted_sum(&self.basis, &self.c, a, b);
                c[(i, j)] = v;
            }
        }
        HermForm { basis: rb, c }
    }

    /// Inertia with eigenvalues below `tol·‖C‖₂` counted as zero.
    pub fn signature(&self, tol: f64) -> Signature {
        let (vals, _) = linalg::eigh(&self.c);
        let (pos, neg, zero) = linalg::inertia(&vals, tol);
        Signature { pos, neg, zero }
    }

    /// `r(z, 0)`: the pure holomorphic column.
    pub fn pure_part(&self) -> CPoly {
        let col: Vec<C64> = (0..self.basis.len()).map(|i| self.c[(i, 0)]).collect();
        CPoly::from_basis_coeffs(&self.basis, &col)
    }

    /// Coefficient matrix of `r(z,z̄) − r(z,0) − r(0,z̄) + r(0,0)`.
    pub fn mixed_matrix(&self) -> DMatrix<C64> {
        let mut m = self.c.clone();
        for i in 0..self.basis.len() {
            m[(i, 0)] = C64::new(0.0, 0.0);
            m[(0, i)] = C64::new(0.0, 0.0);
        }
        m
    }

    /// Reads off `G = r(z,0)` and a numerator `P` with `P(0) = 0` and
    /// `‖P‖² = |G|² − r`. Components are ordered by decreasing weight.
    pub fn origin_representative(&self) -> Result<(PolyMap, CPoly, f64)> {
        let r = self.normalized()?;
        let len = r.basis.len();
        let gcol: Vec<C64> = (0..len).map(|i| r.c[(i, 0)]).collect();
        let gv = nalgebra::DVector::from_vec(gcol.clone());
        let diff = &gv * gv.adjoint() - &r.c;
        let mixed = diff.view((1, 1), (len - 1, len - 1)).into_owned();
        let scale = linalg::max_abs(&r.c).max(1.0);
        let (factors, min_eig) = linalg::psd_factor(&mixed, RANK_TOL * scale);
        if min_eig < -RANK_TOL * scale {
            return Err(Error::NotPositive { min_eig });
        }
        let mut components = Vec::with_capacity(factors.len());
        for v in &factors {
            let mut coeffs = vec![C64::new(0.0, 0.0)];
            coeffs.extend(v.iter().copied());
            components.push(CPoly::from_basis_coeffs(&r.basis, &coeffs));
        }
        let p = PolyMap::new(r.nvars(), components)?;
        let g = CPoly::from_basis_coeffs(&r.basis, &gcol);

        // reconstruction residual of |G|² − ‖P‖² against r
        let mut rebuilt = HermForm::from_squares(r.basis.clone(), &[(1.0, &g)]);
        for pj in p.components() {
            let (v, _) = pj.basis_coeffs(&r.basis);
            let v = nalgebra::DVector::from_vec(v);
            rebuilt.c -= &v * v.adjoint();
        }
        let residual = linalg::max_abs(&(&rebuilt.c - &r.c)) / scale;
        Ok((p, g, residual))
    }

    pub fn sub(&self, other: &HermForm) -> HermForm {
        assert!(self.basis == other.basis);
        HermForm {
            basis: self.basis.clone(),
            c: &self.c - &other.c,
        }
    }

    pub fn add(&self, other: &HermForm) -> HermForm {
        assert!(self.basis == other.basis);
        HermForm {
            basis: self.basis.clone(),
            c: &self.c + &other.c,
        }
    }

    /// Largest coefficient difference, relative to the larger of the two forms.
    pub fn distance(&self, other: &HermForm) -> f64 {
        let d = self.degree().max(other.degree());
        let a = self.rebase(d).expect("rebase to higher degree");
        let b = other.rebase(d).expect("rebase to higher degree");
        let scale = linalg::max_abs(&a.c).max(linalg::max_abs(&b.c)).max(f64::MIN_POSITIVE);
        linalg::max_abs(&(&a.c - &b.c)) / scale
    }
}

/// `Σ_k M[α−e_k, β−e_k]` over the `k` for which both shifts exist in `basis`.
fn shifted_sum(basis: &MonomialBasis, m: &DMatrix<C64>, a: &MultiIndex, b: &MultiIndex) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..a.nvars() {
        if let (Some(a1), Some(b1)) = (a.decrement(k), b.decrement(k)) {
            if let (Some(i), Some(j)) = (basis.index_of(&a1), basis.index_of(&b1)) {
                acc += m[(i, j)];
            }
        }
    }
    acc
}

/// `1 − ‖z‖²` in `n` variables.
pub fn sphere_form(n: usize) -> HermForm {
    let zero = MultiIndex::zero(n);
    let terms = std::iter::once((zero.clone(), zero, C64::new(1.0, 0.0)))
        .chain((0..n).map(move |k| (MultiIndex::unit(n, k), MultiIndex::unit(n, k), C64::new(-1.0, 0.0))));
    HermForm::from_terms(n, 1, terms)
}
