//! Sparse multivariate polynomials with complex coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::monomial::{monomial_from_table, power_table, MonomialBasis, MultiIndex};
use crate::C64;

/// Coefficients below this fraction of the largest one are dropped.
pub const PRUNE_REL: f64 = 1e-14;

/// Holomorphic polynomial `Cⁿ → C` stored as a sparse map from exponent
/// vectors to coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    n: usize,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl CPoly {
    pub fn zero(n: usize) -> Self {
        CPoly {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        let mut p = CPoly::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    pub fn one(n: usize) -> Self {
        CPoly::constant(n, C64::new(1.0, 0.0))
    }

    /// The coordinate function `z_k`.
    pub fn var(n: usize, k: usize) -> Self {
        CPoly::from_terms(n, [(MultiIndex::unit(n, k), C64::new(1.0, 0.0))])
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, C64)>,
    {
        let mut p = CPoly::zero(n);
        for (a, c) in terms {
            assert_eq!(a.nvars(), n, "exponent vector length must equal n");
            p.add_term(a, c);
        }
        p.prune();
        p
    }

    /// Coefficients given densely in basis order.
    pub fn from_basis_coeffs(basis: &MonomialBasis, coeffs: &[C64]) -> Self {
        assert_eq!(basis.len(), coeffs.len());
        CPoly::from_terms(basis.nvars(), basis.iter().cloned().zip(coeffs.iter().copied()))
    }

    /// Dense coefficient vector in basis order. Terms outside the basis are
    /// reported through the returned overflow magnitude.
    pub fn basis_coeffs(&self, basis: &MonomialBasis) -> (Vec<C64>, f64) {
        let mut v = vec![C64::new(0.0, 0.0); basis.len()];
        let mut overflow: f64 = 0.0;
        for (a, c) in &self.coeffs {
            match basis.index_of(a) {
                Some(i) => v[i] = *c,
                None => overflow = overflow.max(c.norm()),
            }
        }
        (v, overflow)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        *self.coeffs.entry(alpha).or_insert(C64::new(0.0, 0.0)) += c;
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn constant_term(&self) -> C64 {
        self.coeff(&MultiIndex::zero(self.n))
    }

    /// Largest total degree among stored terms; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients below `PRUNE_REL` times the largest one.
    pub fn prune(&mut self) {
        self.prune_below(PRUNE_REL);
    }

    pub fn prune_below(&mut self, rel: f64) {
        let cut = rel * self.max_abs_coeff();
        self.coeffs.retain(|_, c| c.norm() > cut && *c != C64::new(0.0, 0.0));
    }

    /// Drops coefficients whose modulus is at most `abs`.
    pub fn prune_abs(&mut self, abs: f64) {
        self.coeffs.retain(|_, c| c.norm() > abs);
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        let pw = power_table(z, self.degree());
        self.eval_with_table(&pw)
    }

    pub(crate) fn eval_with_table(&self, pw: &[Vec<C64>]) -> C64 {
        self.coeffs.iter().map(|(a, c)| c * monomial_from_table(pw, a)).sum()
    }

    pub fn scale(&self, s: C64) -> CPoly {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= s;
        }
        out.prune();
        out
    }

    pub fn pow(&self, k: u32) -> CPoly {
        let mut acc = CPoly::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `∂/∂z_k`.
    pub fn derivative(&self, k: usize) -> CPoly {
        let terms = self.coeffs.iter().filter_map(|(a, c)| {
            let e = a.exponents()[k];
            a.decrement(k).map(|b| (b, c * e as f64))
        });
        CPoly::from_terms(self.n, terms)
    }

    /// Terms of total degree exactly `k`.
    pub fn homogeneous_part(&self, k: u32) -> CPoly {
        CPoly {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(a, _)| a.degree() == k)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// Substitutes `z_k ← h[k](w)`. The `h` may live in a different number of
    /// variables.
    pub fn compose(&self, h: &[CPoly]) -> CPoly {
        assert_eq!(h.len(), self.n);
        let m = h.first().map(|p| p.n).unwrap_or(self.n);
        let powers = PowerCache::new(h, self.degree());
        let mut out = CPoly::zero(m);
        for (a, c) in &self.coeffs {
            let term = powers.monomial(a).scale(*c);
            out = &out + &term;
        }
        out.prune();
        out
    }

    /// `Σ_α c_α N(w)^α D(w)^{d-|α|}`: composition with the linear fractional
    /// map `N/D`, cleared of denominators at degree `d`.
    pub fn homogenized_compose(&self, num: &[CPoly], den: &CPoly, d: u32) -> CPoly {
        assert_eq!(num.len(), self.n);
        assert!(self.degree() <= d, "degree exceeds homogenization degree");
        let powers = PowerCache::new(num, d);
        let den_pows: Vec<CPoly> = {
            let mut v = vec![CPoly::one(den.n)];
            for k in 0..d as usize {
                let next = &v[k] * den;
                v.push(next);
            }
            v
        };
        let mut out = CPoly::zero(den.n);
        for (a, c) in &self.coeffs {
            let term = &powers.monomial(a) * &den_pows[(d - a.degree()) as usize];
            out = &out + &term.scale(*c);
        }
        out.prune();
        out
    }

    /// `z ↦ p(Vz)` for a square matrix `V`.
    pub fn linear_substitute(&self, v: &DMatrix<C64>) -> CPoly {
        self.compose(&linear_forms(v))
    }
}

/// Rows of `V` as linear polynomials: the k-th entry is `Σ_j V_kj z_j`.
pub(crate) fn linear_forms(v: &DMatrix<C64>) -> Vec<CPoly> {
    let n = v.ncols();
    (0..v.nrows())
        .map(|k| CPoly::from_terms(n, (0..n).map(|j| (MultiIndex::unit(n, j), v[(k, j)]))))
        .collect()
}

struct PowerCache {
    // pows[k][e] = h_k^e
    pows: Vec<Vec<CPoly>>,
    m: usize,
}

impl PowerCache {
    fn new(h: &[CPoly], d: u32) -> Self {
        let m = h.first().map(|p| p.n).unwrap_or(1);
        let pows = h
            .iter()
            .map(|hk| {
                let mut v = vec![CPoly::one(m)];
                for e in 0..d as usize {
                    let next = &v[e] * hk;
                    v.push(next);
                }
                v
            })
            .collect();
        PowerCache { pows, m }
    }

    fn monomial(&self, a: &MultiIndex) -> CPoly {
        let mut acc = CPoly::one(self.m);
        for (k, &e) in a.exponents().iter().enumerate() {
            if e > 0 {
                acc = &acc * &self.pows[k][e as usize];
            }
        }
        acc
    }
}

impl<'a> Add<&'a CPoly> for &'a CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (a, c) in &rhs.coeffs {
            out.add_term(a.clone(), *c);
        }
        out.prune();
        out
    }
}

impl<'a> Sub<&'a CPoly> for &'a CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        self + &(-rhs)
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        CPoly {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), -c)).collect(),
        }
    }
}

impl<'a> Mul<&'a CPoly> for &'a CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        assert_eq!(self.n, rhs.n);
        let mut out = CPoly::zero(self.n);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &rhs.coeffs {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out.prune();
        out
    }
}

/// Polynomial map `Cⁿ → C^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    n: usize,
    components: Vec<CPoly>,
}

impl PolyMap {
    pub fn new(n: usize, components: Vec<CPoly>) -> Result<Self> {
        for c in &components {
            if c.nvars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.nvars(),
                });
            }
        }
        Ok(PolyMap { n, components })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[CPoly] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(CPoly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> Vec<C64> {
        let pw = power_table(z, self.degree());
        self.components.iter().map(|c| c.eval_with_table(&pw)).collect()
    }

    /// `‖p(z)‖²`.
    pub fn norm_sqr_at(&self, z: &[C64]) -> f64 {
        self.eval_unchecked(z).iter().map(|c| c.norm_sqr()).sum()
    }

    /// Applies a target matrix: component `i` becomes `Σ_j U_ij p_j`.
    pub fn apply_target(&self, u: &DMatrix<C64>) -> PolyMap {
        assert_eq!(u.ncols(), self.components.len());
        let components = (0..u.nrows())
            .map(|i| {
                self.components
                    .iter()
                    .enumerate()
                    .fold(CPoly::zero(self.n), |acc, (j, pj)| &acc + &pj.scale(u[(i, j)]))
            })
            .collect();
        PolyMap { n: self.n, components }
    }

    pub fn linear_substitute(&self, v: &DMatrix<C64>) -> PolyMap {
        let forms = linear_forms(v);
        PolyMap {
            n: self.n,
            components: self.components.iter().map(|c| c.compose(&forms)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> PolyMap {
        PolyMap {
            n: self.n,
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// `N × |basis|` matrix whose row `j` holds the coefficients of `p_j`.
    pub fn coeff_matrix(&self, basis: &MonomialBasis) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.components.len(), basis.len());
        for (j, c) in self.components.iter().enumerate() {
            let (v, _) = c.basis_coeffs(basis);
            for (i, x) in v.into_iter().enumerate() {
                m[(j, i)] = x;
            }
        }
        m
    }

    pub fn from_coeff_matrix(basis: &MonomialBasis, m: &DMatrix<C64>) -> PolyMap {
        let components = (0..m.nrows())
            .map(|j| {
                let row: Vec<C64> = (0..m.ncols()).map(|i| m[(j, i)]).collect();
                CPoly::from_basis_coeffs(basis, &row)
            })
            .collect();
        PolyMap {
            n: basis.nvars(),
            components,
        }
    }

    /// Appends identically zero components until the map has `target` of them.
    pub fn padded(&self, target: usize) -> PolyMap {
        let mut components = self.components.clone();
        while components.len() < target {
            components.push(CPoly::zero(self.n));
        }
        PolyMap { n: self.n, components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn evaluates_simple_univariate_polys() {
        let g = CPoly::from_terms(1, [(mi(&[0]), c(1.0, 0.0)), (mi(&[2]), c(0.5, 0.0))]);
        let v = g.eval(&[c(0.0, 1.0)]).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);

        let p = CPoly::from_terms(1, [(mi(&[1]), c(0.5, 0.0)), (mi(&[3]), c(1.0, 0.0))]);
        let v = p.eval(&[c(1.0, 0.0)]).unwrap();
        assert!((v - c(1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let g = CPoly::one(2);
        assert!(matches!(
            g.eval(&[c(0.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn prune_drops_relative_noise() {
        let p = CPoly::from_terms(1, [(mi(&[0]), c(1.0, 0.0)), (mi(&[1]), c(1e-17, 0.0))]);
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn arithmetic_matches_pointwise() {
        let n = 2;
        let p = CPoly::from_terms(
            n,
            [
                (mi(&[0, 0]), c(1.0, 0.5)),
                (mi(&[1, 1]), c(-0.3, 0.2)),
                (mi(&[0, 2]), c(0.7, 0.0)),
            ],
        );
        let q = CPoly::from_terms(n, [(mi(&[1, 0]), c(0.2, -1.0)), (mi(&[0, 1]), c(2.0, 0.0))]);
        let z = [c(0.3, -0.2), c(-0.1, 0.4)];
        let pv = p.eval(&z).unwrap();
        let qv = q.eval(&z).unwrap();
        assert!(((&p * &q).eval(&z).unwrap() - pv * qv).norm() < 1e-14);
        assert!(((&p + &q).eval(&z).unwrap() - (pv + qv)).norm() < 1e-14);
        assert!(((&p - &q).eval(&z).unwrap() - (pv - qv)).norm() < 1e-14);
        assert!((p.pow(3).eval(&z).unwrap() - pv * pv * pv).norm() < 1e-14);
    }

    #[test]
    fn derivative_and_compose() {
        // p = z1^2 z2 + 3 z2
        let p = CPoly::from_terms(2, [(mi(&[2, 1]), c(1.0, 0.0)), (mi(&[0, 1]), c(3.0, 0.0))]);
        let dp = p.derivative(0);
        assert_eq!(dp.coeff(&mi(&[1, 1])), c(2.0, 0.0));
        assert_eq!(dp.terms().count(), 1);

        let v = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, -1.0)]);
        let z = [c(0.2, 0.1), c(-0.4, 0.3)];
        let vz: Vec<C64> = (0..2).map(|k| v[(k, 0)] * z[0] + v[(k, 1)] * z[1]).collect();
        let lhs = p.linear_substitute(&v).eval(&z).unwrap();
        let rhs = p.eval(&vz).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn homogenized_compose_clears_denominators() {
        // p = z + z^3, composed with w ↦ (a - w)/(1 - conj(a) w) at degree 3
        let a = c(0.3, -0.2);
        let p = CPoly::from_terms(1, [(mi(&[1]), c(1.0, 0.0)), (mi(&[3]), c(1.0, 0.0))]);
        let num = CPoly::from_terms(1, [(mi(&[0]), a), (mi(&[1]), c(-1.0, 0.0))]);
        let den = CPoly::from_terms(1, [(mi(&[0]), c(1.0, 0.0)), (mi(&[1]), -a.conj())]);
        let h = p.homogenized_compose(std::slice::from_ref(&num), &den, 3);
        let w = [c(0.1, 0.45)];
        let nv = num.eval(&w).unwrap();
        let dv = den.eval(&w).unwrap();
        let expect = p.eval(&[nv / dv]).unwrap() * dv * dv * dv;
        assert!((h.eval(&w).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn coeff_matrix_round_trip() {
        let basis = MonomialBasis::new(2, 2);
        let p1 = CPoly::from_terms(2, [(mi(&[1, 0]), c(1.0, 2.0)), (mi(&[0, 2]), c(-0.5, 0.0))]);
        let p2 = CPoly::from_terms(2, [(mi(&[1, 1]), c(0.0, 1.0))]);
        let pm = PolyMap::new(2, vec![p1, p2]).unwrap();
        let m = pm.coeff_matrix(&basis);
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.ncols(), 6);
        assert_eq!(PolyMap::from_coeff_matrix(&basis, &m), pm);
    }
}
