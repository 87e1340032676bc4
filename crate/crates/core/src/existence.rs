//! Degree-3 maps with a prescribed diagonal denominator `g = 1 + Σ σ_k z_k²`.
//!
//! A form `r = q(1 − ‖z‖²)` with `r(z, 0) = g` gives a map `p/g` exactly when
//! `|g|² − r` has a positive semidefinite matrix; `p` is then read off from
//! its eigen-decomposition.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::HermForm;
use crate::linalg;
use crate::monomial::{MonomialBasis, MultiIndex};
use crate::par::Exec;
use crate::poly::{CPoly, PolyMap};
use crate::rational::{lowest_terms, LowestTerms, RationalBallMap, ValidationOptions};
use crate::sampling;
use crate::C64;

/// Eigenvalues above `-PSD_TOL·trace` count as nonnegative; factors below
/// `PSD_TOL·trace` are dropped.
pub const PSD_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Feasible,
    /// The fixed construction has an indefinite matrix.
    Infeasible,
    /// The search stopped without finding a semidefinite point. Nothing is
    /// certified.
    NotConverged,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceResult {
    pub outcome: Outcome,
    pub sigma: Vec<f64>,
    #[serde(skip)]
    pub p: Option<PolyMap>,
    #[serde(skip)]
    pub g: CPoly,
    /// Least eigenvalue of the mixed-term matrix of `|g|² − r`.
    pub min_eig: f64,
    /// Largest `|‖p/g‖² − 1|` on sphere samples.
    pub residual: f64,
    pub iterations: usize,
    pub lowest_terms: Option<LowestTerms>,
}

impl ExistenceResult {
    pub fn feasible(&self) -> bool {
        self.outcome == Outcome::Feasible
    }

    pub fn map(&self) -> Option<RationalBallMap> {
        self.p
            .as_ref()
            .and_then(|p| RationalBallMap::new(p.clone(), self.g.clone()).ok())
    }
}

fn check_sigma(sigma: &[f64]) -> Result<()> {
    if sigma.is_empty() {
        return Err(Error::invalid("sigma must have at least one entry"));
    }
    if sigma.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::invalid("sigma entries must be nonnegative"));
    }
    if sigma.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("sigma must be ascending"));
    }
    if sigma.iter().any(|&s| s >= 1.0) {
        return Err(Error::InvalidMap {
            reason: "1 + Σ σ_k z_k² vanishes on the closed ball when some σ_k ≥ 1".into(),
            residual: Some(sigma.last().copied().unwrap()),
        });
    }
    Ok(())
}

pub fn denominator(sigma: &[f64]) -> CPoly {
    let n = sigma.len();
    let terms = std::iter::once((MultiIndex::zero(n), C64::new(1.0, 0.0))).chain(
        sigma
            .iter()
            .enumerate()
            .map(|(k, &s)| (MultiIndex::unit(n, k).increment(k), C64::new(s, 0.0))),
    );
    CPoly::from_terms(n, terms)
}

fn multinomial(a: &MultiIndex) -> f64 {
    let fact = |k: u32| (1..=k).map(|i| i as f64).product::<f64>();
    a.exponents().iter().fold(fact(a.degree()), |acc, &e| acc / fact(e))
}

/// `1 − (‖z‖⁶ + ‖z‖⁴ + ‖z‖²)/3 + Σ σ_k (z_k² + z̄_k²)(1 − ‖z‖²)`.
pub fn construct_base_form(sigma: &[f64]) -> HermForm {
    let n = sigma.len();
    let basis = MonomialBasis::new(n, 3);
    let zero = MultiIndex::zero(n);
    let mut terms = vec![(zero.clone(), zero.clone(), C64::new(1.0, 0.0))];
    for a in basis.iter().filter(|a| a.degree() >= 1) {
        terms.push((a.clone(), a.clone(), C64::new(-multinomial(a) / 3.0, 0.0)));
    }
    for (k, &s) in sigma.iter().enumerate() {
        let sq = MultiIndex::unit(n, k).increment(k);
        terms.push((sq.clone(), zero.clone(), C64::new(s, 0.0)));
        for j in 0..n {
            let ej = MultiIndex::unit(n, j);
            terms.push((sq.add(&ej), ej, C64::new(-s, 0.0)));
        }
    }
    HermForm::from_terms(n, 3, terms)
}

/// Mixed block of `|g|² − r`, with the largest pure-row entry.
fn mixed_block(g: &CPoly, r: &HermForm) -> (DMatrix<C64>, f64) {
    let (gv, _) = g.basis_coeffs(r.basis());
    let gv = DVector::from_vec(gv);
    let m = &gv * gv.adjoint() - r.matrix();
    let len = m.nrows();
    let pure = (0..len).map(|i| m[(i, 0)].norm()).fold(0.0, f64::max);
    (m.view((1, 1), (len - 1, len - 1)).into_owned(), pure)
}

fn trace_scale(m: &DMatrix<C64>) -> f64 {
    m.diagonal().iter().map(|c| c.re).sum::<f64>().abs().max(1.0)
}

/// Builds the map from a semidefinite mixed block and checks it on the sphere.
fn extract(sigma: &[f64], g: CPoly, r: &HermForm, mixed: &DMatrix<C64>, iterations: usize) -> Result<ExistenceResult> {
    let n = sigma.len();
    let scale = trace_scale(mixed);
    let (factors, min_eig) = linalg::psd_factor(mixed, PSD_TOL * scale);
    if min_eig < -PSD_TOL * scale {
        return Err(Error::Infeasible { min_eig });
    }
    let comps = factors
        .iter()
        .map(|v| {
            let mut coeffs = vec![C64::new(0.0, 0.0)];
            coeffs.extend(v.iter().copied());
            CPoly::from_basis_coeffs(r.basis(), &coeffs)
        })
        .collect();
    let p = PolyMap::new(n, comps)?;
    let f = RationalBallMap::new(p.clone(), g.clone())?;
    let sphere = sampling::sphere_points(n, 1000 * n, 0);
    let residual = f.sphere_residual(&sphere, Exec::default());
    let lt = lowest_terms(&f, r, &ValidationOptions::default());
    Ok(ExistenceResult {
        outcome: Outcome::Feasible,
        sigma: sigma.to_vec(),
        p: Some(p),
        g,
        min_eig,
        residual,
        iterations,
        lowest_terms: Some(lt),
    })
}

/// The fixed construction: factor `|g|² − r` for the base form `r`.
pub fn degree3_numerator(sigma: &[f64]) -> Result<ExistenceResult> {
    check_sigma(sigma)?;
    let r = construct_base_form(sigma);
    let g = denominator(sigma);
    let (mixed, pure) = mixed_block(&g, &r);
    debug_assert!(pure < 1e-14);
    extract(sigma, g, &r, &mixed, 0)
}

/// Real coordinates of a Hermitian matrix: every entry as `(re, im)`, so the
/// Euclidean norm is the Frobenius norm.
fn vectorize(m: &DMatrix<C64>) -> DVector<f64> {
    let k = m.nrows();
    DVector::from_fn(2 * k * k, |i, _| {
        let e = m[(i / 2 / k, (i / 2) % k)];
        if i % 2 == 0 {
            e.re
        } else {
            e.im
        }
    })
}

fn unvectorize(v: &DVector<f64>, k: usize) -> DMatrix<C64> {
    DMatrix::from_fn(k, k, |i, j| {
        let at = 2 * (i * k + j);
        C64::new(v[at], v[at + 1])
    })
}

/// The affine family `q ↦ mixed block of |g|² − q(1 − ‖z‖²)` with the pure
/// row of `q` fixed to `g`, in real coordinates of `q`'s mixed block.
struct AffineFamily {
    n: usize,
    g: CPoly,
    q_basis: MonomialBasis,
    pairs: Vec<(usize, usize, bool)>,
    offset: DVector<f64>,
    pinv: DMatrix<f64>,
    columns: DMatrix<f64>,
    k: usize,
}

impl AffineFamily {
    fn new(sigma: &[f64]) -> Result<Self> {
        let n = sigma.len();
        let g = denominator(sigma);
        let q_basis = MonomialBasis::new(n, 2);
        let len = q_basis.len();
        let mut pairs = Vec::new();
        for i in 1..len {
            pairs.push((i, i, false));
            for j in i + 1..len {
                pairs.push((i, j, false));
                pairs.push((i, j, true));
            }
        }
        let (gq, _) = g.basis_coeffs(&q_basis);
        let mut fixed = DMatrix::zeros(len, len);
        for i in 0..len {
            fixed[(i, 0)] = gq[i];
            fixed[(0, i)] = gq[i].conj();
        }
        let base = HermForm::from_hermitian_unchecked(q_basis.clone(), fixed).multiply_by_sphere();
        let (m0, _) = mixed_block(&g, &base);
        let k = m0.nrows();
        let offset = vectorize(&m0);
        let mut columns = DMatrix::zeros(offset.len(), pairs.len());
        for (col, &(i, j, imag)) in pairs.iter().enumerate() {
            let mut e = DMatrix::zeros(len, len);
            let v = if imag { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
            e[(i, j)] = v;
            e[(j, i)] = v.conj();
            if i == j {
                e[(i, i)] = C64::new(1.0, 0.0);
            }
            let img = HermForm::from_hermitian_unchecked(q_basis.clone(), e).multiply_by_sphere();
            let block = -img.matrix().view((1, 1), (k, k)).into_owned();
            columns.set_column(col, &vectorize(&block));
        }
        let pinv = columns
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::invalid(format!("pseudo-inverse failed: {e}")))?;
        Ok(AffineFamily {
            n,
            g,
            q_basis,
            pairs,
            offset,
            pinv,
            columns,
            k,
        })
    }

    fn params_of_q(&self, q: &HermForm) -> DVector<f64> {
        let m = q.matrix();
        DVector::from_iterator(
            self.pairs.len(),
            self.pairs
                .iter()
                .map(|&(i, j, imag)| if imag { m[(i, j)].im } else { m[(i, j)].re }),
        )
    }

    fn q_of_params(&self, x: &DVector<f64>) -> HermForm {
        let len = self.q_basis.len();
        let (gq, _) = self.g.basis_coeffs(&self.q_basis);
        let mut m = DMatrix::zeros(len, len);
        for i in 0..len {
            m[(i, 0)] = gq[i];
            m[(0, i)] = gq[i].conj();
        }
        for (&(i, j, imag), &v) in self.pairs.iter().zip(x.iter()) {
            if imag {
                m[(i, j)] += C64::new(0.0, v);
                m[(j, i)] += C64::new(0.0, -v);
            } else if i == j {
                m[(i, i)] = C64::new(v, 0.0);
            } else {
                m[(i, j)] += C64::new(v, 0.0);
                m[(j, i)] += C64::new(v, 0.0);
            }
        }
        HermForm::from_hermitian_unchecked(self.q_basis.clone(), m)
    }

    fn mixed_of_params(&self, x: &DVector<f64>) -> DMatrix<C64> {
        unvectorize(&(&self.offset + &self.columns * x), self.k)
    }

    /// Least-squares parameters whose mixed block is nearest to `target`.
    fn project(&self, target: &DMatrix<C64>) -> DVector<f64> {
        &self.pinv * (vectorize(target) - &self.offset)
    }
}

/// Clips eigenvalues below `eps` up to `eps`.
fn clip(m: &DMatrix<C64>, eps: f64) -> DMatrix<C64> {
    let (vals, vecs) = linalg::eigh(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::new(v.max(eps), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

fn min_eig(m: &DMatrix<C64>) -> f64 {
    linalg::eigh(m).0.last().copied().unwrap_or(0.0)
}

/// Alternating projections between the affine family of admissible forms and
/// the cone of matrices with eigenvalues at least `ε`, starting from the base
/// form. `ε` starts at `10⁻²` and halves whenever the iterates stall.
pub fn feasibility_search(sigma: &[f64], max_iter: usize) -> Result<ExistenceResult> {
    check_sigma(sigma)?;
    let fam = AffineFamily::new(sigma)?;
    let base_q = construct_base_form(sigma).divide_by_sphere()?;
    let mut x = fam.params_of_q(&base_q);
    let mut y = fam.mixed_of_params(&x);
    let mut eps = 1e-2;
    let mut iterations = 0;
    let mut last_min = min_eig(&y);
    let mut stall = 0;
    while last_min < 0.0 {
        if iterations >= max_iter || eps < 1e-12 {
            return Ok(ExistenceResult {
                outcome: Outcome::NotConverged,
                sigma: sigma.to_vec(),
                p: None,
                g: fam.g.clone(),
                min_eig: last_min,
                residual: f64::NAN,
                iterations,
                lowest_terms: None,
            });
        }
        iterations += 1;
        let target = clip(&y, eps * trace_scale(&y) / fam.k as f64);
        let x_next = fam.project(&target);
        let step = (&x_next - &x).norm();
        x = x_next;
        y = fam.mixed_of_params(&x);
        let m = min_eig(&y);
        if step < 1e-13 || m <= last_min + 1e-15 {
            stall += 1;
        } else {
            stall = 0;
        }
        if stall >= 20 {
            eps *= 0.5;
            stall = 0;
        }
        last_min = m;
    }
    let q = fam.q_of_params(&x);
    let r = q.multiply_by_sphere();
    debug_assert_eq!(r.nvars(), fam.n);
    let (mixed, _) = mixed_block(&fam.g, &r);
    extract(sigma, fam.g.clone(), &r, &mixed, iterations)
}
