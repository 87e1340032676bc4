//! Normal form: critical point of `Λ` at the origin, diagonal quadratic part
//! of the denominator, numerator in row echelon form with positive pivots.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::automorphism::{self, BallAutomorphism};
use crate::error::Result;
use crate::form::HermForm;
use crate::lambda::{self, SolverOptions};
use crate::linalg;
use crate::monomial::{MonomialBasis, MultiIndex};
use crate::par::{self, Exec};
use crate::poly::{CPoly, PolyMap};
use crate::rational::RationalBallMap;
use crate::takagi::{self, Takagi};
use crate::C64;

/// Relative gap below which two σ values are treated as equal.
pub const TIE_TOL: f64 = 1e-7;
/// Tolerance for comparing σ vectors of two maps.
pub const SIGMA_MATCH_TOL: f64 = 1e-7;
/// Coefficient tolerance for matching two normal forms.
pub const FORM_MATCH_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormResiduals {
    /// Criticality equation at `alpha`.
    pub criticality: f64,
    pub gradient: f64,
    pub solver_iterations: usize,
    /// `|G|² − ‖P‖²` against the pulled-back form.
    pub reconstruction: f64,
    pub takagi: f64,
    /// Largest linear coefficient of `G`.
    pub linear_terms: f64,
    /// Largest off-diagonal entry of the quadratic matrix of `G`.
    pub quadratic_offdiag: f64,
    /// Division residual of the normalized map's underlying form.
    pub division: f64,
    /// Whether the numerator coefficient matrix has full row rank, which
    /// makes the target unitary unique.
    pub echelon_unique: bool,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub p: PolyMap,
    pub g: CPoly,
    /// Ascending.
    pub sigma: Vec<f64>,
    pub alpha: Vec<C64>,
    /// Source unitary from the Takagi step.
    pub v: DMatrix<C64>,
    /// Target unitary from the echelon step.
    pub u: DMatrix<C64>,
    pub degree: u32,
    pub residuals: NormalFormResiduals,
}

impl NormalForm {
    pub fn map(&self) -> Result<RationalBallMap> {
        RationalBallMap::new(self.p.clone(), self.g.clone())
    }

    pub fn nvars(&self) -> usize {
        self.p.nvars()
    }
}

/// Symmetric matrix of the degree-2 part of `G`: `G₂(z) = zᵗ C z`.
pub fn quadratic_matrix(g: &CPoly) -> DMatrix<C64> {
    let n = g.nvars();
    DMatrix::from_fn(n, n, |j, k| {
        let idx = MultiIndex::unit(n, j).add(&MultiIndex::unit(n, k));
        let c = g.coeff(&idx);
        if j == k {
            c
        } else {
            c * 0.5
        }
    })
}

#[derive(Clone, Debug)]
pub struct Echelon {
    /// Unitary with `U·[c_α]` in row echelon form.
    pub u: DMatrix<C64>,
    pub p: PolyMap,
    pub rank: usize,
    /// Full row rank, so `U` is unique.
    pub unique: bool,
}

/// Unitary `U` putting the coefficient matrix of `P` (columns in basis order,
/// constant column excluded) in row echelon form with positive pivots.
pub fn echelon_unitary(p: &PolyMap, basis: &MonomialBasis) -> Echelon {
    let big_n = p.target_dim();
    let mut m = p.coeff_matrix(basis);
    let mut u: DMatrix<C64> = DMatrix::identity(big_n, big_n);
    let scale = linalg::max_abs(&m).max(f64::MIN_POSITIVE);
    let cut = 1e-9 * scale;
    let mut row = 0;
    for col in 1..m.ncols() {
        if row == big_n {
            break;
        }
        let x: Vec<C64> = (row..big_n).map(|i| m[(i, col)]).collect();
        let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm <= cut {
            continue;
        }
        // Householder taking x to -e^{iθ}‖x‖e₁, then a phase making the pivot positive
        let theta = if x[0].norm() > 0.0 { x[0].arg() } else { 0.0 };
        let ph = C64::from_polar(1.0, theta);
        let mut v = x.clone();
        v[0] += ph * norm;
        let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let k = big_n - row;
        let mut t = DMatrix::<C64>::identity(k, k);
        if vv > 0.0 {
            for i in 0..k {
                for j in 0..k {
                    t[(i, j)] -= v[i] * v[j].conj() * (2.0 / vv);
                }
            }
        }
        let fix = -ph.conj();
        for j in 0..k {
            t[(0, j)] *= fix;
        }
        let mut full = DMatrix::<C64>::identity(big_n, big_n);
        full.view_mut((row, row), (k, k)).copy_from(&t);
        m = &full * m;
        u = &full * u;
        // exact zeros below the pivot, real pivot
        m[(row, col)] = C64::new(m[(row, col)].re, 0.0);
        for i in row + 1..big_n {
            m[(i, col)] = C64::new(0.0, 0.0);
        }
        row += 1;
    }
    Echelon {
        p: PolyMap::from_coeff_matrix(basis, &m),
        u,
        rank: row,
        unique: row == big_n,
    }
}

/// Coefficient matrix of `r(−z, −z̄)`.
fn negate_variables(r: &HermForm) -> HermForm {
    let basis = r.basis();
    let m = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        let parity = (basis.get(i).degree() + basis.get(j).degree()) % 2;
        if parity == 0 {
            r.matrix()[(i, j)]
        } else {
            -r.matrix()[(i, j)]
        }
    });
    HermForm::from_hermitian_unchecked(basis.clone(), m)
}

pub fn normalize(f: &RationalBallMap) -> Result<NormalForm> {
    normalize_with(f, &SolverOptions::default())
}

pub fn normalize_with(f: &RationalBallMap, opts: &SolverOptions) -> Result<NormalForm> {
    let n = f.nvars();
    let d = f.degree();
    let r = HermForm::underlying_form(f)?;
    let (alpha, criticality, gradient, iterations) = if d >= 2 {
        let cp = lambda::find_critical_point(&r, d, opts)?;
        (cp.alpha, cp.residual, cp.grad_norm, cp.iterations)
    } else {
        (vec![C64::new(0.0, 0.0); n], 0.0, 0.0, 0)
    };
    // pull back by z ↦ φ_α(−z), which is the identity when α = 0
    let big_r = negate_variables(&automorphism::pullback(&r, &BallAutomorphism::phi(&alpha)?)?);
    let (p, g, reconstruction) = big_r.origin_representative()?;
    let q = quadratic_matrix(&g);
    let Takagi {
        v,
        sigma,
        residual: takagi_residual,
    } = takagi::takagi(&q)?;
    let g = g.linear_substitute(&v);
    let p = p.linear_substitute(&v);
    let basis = MonomialBasis::new(n, d);
    let ech = echelon_unitary(&p, &basis);

    let linear_terms = (0..n)
        .map(|k| g.coeff(&MultiIndex::unit(n, k)).norm())
        .fold(0.0, f64::max);
    let qn = quadratic_matrix(&g);
    let quadratic_offdiag = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| qn[(i, j)].norm())
        .fold(0.0, f64::max);
    let map = RationalBallMap::new(ech.p.clone(), g.clone())?;
    let division = HermForm::underlying_form(&map)?.divide_with_residual().1;

    Ok(NormalForm {
        p: ech.p,
        g,
        sigma,
        alpha,
        v,
        u: ech.u,
        degree: d,
        residuals: NormalFormResiduals {
            criticality,
            gradient,
            solver_iterations: iterations,
            reconstruction,
            takagi: takagi_residual,
            linear_terms,
            quadratic_offdiag,
            division,
            echelon_unique: ech.unique,
        },
    })
}

/// The σ of the normal form.
pub fn invariants(f: &RationalBallMap) -> Result<Vec<f64>> {
    Ok(normalize(f)?.sigma)
}

/// Normalizes every map, in parallel when `exec` allows; output order
/// follows input order.
pub fn normalize_batch(maps: &[RationalBallMap], exec: Exec) -> Vec<Result<NormalForm>> {
    par::map(maps, exec, normalize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EquivalenceStatus {
    Equivalent,
    Inequivalent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Source unitary applied to the first normal form (a signed permutation).
    #[serde(serialize_with = "serialize_cmatrix")]
    pub v: DMatrix<C64>,
    /// Target unitary re-echeloning the transformed numerator.
    #[serde(serialize_with = "serialize_cmatrix")]
    pub u: DMatrix<C64>,
    pub residual: f64,
}

fn serialize_cmatrix<S: serde::Serializer>(m: &DMatrix<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde::Serialize::serialize(&rows, s)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub status: EquivalenceStatus,
    pub witness: Option<Witness>,
    pub reason: String,
    pub sigma_a: Vec<f64>,
    pub sigma_b: Vec<f64>,
}

/// Groups of indices with equal σ (relative gap below [`TIE_TOL`]); a group
/// of zeros is flagged.
fn clusters(sigma: &[f64]) -> Vec<(Vec<usize>, bool)> {
    let mut out: Vec<(Vec<usize>, bool)> = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        let zero = s == 0.0;
        match out.last_mut() {
            Some((idx, z))
                if {
                    let prev = sigma[*idx.last().unwrap()];
                    (*z && zero) || (!*z && !zero && (s - prev).abs() <= TIE_TOL * s.max(prev))
                } =>
            {
                idx.push(i)
            }
            _ => out.push((vec![i], zero)),
        }
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Signed permutation matrices that permute only within σ clusters.
fn stabilizer_candidates(sigma: &[f64]) -> Vec<DMatrix<C64>> {
    let n = sigma.len();
    let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
    for (idx, _) in clusters(sigma) {
        let mut next = Vec::new();
        for base in &perms {
            for p in permutations(&idx) {
                let mut q = base.clone();
                for (slot, &target) in idx.iter().zip(&p) {
                    q[*slot] = target;
                }
                next.push(q);
            }
        }
        perms = next;
    }
    let mut out = Vec::new();
    for perm in perms {
        for signs in 0..(1u32 << n) {
            let m = DMatrix::from_fn(n, n, |i, j| {
                if perm[j] == i {
                    let s = if signs >> j & 1 == 1 { -1.0 } else { 1.0 };
                    C64::new(s, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            out.push(m);
        }
    }
    out
}

fn coefficient_gap(a: &PolyMap, ga: &CPoly, b: &PolyMap, gb: &CPoly, basis: &MonomialBasis) -> f64 {
    let big_n = a.target_dim().max(b.target_dim());
    let ma = a.padded(big_n).coeff_matrix(basis);
    let mb = b.padded(big_n).coeff_matrix(basis);
    let pg = linalg::max_abs(&(ma - mb));
    let (va, _) = ga.basis_coeffs(basis);
    let (vb, _) = gb.basis_coeffs(basis);
    let gg = va.iter().zip(&vb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    pg.max(gg)
}

/// Decides spherical equivalence through the normal forms. Conclusive when
/// the σ differ, or when they are distinct and positive (the stabilizer of
/// the quadratic part is then the diagonal sign group).
pub fn spherically_equivalent(f: &RationalBallMap, h: &RationalBallMap) -> Result<EquivalenceVerdict> {
    let verdict = |status, reason: String, sa: Vec<f64>, sb: Vec<f64>| EquivalenceVerdict {
        status,
        witness: None,
        reason,
        sigma_a: sa,
        sigma_b: sb,
    };
    if f.nvars() != h.nvars() {
        return Ok(verdict(
            EquivalenceStatus::Inequivalent,
            "source dimensions differ".into(),
            vec![],
            vec![],
        ));
    }
    if f.degree() != h.degree() {
        return Ok(verdict(
            EquivalenceStatus::Inequivalent,
            "degrees differ".into(),
            vec![],
            vec![],
        ));
    }
    let a = normalize(f)?;
    let b = normalize(h)?;
    let (sa, sb) = (a.sigma.clone(), b.sigma.clone());
    let mismatch = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if mismatch > SIGMA_MATCH_TOL {
        return Ok(verdict(
            EquivalenceStatus::Inequivalent,
            format!("invariants differ by {mismatch:.3e}"),
            sa,
            sb,
        ));
    }
    let n = f.nvars();
    let basis = MonomialBasis::new(n, f.degree());
    let generic = clusters(&sa).iter().all(|(idx, zero)| idx.len() == 1 && !zero);
    let mut best = f64::INFINITY;
    for v in stabilizer_candidates(&sa) {
        let p = a.p.linear_substitute(&v);
        let g = a.g.linear_substitute(&v);
        let ech = echelon_unitary(&p, &basis);
        let gap = coefficient_gap(&ech.p, &g, &b.p, &b.g, &basis);
        best = best.min(gap);
        if gap < FORM_MATCH_TOL {
            return Ok(EquivalenceVerdict {
                status: EquivalenceStatus::Equivalent,
                witness: Some(Witness {
                    v,
                    u: ech.u,
                    residual: gap,
                }),
                reason: "normal forms agree after a sign change of coordinates".into(),
                sigma_a: sa,
                sigma_b: sb,
            });
        }
    }
    let unique = a.residuals.echelon_unique && b.residuals.echelon_unique;
    if generic && unique {
        Ok(verdict(
            EquivalenceStatus::Inequivalent,
            format!("no sign pattern matches the normal forms (closest {best:.3e})"),
            sa,
            sb,
        ))
    } else {
        let why = if generic {
            "numerator coefficient matrix is rank deficient"
        } else {
            "invariants have ties or zeros"
        };
        Ok(verdict(
            EquivalenceStatus::Inconclusive,
            format!("{why}; no tested signed permutation matches (closest {best:.3e})"),
            sa,
            sb,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{phi, postcompose, precompose};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn f_sigma(s: f64) -> RationalBallMap {
        let p = CPoly::from_terms(1, [(mi(&[1]), c(s, 0.0)), (mi(&[3]), c(1.0, 0.0))]);
        let g = CPoly::from_terms(1, [(mi(&[0]), c(1.0, 0.0)), (mi(&[2]), c(s, 0.0))]);
        RationalBallMap::new(PolyMap::new(1, vec![p]).unwrap(), g).unwrap()
    }

    #[test]
    fn quadratic_matrix_examples() {
        let g = CPoly::from_terms(
            2,
            [
                (mi(&[0, 0]), c(1.0, 0.0)),
                (mi(&[2, 0]), c(0.3, 0.0)),
                (mi(&[0, 2]), c(0.3, 0.0)),
            ],
        );
        let q = quadratic_matrix(&g);
        assert_eq!(q[(0, 0)], c(0.3, 0.0));
        assert_eq!(q[(0, 1)], c(0.0, 0.0));
        let g = CPoly::from_terms(2, [(mi(&[0, 0]), c(1.0, 0.0)), (mi(&[1, 1]), c(-0.8, 0.0))]);
        let q = quadratic_matrix(&g);
        assert_eq!(q[(0, 1)], c(-0.4, 0.0));
        assert_eq!(q[(1, 0)], c(-0.4, 0.0));
        assert_eq!(q[(0, 0)], c(0.0, 0.0));
        assert_eq!(quadratic_matrix(&CPoly::one(2)), DMatrix::zeros(2, 2));
    }

    #[test]
    fn echelon_examples() {
        let basis = MonomialBasis::new(1, 2);
        // P = (z², z): first pivot must be the z column
        let p = PolyMap::new(
            1,
            vec![
                CPoly::from_terms(1, [(mi(&[2]), c(1.0, 0.0))]),
                CPoly::from_terms(1, [(mi(&[1]), c(1.0, 0.0))]),
            ],
        )
        .unwrap();
        let e = echelon_unitary(&p, &basis);
        let m = e.p.coeff_matrix(&basis);
        assert!((m[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(1, 2)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(e.unique);

        // rows [0, 2i] and [1, 0] over (z, z²)
        let p = PolyMap::new(
            1,
            vec![
                CPoly::from_terms(1, [(mi(&[2]), c(0.0, 2.0))]),
                CPoly::from_terms(1, [(mi(&[1]), c(1.0, 0.0))]),
            ],
        )
        .unwrap();
        let e = echelon_unitary(&p, &basis);
        let m = e.p.coeff_matrix(&basis);
        assert!((m[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(m[(0, 2)].norm() < 1e-15);
        assert!((m[(1, 2)] - c(2.0, 0.0)).norm() < 1e-15);
        assert!(linalg::unitarity_residual(&e.u) < 1e-14);

        // already echelon: U = I
        let e2 = echelon_unitary(&e.p, &basis);
        assert!(linalg::max_abs(&(&e2.u - DMatrix::<C64>::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn cube_is_already_normal() {
        let cube = RationalBallMap::polynomial(
            PolyMap::new(1, vec![CPoly::from_terms(1, [(mi(&[3]), c(1.0, 0.0))])]).unwrap(),
        )
        .unwrap();
        let nf = normalize(&cube).unwrap();
        assert_eq!(nf.sigma, vec![0.0]);
        assert!(nf.alpha[0].norm() < 1e-12);
        assert_eq!(nf.g, CPoly::one(1));
    }

    #[test]
    fn recovers_sigma_after_automorphisms() {
        let f = f_sigma(0.5);
        let h = precompose(&f, &phi(&[c(0.4, 0.2)]).unwrap()).unwrap();
        let h = postcompose(&h.padded(2), &phi(&[c(0.1, -0.3), c(0.2, 0.2)]).unwrap()).unwrap();
        let nf = normalize(&h).unwrap();
        assert!((nf.sigma[0] - 0.5).abs() < 1e-8, "{:?}", nf.sigma);
        assert!(nf.residuals.linear_terms < 1e-9);
        assert!(nf.residuals.division < 1e-10);
    }

    #[test]
    fn equivalence_verdicts() {
        let f = f_sigma(0.5);
        let h = precompose(&f, &phi(&[c(0.3, 0.0)]).unwrap()).unwrap();
        let v = spherically_equivalent(&f, &h).unwrap();
        assert_eq!(v.status, EquivalenceStatus::Equivalent, "{}", v.reason);
        assert!(v.witness.unwrap().residual < 1e-8);
        let v = spherically_equivalent(&f_sigma(0.3), &f_sigma(0.5)).unwrap();
        assert_eq!(v.status, EquivalenceStatus::Inequivalent);
        let v = spherically_equivalent(&f_sigma(0.0), &f_sigma(0.4)).unwrap();
        assert_eq!(v.status, EquivalenceStatus::Inequivalent);
    }

    #[test]
    fn stabilizer_respects_clusters() {
        assert_eq!(stabilizer_candidates(&[0.1, 0.2]).len(), 4);
        assert_eq!(stabilizer_candidates(&[0.2, 0.2]).len(), 8);
        assert_eq!(stabilizer_candidates(&[0.0, 0.0, 0.3]).len(), 16);
    }
}
