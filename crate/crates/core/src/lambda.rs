//! The exhaustion function `Λ = r / (1 − ‖z‖²)^d`, its derivatives, and the
//! search for its unique critical point.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::automorphism::{phi_jacobian_at_origin, vec_norm};
use crate::error::{Error, Result};
use crate::form::HermForm;
use crate::monomial::{monomial_from_table, power_table, MonomialBasis};
use crate::C64;

/// Value and derivatives of `Λ` at a point.
#[derive(Clone, Debug)]
pub struct LambdaEval {
    pub value: f64,
    /// `∂Λ/∂z_j`.
    pub grad: Vec<C64>,
    /// `∂²Λ/∂z_j∂z̄_k`.
    pub hess_c: DMatrix<C64>,
    /// `∂²Λ/∂z_j∂z_k`.
    pub hess_holo: DMatrix<C64>,
    /// Hessian in the real coordinates `(Re z, Im z)`.
    pub hess_r: DMatrix<f64>,
}

impl LambdaEval {
    /// Gradient in the real coordinates `(Re z, Im z)`.
    pub fn real_gradient(&self) -> DVector<f64> {
        let n = self.grad.len();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                2.0 * self.grad[i].re
            } else {
                -2.0 * self.grad[i - n].im
            }
        })
    }

    pub fn grad_norm(&self) -> f64 {
        vec_norm(&self.grad)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    pub alpha: Vec<C64>,
    /// Norm of the criticality equation at `alpha`.
    pub residual: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub min_value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const BALL_MARGIN: f64 = 1e-8;

/// Values of `r` and its first and second Wirtinger derivatives.
struct FormJet {
    value: f64,
    d1: Vec<C64>,
    // ∂²r/∂z_j∂z_k
    d2: DMatrix<C64>,
    // ∂²r/∂z_j∂z̄_k
    mixed: DMatrix<C64>,
}

/// Monomial values, first derivatives and second derivatives.
type Jets = (Vec<C64>, Vec<Vec<C64>>, Vec<Vec<Vec<C64>>>);

fn monomial_jets(basis: &MonomialBasis, z: &[C64]) -> Jets {
    let n = z.len();
    let pw = power_table(z, basis.degree());
    let zero = C64::new(0.0, 0.0);
    let len = basis.len();
    let mut m = Vec::with_capacity(len);
    let mut dm = vec![vec![zero; len]; n];
    let mut ddm = vec![vec![vec![zero; len]; n]; n];
    for (i, a) in basis.iter().enumerate() {
        m.push(monomial_from_table(&pw, a));
        for j in 0..n {
            let Some(aj) = a.decrement(j) else { continue };
            dm[j][i] = monomial_from_table(&pw, &aj) * a.exponents()[j] as f64;
            for k in 0..n {
                let Some(ajk) = aj.decrement(k) else { continue };
                let coef = a.exponents()[j] as f64 * aj.exponents()[k] as f64;
                ddm[j][k][i] = monomial_from_table(&pw, &ajk) * coef;
            }
        }
    }
    (m, dm, ddm)
}

fn form_jet(r: &HermForm, z: &[C64]) -> FormJet {
    let n = z.len();
    let c = r.matrix();
    let (m, dm, ddm) = monomial_jets(r.basis(), z);
    let conj = |v: &[C64]| DVector::from_iterator(v.len(), v.iter().map(|x| x.conj()));
    let dot = |a: &[C64], b: &DVector<C64>| -> C64 { a.iter().zip(b.iter()).map(|(x, y)| x * y).sum() };
    let v = c * conj(&m);
    let value = dot(&m, &v).re;
    let d1: Vec<C64> = (0..n).map(|j| dot(&dm[j], &v)).collect();
    let d2 = DMatrix::from_fn(n, n, |j, k| dot(&ddm[j][k], &v));
    let w: Vec<DVector<C64>> = (0..n).map(|k| c * conj(&dm[k])).collect();
    let mixed = DMatrix::from_fn(n, n, |j, k| dot(&dm[j], &w[k]));
    FormJet { value, d1, d2, mixed }
}

/// `Λ` and its derivatives at `z`, computed analytically from the form.
pub fn lambda_eval(r: &HermForm, d: u32, z: &[C64]) -> Result<LambdaEval> {
    let n = r.nvars();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.len(),
        });
    }
    let norm = vec_norm(z);
    if !(norm < 1.0) {
        return Err(Error::OutsideBall { norm });
    }
    let jet = form_jet(r, z);
    let rho = 1.0 - norm * norm;
    let df = d as f64;
    let w = rho.powf(-df);
    let w1 = df * rho.powf(-df - 1.0);
    let w2 = df * (df + 1.0) * rho.powf(-df - 2.0);
    // ∂w/∂z_j = w1 z̄_j, ∂w/∂z̄_k = w1 z_k
    let wj: Vec<C64> = z.iter().map(|x| x.conj() * w1).collect();
    let wkb: Vec<C64> = z.iter().map(|x| x * w1).collect();
    let rkb: Vec<C64> = jet.d1.iter().map(|x| x.conj()).collect();

    let value = jet.value * w;
    let grad: Vec<C64> = (0..n).map(|j| jet.d1[j] * w + wj[j] * jet.value).collect();
    let hess_holo = DMatrix::from_fn(n, n, |j, k| {
        let wjk = z[j].conj() * z[k].conj() * w2;
        jet.d2[(j, k)] * w + jet.d1[j] * wj[k] + jet.d1[k] * wj[j] + wjk * jet.value
    });
    let hess_c = DMatrix::from_fn(n, n, |j, k| {
        let delta = if j == k { w1 } else { 0.0 };
        let wjkb = z[j].conj() * z[k] * w2 + delta;
        jet.mixed[(j, k)] * w + jet.d1[j] * wkb[k] + rkb[k] * wj[j] + wjkb * jet.value
    });
    let hess_c = (&hess_c + hess_c.adjoint()) * C64::new(0.5, 0.0);
    let hess_r = real_hessian(&hess_holo, &hess_c);
    Ok(LambdaEval {
        value,
        grad,
        hess_c,
        hess_holo,
        hess_r,
    })
}

/// Value of `Λ` only.
pub fn lambda_value(r: &HermForm, d: u32, z: &[C64]) -> Result<f64> {
    let norm = vec_norm(z);
    if !(norm < 1.0) {
        return Err(Error::OutsideBall { norm });
    }
    Ok(r.eval(z)? / (1.0 - norm * norm).powi(d as i32))
}

fn real_hessian(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let (aj, bj) = (a[(j, k)], b[(j, k)]);
            h[(j, k)] = 2.0 * aj.re + 2.0 * bj.re;
            h[(j, n + k)] = -2.0 * aj.im + 2.0 * bj.im;
            h[(n + j, k)] = -2.0 * aj.im - 2.0 * bj.im;
            h[(n + j, n + k)] = -2.0 * aj.re + 2.0 * bj.re;
        }
    }
    (&h + h.transpose()) * 0.5
}

/// `‖−d ᾱ_j r(α) + Σ_k ∂_k r(α) ∂_j(φ_α)_k(0)‖`: the linear coefficients of
/// the form pulled back by `φ_α`, up to the factor `r(α)`.
pub fn criticality_residual(r: &HermForm, d: u32, alpha: &[C64]) -> Result<f64> {
    let norm = vec_norm(alpha);
    if !(norm < 1.0) {
        return Err(Error::OutsideBall { norm });
    }
    let jet = form_jet(r, alpha);
    let jac = phi_jacobian_at_origin(alpha);
    let n = alpha.len();
    let eq: Vec<C64> = (0..n)
        .map(|j| {
            let lin: C64 = (0..n).map(|k| jet.d1[k] * jac[(k, j)]).sum();
            -alpha[j].conj() * (d as f64 * jet.value) + lin
        })
        .collect();
    Ok(vec_norm(&eq))
}

fn to_real(z: &[C64]) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |i, _| if i < n { z[i].re } else { z[i - n].im })
}

fn to_complex(x: &DVector<f64>) -> Vec<C64> {
    let n = x.len() / 2;
    (0..n).map(|k| C64::new(x[k], x[n + k])).collect()
}

/// Roundoff bound for `Λ(z)`: `Σ |C_ab| |z^a| |z^b| / (1 − ‖z‖²)^d`, times a
/// small multiple of machine epsilon.
fn value_noise(r: &HermForm, d: u32, z: &[C64]) -> f64 {
    let m: Vec<f64> = r.basis().eval_monomials(z).iter().map(|x| x.norm()).collect();
    let c = r.matrix();
    let mut s = 0.0;
    for (a, ma) in m.iter().enumerate() {
        for (b, mb) in m.iter().enumerate() {
            s += c[(a, b)].norm() * ma * mb;
        }
    }
    let rho = 1.0 - vec_norm(z).powi(2);
    16.0 * f64::EPSILON * s / rho.powi(d as i32)
}

/// Damped Newton from the origin in real coordinates, with a gradient step
/// whenever the real Hessian is not positive definite.
pub fn find_critical_point(r: &HermForm, d: u32, opts: &SolverOptions) -> Result<CriticalPoint> {
    if d < 2 {
        return Err(Error::DegenerateDegreeOne);
    }
    let n = r.nvars();
    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut ev = lambda_eval(r, d, &z)?;
    let mut iterations = 0;
    while ev.grad_norm() >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                grad_norm: ev.grad_norm(),
            });
        }
        iterations += 1;
        let g = ev.real_gradient();
        let step = match ev.hess_r.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -&g,
        };
        let x = to_real(&z);
        let slope = g.dot(&step);
        let noise = value_noise(r, d, &z).max(4.0 * f64::EPSILON * ev.value.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = to_complex(&(&x + &step * t));
            if vec_norm(&cand) <= 1.0 - BALL_MARGIN {
                let e = lambda_eval(r, d, &cand)?;
                if e.value <= ev.value + ARMIJO * t * slope + noise {
                    accepted = Some((cand, e));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, e)) => {
                // near the minimum Λ is flat to roundoff; stop once steps stop
                // shrinking the gradient
                let stalled = e.grad_norm() >= ev.grad_norm() && (e.value - ev.value).abs() <= noise;
                z = cand;
                ev = e;
                if stalled {
                    break;
                }
            }
            None => break,
        }
    }
    if ev.grad_norm() >= opts.tol {
        return Err(Error::NoConvergence {
            iterations,
            grad_norm: ev.grad_norm(),
        });
    }
    Ok(CriticalPoint {
        residual: criticality_residual(r, d, &z)?,
        grad_norm: ev.grad_norm(),
        alpha: z,
        iterations,
        min_value: ev.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{phi, precompose};
    use crate::monomial::MultiIndex;
    use crate::poly::{CPoly, PolyMap};
    use crate::rational::RationalBallMap;
    use crate::sampling;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn f_sigma(s: f64) -> RationalBallMap {
        let mi = |e: u32| MultiIndex::new(vec![e]);
        let p = CPoly::from_terms(1, [(mi(1), c(s, 0.0)), (mi(3), c(1.0, 0.0))]);
        let g = CPoly::from_terms(1, [(mi(0), c(1.0, 0.0)), (mi(2), c(s, 0.0))]);
        RationalBallMap::new(PolyMap::new(1, vec![p]).unwrap(), g).unwrap()
    }

    fn square() -> HermForm {
        let mi = |e: u32| MultiIndex::new(vec![e]);
        let f =
            RationalBallMap::polynomial(PolyMap::new(1, vec![CPoly::from_terms(1, [(mi(2), c(1.0, 0.0))])]).unwrap())
                .unwrap();
        HermForm::underlying_form(&f).unwrap()
    }

    #[test]
    fn square_map_values() {
        let r = square();
        let e = lambda_eval(&r, 2, &[c(0.0, 0.0)]).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
        assert!(e.grad_norm() < 1e-15);
        let z = [c(0.5, 0.5)];
        assert!((lambda_eval(&r, 2, &z).unwrap().value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = precompose(&f_sigma(0.5), &phi(&[c(0.2, -0.1)]).unwrap()).unwrap();
        let r = HermForm::underlying_form(&f).unwrap();
        let h = 1e-5;
        for z in sampling::shell_points(1, 20, 3, &[0.3, 0.6]) {
            let e = lambda_eval(&r, 3, &z).unwrap();
            let val = |w: &[C64]| lambda_value(&r, 3, w).unwrap();
            let fx = (val(&[z[0] + h]) - val(&[z[0] - h])) / (2.0 * h);
            let fy = (val(&[z[0] + c(0.0, h)]) - val(&[z[0] - c(0.0, h)])) / (2.0 * h);
            let fd = c(0.5 * fx, -0.5 * fy);
            assert!((fd - e.grad[0]).norm() <= 1e-6 * e.grad[0].norm().max(1.0));

            let g = |w: &[C64]| lambda_eval(&r, 3, w).unwrap().real_gradient();
            let gx = (g(&[z[0] + h]) - g(&[z[0] - h])) / (2.0 * h);
            let gy = (g(&[z[0] + c(0.0, h)]) - g(&[z[0] - c(0.0, h)])) / (2.0 * h);
            let scale = e.hess_r.abs().max().max(1.0);
            for i in 0..2 {
                assert!((gx[i] - e.hess_r[(i, 0)]).abs() <= 1e-6 * scale);
                assert!((gy[i] - e.hess_r[(i, 1)]).abs() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn normal_form_has_minimum_at_origin() {
        let r = HermForm::underlying_form(&f_sigma(0.5)).unwrap();
        let cp = find_critical_point(&r, 3, &SolverOptions::default()).unwrap();
        assert!(vec_norm(&cp.alpha) < 1e-10);
        assert_eq!(criticality_residual(&r, 3, &[c(0.0, 0.0)]).unwrap(), 0.0);
        assert!(criticality_residual(&r, 3, &[c(0.2, 0.0)]).unwrap() > 1e-3);
    }

    #[test]
    fn precomposition_moves_minimum() {
        let a = c(0.3, 0.0);
        let f = precompose(&f_sigma(0.5), &phi(&[a]).unwrap()).unwrap();
        let r = HermForm::underlying_form(&f).unwrap();
        let cp = find_critical_point(&r, 3, &SolverOptions::default()).unwrap();
        assert!((cp.alpha[0] - a).norm() < 1e-8);
        assert!(cp.residual < 1e-9);
        // grid scan oracle along the real axis
        let best = (0..1800)
            .map(|i| -0.9 + i as f64 * 1e-3)
            .min_by(|x, y| {
                let vx = lambda_value(&r, 3, &[c(*x, 0.0)]).unwrap();
                let vy = lambda_value(&r, 3, &[c(*y, 0.0)]).unwrap();
                vx.total_cmp(&vy)
            })
            .unwrap();
        assert!((best - 0.3).abs() <= 1e-3);
    }

    #[test]
    fn degree_one_is_degenerate() {
        let r = crate::form::sphere_form(2);
        assert!(matches!(
            find_critical_point(&r, 1, &SolverOptions::default()),
            Err(Error::DegenerateDegreeOne)
        ));
    }

    #[test]
    fn rejects_points_outside_ball() {
        assert!(matches!(
            lambda_eval(&square(), 2, &[c(1.0, 0.0)]),
            Err(Error::OutsideBall { .. })
        ));
    }
}
