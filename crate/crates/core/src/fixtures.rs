//! Known proper maps and random generators for tests, benches and examples.

use nalgebra::DMatrix;
use rand::Rng;

use crate::automorphism::{phi, postcompose, precompose, BallAutomorphism};
use crate::error::Result;
use crate::form::HermForm;
use crate::monomial::MultiIndex;
use crate::poly::{CPoly, PolyMap};
use crate::rational::RationalBallMap;
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(σz + z³)/(1 + σz²)` on the disc.
pub fn f_sigma(sigma: f64) -> RationalBallMap {
    let mi = |e: u32| MultiIndex::new(vec![e]);
    let p = CPoly::from_terms(1, [(mi(1), c(sigma, 0.0)), (mi(3), c(1.0, 0.0))]);
    let g = CPoly::from_terms(1, [(mi(0), c(1.0, 0.0)), (mi(2), c(sigma, 0.0))]);
    RationalBallMap::new(PolyMap::new(1, vec![p]).unwrap(), g).unwrap()
}

/// `z ↦ z^d` on the disc.
pub fn power_map(d: u32) -> RationalBallMap {
    let p = CPoly::from_terms(1, [(MultiIndex::new(vec![d]), c(1.0, 0.0))]);
    RationalBallMap::polynomial(PolyMap::new(1, vec![p]).unwrap()).unwrap()
}

/// The homogeneous map `z ↦ z^{⊗d}` with components `√(multinomial) z^α`.
pub fn homogeneous_map(n: usize, d: u32) -> RationalBallMap {
    let basis = crate::MonomialBasis::new(n, d);
    let comps = basis
        .iter()
        .filter(|a| a.degree() == d)
        .map(|a| {
            let mut coef = factorial(d);
            for &e in a.exponents() {
                coef /= factorial(e);
            }
            CPoly::from_terms(n, [(a.clone(), c(coef.sqrt(), 0.0))])
        })
        .collect();
    RationalBallMap::polynomial(PolyMap::new(n, comps).unwrap()).unwrap()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Degree-2 polynomial maps of maximal embedding dimension: the linear part
/// weighted by `√t`, the homogeneous quadratic part by `√(1 − t)`.
pub fn quadratic_ball_map(n: usize, t: f64) -> RationalBallMap {
    let lin = homogeneous_map(n, 1);
    let quad = homogeneous_map(n, 2);
    let comps = lin
        .numerator()
        .components()
        .iter()
        .map(|p| p.scale(c(t.sqrt(), 0.0)))
        .chain(
            quad.numerator()
                .components()
                .iter()
                .map(|p| p.scale(c((1.0 - t).sqrt(), 0.0))),
        )
        .collect();
    RationalBallMap::polynomial(PolyMap::new(n, comps).unwrap()).unwrap()
}

/// The disc map whose underlying form is
/// `(1 + b z̄ + b̄ z + c|z|²)(1 − |z|²)`. Requires `c ≥ |b|²` and a positive
/// first factor on the closed disc. Classifies as Ball for `|b|² < c(1 − c)`,
/// generalized ball for `|b|² > c(1 − c)`, Heisenberg at equality.
pub fn disc_quadratic_map(b: C64, cc: f64) -> Result<RationalBallMap> {
    let mi = |e: u32| MultiIndex::new(vec![e]);
    let r = HermForm::from_terms(
        1,
        2,
        [
            (mi(0), mi(0), c(1.0, 0.0)),
            (mi(1), mi(0), b.conj()),
            (mi(1), mi(1), c(cc - 1.0, 0.0)),
            (mi(2), mi(1), -b.conj()),
            (mi(2), mi(2), c(-cc, 0.0)),
        ],
    );
    map_from_form(&r)
}

/// A map `P/G` with the given underlying form, read off at the origin.
pub fn map_from_form(r: &HermForm) -> Result<RationalBallMap> {
    let (p, g, _) = r.origin_representative()?;
    RationalBallMap::new(p, g)
}

/// Standard normal pair by Box–Muller.
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    C64::from_polar((-2.0 * u.ln()).sqrt(), 2.0 * std::f64::consts::PI * v) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    DMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        q[(i, j)] * ph
    })
}

/// Uniformly random direction scaled to a radius uniform in `[0, max_norm]`.
pub fn random_ball_point<R: Rng + ?Sized>(n: usize, max_norm: f64, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let t = max_norm * rng.gen::<f64>();
    v.into_iter().map(|x| x * (t / norm)).collect()
}

pub fn random_automorphism<R: Rng + ?Sized>(n: usize, max_norm: f64, rng: &mut R) -> BallAutomorphism {
    let a = random_ball_point(n, max_norm, rng);
    BallAutomorphism::new(&a, random_unitary(n, rng)).unwrap()
}

/// Finite Blaschke product `Π (a_k − z)/(1 − ā_k z)` of degree `d`.
pub fn random_blaschke<R: Rng + ?Sized>(d: u32, rng: &mut R) -> RationalBallMap {
    let mut p = CPoly::one(1);
    let mut g = CPoly::one(1);
    let z = MultiIndex::new(vec![1]);
    let one = MultiIndex::new(vec![0]);
    for _ in 0..d {
        let a = random_ball_point(1, 0.8, rng)[0];
        p = &p * &CPoly::from_terms(1, [(one.clone(), a), (z.clone(), c(-1.0, 0.0))]);
        g = &g * &CPoly::from_terms(1, [(one.clone(), c(1.0, 0.0)), (z.clone(), -a.conj())]);
    }
    RationalBallMap::new(PolyMap::new(1, vec![p]).unwrap(), g).unwrap()
}

/// A random proper map `Bₙ → B_N` of degree `d`, generically in lowest terms:
/// on the disc a Blaschke product, otherwise an automorphism followed by
/// `d − 1` partial tensor steps with random target rotations, then random
/// source and target automorphisms.
pub fn random_proper_map<R: Rng + ?Sized>(n: usize, d: u32, rng: &mut R) -> RationalBallMap {
    let base = if n == 1 {
        random_blaschke(d, rng)
    } else {
        let psi = random_automorphism(n, 0.6, rng);
        let p = PolyMap::new(n, psi.numerator()).unwrap();
        let mut f = RationalBallMap::new(p, psi.denominator()).unwrap();
        for _ in 1..d {
            let w = random_unitary(f.target_dim(), rng);
            let p = f.numerator().apply_target(&w);
            let mut comps = p.components().to_vec();
            let last = comps.pop().unwrap();
            for k in 0..n {
                comps.push(&last * &CPoly::var(n, k));
            }
            f = RationalBallMap::new(PolyMap::new(n, comps).unwrap(), f.denominator().clone()).unwrap();
        }
        f
    };
    let f = precompose(&base, &random_automorphism(n, 0.5, rng)).unwrap();
    let tau = random_automorphism(f.target_dim(), 0.4, rng);
    postcompose(&f, &tau).unwrap()
}

/// `τ∘f_σ∘φ_a` with random disc automorphisms.
pub fn scrambled_f_sigma<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> RationalBallMap {
    let f = precompose(&f_sigma(sigma), &random_automorphism(1, 0.7, rng)).unwrap();
    postcompose(&f, &random_automorphism(1, 0.7, rng)).unwrap()
}

/// `f∘φ_a` for a point `a`.
pub fn moved(f: &RationalBallMap, a: &[C64]) -> RationalBallMap {
    precompose(f, &phi(a).unwrap()).unwrap()
}
