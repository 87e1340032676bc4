//! Evaluation checked against independent reference computations.

use ballmap::fixtures::random_ball_point;
use ballmap::{CPoly, HermForm, MonomialBasis, MultiIndex, C64};
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone)]
struct Q(BigRational, BigRational);

impl Q {
    fn of(z: C64) -> Q {
        Q(
            BigRational::from_float(z.re).unwrap(),
            BigRational::from_float(z.im).unwrap(),
        )
    }

    fn mul(&self, o: &Q) -> Q {
        Q(&self.0 * &o.0 - &self.1 * &o.1, &self.0 * &o.1 + &self.1 * &o.0)
    }

    fn add(&self, o: &Q) -> Q {
        Q(&self.0 + &o.0, &self.1 + &o.1)
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.0.to_f64().unwrap(), self.1.to_f64().unwrap())
    }
}

fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-64..=64) as f64 / 64.0
}

#[test]
fn polynomial_evaluation_matches_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.gen_range(1..=3);
        let d = rng.gen_range(0..=5);
        let basis = MonomialBasis::new(n, d);
        let mut terms: Vec<(MultiIndex, C64)> = Vec::new();
        for a in basis.iter() {
            if rng.gen_bool(0.6) {
                terms.push((a.clone(), C64::new(dyadic(&mut rng), dyadic(&mut rng))));
            }
        }
        let p = CPoly::from_terms(n, terms.clone());
        let z: Vec<C64> = (0..n).map(|_| C64::new(dyadic(&mut rng), dyadic(&mut rng))).collect();
        let mut exact = Q(BigRational::zero(), BigRational::zero());
        for (a, c) in &terms {
            let mut m = Q::of(*c);
            for (k, &e) in a.exponents().iter().enumerate() {
                for _ in 0..e {
                    m = m.mul(&Q::of(z[k]));
                }
            }
            exact = exact.add(&m);
        }
        let got = p.eval(&z).unwrap();
        let want = exact.to_c64();
        let scale = terms.iter().map(|(_, c)| c.norm()).sum::<f64>().max(1.0) * 4f64.powi(d as i32);
        assert!((got - want).norm() <= 1e-14 * scale, "{got} vs {want}");
    }
}

#[test]
fn product_matches_exact_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let n = rng.gen_range(1..=2);
        let basis = MonomialBasis::new(n, 3);
        let mk = |rng: &mut ChaCha8Rng| {
            CPoly::from_terms(
                n,
                basis
                    .iter()
                    .map(|a| (a.clone(), C64::new(dyadic(rng), dyadic(rng))))
                    .collect::<Vec<_>>(),
            )
        };
        let (a, b) = (mk(&mut rng), mk(&mut rng));
        let prod = &a * &b;
        let big = MonomialBasis::new(n, 6);
        for target in big.iter() {
            let mut acc = Q(BigRational::zero(), BigRational::zero());
            for (x, cx) in a.terms() {
                for (y, cy) in b.terms() {
                    if &x.add(y) == target {
                        acc = acc.add(&Q::of(*cx).mul(&Q::of(*cy)));
                    }
                }
            }
            assert!((prod.coeff(target) - acc.to_c64()).norm() < 1e-14);
        }
    }
}

#[test]
fn form_evaluation_matches_direct_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let n = rng.gen_range(1..=3);
        let d = rng.gen_range(1..=3);
        let basis = MonomialBasis::new(n, d);
        let k = basis.len();
        let a = DMatrix::from_fn(k, k, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let c = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let r = HermForm::new(basis.clone(), c.clone()).unwrap();
        let z = random_ball_point(n, 1.0, &mut rng);
        let mono = |e: &MultiIndex| -> C64 { e.exponents().iter().zip(&z).map(|(&p, x)| x.powu(p)).product() };
        let mut want = C64::new(0.0, 0.0);
        for (i, ai) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                want += c[(i, j)] * mono(ai) * mono(bj).conj();
            }
        }
        assert!(want.im.abs() < 1e-12);
        assert!((r.eval(&z).unwrap() - want.re).abs() < 1e-12 * k as f64);
    }
}
