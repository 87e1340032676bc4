//! Normal forms and invariants for rational proper maps between unit balls.
//!
//! A map `f = p/g : Bₙ → B_N` is studied through its underlying form
//! `r = |g|² − ‖p‖²`, a Hermitian polynomial divisible by `1 − ‖z‖²`.
//! The exhaustion function `Λ = r/(1 − ‖z‖²)^d` has a unique minimum in the
//! ball; moving it to the origin and diagonalizing the quadratic part of the
//! denominator gives a normal form whose diagonal entries are invariants.

// `!(x < 1.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod automorphism;
pub mod error;
pub mod existence;
pub mod fixtures;
pub mod form;
pub mod lambda;
pub mod linalg;
pub mod mapfile;
pub mod monomial;
pub mod normal_form;
pub mod par;
pub mod poly;
pub mod polyclass;
pub mod rational;
pub mod roots;
pub mod sampling;
pub mod takagi;

pub type C64 = num_complex::Complex64;

pub use automorphism::{phi, BallAutomorphism};
pub use error::{Error, Result};
pub use form::{HermForm, Signature};
pub use lambda::{find_critical_point, lambda_eval, CriticalPoint, LambdaEval, SolverOptions};
pub use mapfile::MapFile;
pub use monomial::{MonomialBasis, MultiIndex};
pub use normal_form::{invariants, normalize, spherically_equivalent, EquivalenceStatus, NormalForm};
pub use par::Exec;
pub use poly::{CPoly, PolyMap};
pub use polyclass::{classify_poly_equiv, Model, PolyClassification};
pub use rational::{validate, RationalBallMap, ValidationOptions, ValidationReport};
