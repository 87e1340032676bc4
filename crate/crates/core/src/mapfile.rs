//! JSON map files.
//!
//! ```json
//! {"n": 1, "N": 1,
//!  "numerator": [[{"exponents": [1], "coeff": [0.5, 0.0]},
//!                 {"exponents": [3], "coeff": [1.0, 0.0]}]],
//!  "denominator": [{"exponents": [0], "coeff": [1.0, 0.0]},
//!                  {"exponents": [2], "coeff": [0.5, 0.0]}],
//!  "name": "f_half"}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::MultiIndex;
use crate::poly::{CPoly, PolyMap};
use crate::rational::RationalBallMap;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub n: usize,
    #[serde(rename = "N")]
    pub target_dim: usize,
    pub numerator: Vec<Vec<Term>>,
    pub denominator: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// Coefficient records of one polynomial.
pub fn terms_of(p: &CPoly) -> Vec<Term> {
    p.terms()
        .map(|(a, c)| Term {
            exponents: a.exponents().to_vec(),
            coeff: [c.re, c.im],
        })
        .collect()
}

fn poly_of(n: usize, terms: &[Term]) -> Result<CPoly> {
    for t in terms {
        if t.exponents.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.exponents.len(),
            });
        }
        if !t.coeff.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("non-finite coefficient"));
        }
    }
    Ok(CPoly::from_terms(
        n,
        terms
            .iter()
            .map(|t| (MultiIndex::new(t.exponents.clone()), C64::new(t.coeff[0], t.coeff[1]))),
    ))
}

impl MapFile {
    pub fn from_map(f: &RationalBallMap, name: Option<String>) -> Self {
        MapFile {
            n: f.nvars(),
            target_dim: f.target_dim(),
            numerator: f.numerator().components().iter().map(terms_of).collect(),
            denominator: terms_of(f.denominator()),
            name,
            notes: None,
        }
    }

    /// Structural conversion; sampling checks are left to validation.
    pub fn to_map(&self) -> Result<RationalBallMap> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if self.numerator.len() != self.target_dim {
            return Err(Error::DimensionMismatch {
                expected: self.target_dim,
                got: self.numerator.len(),
            });
        }
        let comps = self
            .numerator
            .iter()
            .map(|t| poly_of(self.n, t))
            .collect::<Result<Vec<_>>>()?;
        let g = poly_of(self.n, &self.denominator)?;
        RationalBallMap::new(PolyMap::new(self.n, comps)?, g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map files always serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
