//! Exponent vectors and the graded ordering that indexes every coefficient
//! matrix in the crate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

/// Exponent vector of a monomial `z^α` in `n` variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α - e_k`, or `None` when `α_k = 0`.
    pub fn decrement(&self, k: usize) -> Option<MultiIndex> {
        if self.0[k] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[k] -= 1;
        Some(MultiIndex(e))
    }

    pub fn increment(&self, k: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[k] += 1;
        MultiIndex(e)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Ord for MultiIndex {
    /// Graded lexicographic: lower total degree first; within a degree, the
    /// index with the larger leading exponent comes first, so `z1` precedes
    /// `z2` and `z1^2` precedes `z1 z2`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All multi-indices in `n` variables of degree at most `d`, in graded order,
/// constant monomial first.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    n: usize,
    d: u32,
    order: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl PartialEq for MonomialBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d
    }
}

impl MonomialBasis {
    pub fn new(n: usize, d: u32) -> Self {
        assert!(n >= 1, "monomial basis needs at least one variable");
        let mut order = Vec::with_capacity(binomial(n + d as usize, d as usize));
        for deg in 0..=d {
            let mut current = vec![0u32; n];
            push_compositions(&mut order, &mut current, 0, deg);
        }
        let lookup = order.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        MonomialBasis { n, d, order, lookup }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.order[i]
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.order.iter()
    }

    /// Number of basis elements of degree strictly below `k`.
    pub fn count_below(&self, k: u32) -> usize {
        if k == 0 {
            0
        } else {
            binomial(self.n + (k - 1) as usize, (k - 1) as usize).min(self.len())
        }
    }

    /// Values of every basis monomial at `z`, in basis order.
    pub fn eval_monomials(&self, z: &[crate::C64]) -> Vec<crate::C64> {
        let pw = power_table(z, self.d);
        self.order.iter().map(|a| monomial_from_table(&pw, a)).collect()
    }
}

fn push_compositions(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    let n = cur.len();
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        push_compositions(out, cur, pos + 1, remaining - e);
    }
    cur[pos] = 0;
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `pw[k][e] = z_k^e` for `e ≤ d`.
pub(crate) fn power_table(z: &[crate::C64], d: u32) -> Vec<Vec<crate::C64>> {
    z.iter()
        .map(|&zk| {
            let mut row = Vec::with_capacity(d as usize + 1);
            let mut acc = crate::C64::new(1.0, 0.0);
            row.push(acc);
            for _ in 0..d {
                acc *= zk;
                row.push(acc);
            }
            row
        })
        .collect()
}

pub(crate) fn monomial_from_table(pw: &[Vec<crate::C64>], alpha: &MultiIndex) -> crate::C64 {
    alpha
        .exponents()
        .iter()
        .enumerate()
        .fold(crate::C64::new(1.0, 0.0), |acc, (k, &e)| acc * pw[k][e as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps(b: &MonomialBasis) -> Vec<Vec<u32>> {
        b.iter().map(|a| a.exponents().to_vec()).collect()
    }

    #[test]
    fn univariate_cubic_basis() {
        assert_eq!(
            exps(&MonomialBasis::new(1, 3)),
            vec![vec![0], vec![1], vec![2], vec![3]]
        );
    }

    #[test]
    fn bivariate_linear_basis() {
        assert_eq!(
            exps(&MonomialBasis::new(2, 1)),
            vec![vec![0, 0], vec![1, 0], vec![0, 1]]
        );
    }

    #[test]
    fn basis_length_matches_brute_force_count() {
        for n in 1..=4 {
            for d in 0..=5u32 {
                // brute force: every exponent vector in [0, d]^n with sum <= d
                let mut count = 0;
                let total = (d as usize + 1).pow(n as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut s = 0;
                    for _ in 0..n {
                        s += c % (d as usize + 1);
                        c /= d as usize + 1;
                    }
                    if s <= d as usize {
                        count += 1;
                    }
                }
                assert_eq!(MonomialBasis::new(n, d).len(), count, "n={n} d={d}");
            }
        }
        assert_eq!(MonomialBasis::new(2, 3).len(), 10);
    }

    #[test]
    fn basis_is_strictly_increasing_and_starts_at_constant() {
        let b = MonomialBasis::new(3, 4);
        assert!(b.get(0).is_zero());
        for w in b.order.windows(2) {
            assert!(w[0] < w[1], "{:?} !< {:?}", w[0], w[1]);
        }
        for (i, a) in b.iter().enumerate() {
            assert_eq!(b.index_of(a), Some(i));
        }
    }

    #[test]
    fn count_below_degree() {
        let b = MonomialBasis::new(2, 3);
        assert_eq!(b.count_below(0), 0);
        assert_eq!(b.count_below(1), 1);
        assert_eq!(b.count_below(2), 3);
        assert_eq!(b.count_below(3), 6);
    }
}
