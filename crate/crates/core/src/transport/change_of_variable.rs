//! Passing between a measure on `n`-multisets and a symmetric measure on
//! ordered `n`-tuples.
//!
//! A group `G` with multiplicities `n_i` has `n! / prod n_i!` distinct
//! orderings. Giving each ordering weight `c_n(G) tau(G)` with
//! `c_n(G) = prod n_i! / (n-1)!` makes the orbit total `n tau(G)`, and the
//! first-coordinate marginal at `i` equal to `sum_G G(i) tau(G)`.
//! Everything here is exact rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::model::Group;

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `c_n(G) = prod_i n_i! / (n-1)!` for `n = |G|`.
pub fn change_of_variable_coeff(g: &Group) -> BigRational {
    let n = g.size();
    if n == 0 {
        return BigRational::zero();
    }
    let num = g
        .counts()
        .into_iter()
        .fold(BigInt::one(), |acc, (_, c)| acc * factorial(c));
    BigRational::new(num, factorial(n - 1))
}

/// Distinct orderings of a group, lexicographic.
pub fn orbit(g: &Group) -> Vec<Vec<usize>> {
    let mut t = g.members().to_vec();
    let mut out = vec![t.clone()];
    while next_permutation(&mut t) {
        out.push(t.clone());
    }
    out
}

/// Advances to the next lexicographic permutation; false after the last.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

pub type RationalMeasure<K> = BTreeMap<K, BigRational>;

/// Bookkeeping between `tau_n` on `n`-groups and `gamma_n` on `I^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChangeOfVariable {
    pub size: usize,
}

impl ChangeOfVariable {
    pub fn new(size: usize) -> Self {
        Self { size }
    }

    /// `gamma_n(t) = c_n(Q(t)) tau_n(Q(t))`. Groups of another size are
    /// ignored.
    pub fn pull_back(&self, tau: &RationalMeasure<Group>) -> RationalMeasure<Vec<usize>> {
        let mut gamma = BTreeMap::new();
        for (g, w) in tau.iter().filter(|(g, _)| g.size() == self.size) {
            let weight = change_of_variable_coeff(g) * w;
            for t in orbit(g) {
                gamma.insert(t, weight.clone());
            }
        }
        gamma
    }

    /// Push-forward through the quotient `Q`: sums each orbit.
    pub fn push_forward(&self, gamma: &RationalMeasure<Vec<usize>>) -> RationalMeasure<Group> {
        let mut out: RationalMeasure<Group> = BTreeMap::new();
        for (t, w) in gamma {
            *out.entry(Group::new(t.clone())).or_insert_with(BigRational::zero) += w;
        }
        out
    }

    /// Marginal of `gamma` on coordinate `k`.
    pub fn marginal(gamma: &RationalMeasure<Vec<usize>>, k: usize, type_count: usize) -> Vec<BigRational> {
        let mut m = vec![BigRational::zero(); type_count];
        for (t, w) in gamma {
            m[t[k]] += w;
        }
        m
    }

    /// `sum_G G(i) tau_n(G)` over groups of this size.
    pub fn group_marginal(&self, tau: &RationalMeasure<Group>, type_count: usize) -> Vec<BigRational> {
        let mut m = vec![BigRational::zero(); type_count];
        for (g, w) in tau.iter().filter(|(g, _)| g.size() == self.size) {
            for (i, c) in g.counts() {
                m[i] += w * BigRational::from_integer(BigInt::from(c));
            }
        }
        m
    }
}
