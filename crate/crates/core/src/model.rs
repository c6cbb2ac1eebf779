//! Type spaces, multiset groups and assignments.
//!
//! Types are addressed by their index in the [`TypeSpace`]. A [`Group`] is a
//! multiset of type indices stored as a sorted list, so two groups compare
//! equal exactly when they have the same multiplicities. Groups are ordered
//! by size first and lexicographically within a size; assignments and
//! enumerations follow that order.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of groups materialized by an enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Default cap on the largest permitted group size.
pub const DEFAULT_MAX_SIZE_CAP: usize = 8;

/// Finite set of player types, each with a positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSpace {
    labels: Vec<String>,
    masses: Vec<f64>,
}

impl TypeSpace {
    pub fn new(labels: Vec<String>, masses: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace("at least one type is required".into()));
        }
        if labels.len() != masses.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels but {} masses",
                labels.len(),
                masses.len()
            )));
        }
        for (label, &mass) in labels.iter().zip(&masses) {
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "type `{label}` has mass {mass}; masses must be positive and finite"
                )));
            }
        }
        let mut seen = labels.clone();
        seen.sort();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpace(format!("duplicate label `{}`", w[0])));
        }
        Ok(Self { labels, masses })
    }

    /// Space labelled `"1"`, `"2"`, ... in index order.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let labels = (1..=masses.len()).map(|i| i.to_string()).collect();
        Self::new(labels, masses.to_vec())
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Same labels with every mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.labels.clone(),
            self.masses.iter().map(|m| m * factor).collect(),
        )
    }

    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        Self::new(self.labels.clone(), masses)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownType {
                index,
                len: self.len(),
            })
        }
    }
}

/// Permitted group sizes `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBounds {
    min: usize,
    max: usize,
}

impl SizeBounds {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        Self::with_cap(min, max, DEFAULT_MAX_SIZE_CAP)
    }

    pub fn with_cap(min: usize, max: usize, cap: usize) -> Result<Self> {
        if min == 0 {
            return Err(Error::InvalidBounds("minimum size must be at least 1".into()));
        }
        if max < min {
            return Err(Error::InvalidBounds(format!(
                "maximum size {max} is below minimum size {min}"
            )));
        }
        if max > cap {
            return Err(Error::InvalidBounds(format!(
                "maximum size {max} exceeds the cap of {cap}"
            )));
        }
        Ok(Self { min, max })
    }

    /// Bounds admitting exactly one size.
    pub fn exactly(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn min(&self) -> usize {
        self.min
    }

    pub fn max(&self) -> usize {
        self.max
    }

    pub fn sizes(&self) -> RangeInclusive<usize> {
        self.min..=self.max
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.min..=self.max).contains(&n)
    }
}

/// A group of players as a canonical (sorted) multiset of type indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Group {
    members: Vec<usize>,
}

impl Group {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        Self { members }
    }

    /// Group holding `count` copies of type `i`.
    pub fn uniform(i: usize, count: usize) -> Self {
        Self {
            members: vec![i; count],
        }
    }

    /// Builds a group from per-type multiplicities.
    pub fn from_multiplicities(counts: &[usize]) -> Self {
        let members = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
            .collect();
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Number of members of type `i`.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.members.iter().filter(|&&m| m == i).count()
    }

    /// `(type, multiplicity)` pairs for the types present, in type order.
    pub fn counts(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &m in &self.members {
            match out.last_mut() {
                Some((t, c)) if *t == m => *c += 1,
                _ => out.push((m, 1)),
            }
        }
        out
    }

    pub fn multiplicities(&self, type_count: usize) -> Vec<usize> {
        let mut out = vec![0; type_count];
        for &m in &self.members {
            out[m] += 1;
        }
        out
    }

    pub fn max_type(&self) -> Option<usize> {
        self.members.last().copied()
    }

    /// Labels of the members, in canonical order.
    pub fn labels<'a>(&self, space: &'a TypeSpace) -> Vec<&'a str> {
        self.members.iter().map(|&m| space.label(m)).collect()
    }
}

impl Ord for Group {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.members
            .len()
            .cmp(&other.members.len())
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for Group {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, m) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

/// Multiplicity of type `i` in `g`.
pub fn group_multiplicity(g: &Group, i: usize) -> usize {
    g.multiplicity(i)
}

/// Lexicographic iterator over the size-`size` multisets of `0..type_count`.
#[derive(Debug, Clone)]
pub struct Multisets {
    type_count: usize,
    current: Option<Vec<usize>>,
}

impl Multisets {
    pub fn new(type_count: usize, size: usize) -> Self {
        let current = if type_count == 0 && size > 0 {
            None
        } else {
            Some(vec![0; size])
        };
        Self {
            type_count,
            current,
        }
    }
}

impl Iterator for Multisets {
    type Item = Group;

    fn next(&mut self) -> Option<Group> {
        let current = self.current.as_mut()?;
        let out = Group {
            members: current.clone(),
        };
        match current.iter().rposition(|&m| m + 1 < self.type_count) {
            Some(pos) => {
                let next = current[pos] + 1;
                for m in &mut current[pos..] {
                    *m = next;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// Iterator over every permitted group, size-major and lexicographic within
/// a size. Does not materialize anything, so it is not subject to a cap.
pub fn iter_groups(type_count: usize, bounds: SizeBounds) -> impl Iterator<Item = Group> {
    bounds
        .sizes()
        .flat_map(move |n| Multisets::new(type_count, n))
}

/// Binomial coefficient as an exact big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 1..=k {
        acc *= n - k + j;
        acc /= j;
    }
    acc
}

/// Number of size-`n` multisets over `k` types, `C(k+n-1, n)`.
pub fn multiset_coefficient(k: u64, n: u64) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    if k == 0 {
        return BigUint::zero();
    }
    binomial(k + n - 1, n)
}

/// Exact number of permitted groups over `type_count` types.
pub fn count_groups(type_count: u64, bounds: SizeBounds) -> BigUint {
    bounds
        .sizes()
        .map(|n| multiset_coefficient(type_count, n as u64))
        .sum()
}

pub(crate) fn check_cap(count: BigUint, cap: u64) -> Result<usize> {
    match count.to_u64() {
        Some(c) if c <= cap => Ok(c as usize),
        _ => Err(Error::CapExceeded { count, cap }),
    }
}

/// Every permitted group, in canonical order.
pub fn enumerate_groups(space: &TypeSpace, bounds: SizeBounds, cap: u64) -> Result<Vec<Group>> {
    let count = check_cap(count_groups(space.len() as u64, bounds), cap)?;
    let mut out = Vec::with_capacity(count);
    out.extend(iter_groups(space.len(), bounds));
    Ok(out)
}

/// Mass per group, the statistical description of a partition into groups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    weights: BTreeMap<Group, f64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `mass` to the weight of `g`. Zero masses are not stored.
    pub fn add(&mut self, g: Group, mass: f64) {
        if mass == 0.0 {
            return;
        }
        *self.weights.entry(g).or_insert(0.0) += mass;
    }

    pub fn weight(&self, g: &Group) -> f64 {
        self.weights.get(g).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Group, f64)> {
        self.weights.iter().map(|(g, &w)| (g, w))
    }

    /// The size-`n` bucket.
    pub fn by_size(&self, n: usize) -> impl Iterator<Item = (&Group, f64)> {
        self.iter().filter(move |(g, _)| g.size() == n)
    }

    /// Groups with weight above `tol`.
    pub fn support(&self, tol: f64) -> impl Iterator<Item = (&Group, f64)> {
        self.iter().filter(move |&(_, w)| w > tol)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .map(|(g, &w)| (g.clone(), w * factor))
                .collect(),
        }
    }

    /// Drops weights with absolute value at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .filter(|(_, w)| w.abs() > tol)
                .map(|(g, &w)| (g.clone(), w))
                .collect(),
        }
    }

    /// Smallest weight, or `None` when empty.
    pub fn min_weight(&self) -> Option<f64> {
        self.weights.values().copied().reduce(f64::min)
    }
}

impl FromIterator<(Group, f64)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Group, f64)>>(iter: T) -> Self {
        let mut a = Assignment::new();
        for (g, w) in iter {
            a.add(g, w);
        }
        a
    }
}

/// Per-type residual `sum_G G(i) tau(G) - mu(i)`.
pub fn consistency_residual(a: &Assignment, space: &TypeSpace) -> Result<Vec<f64>> {
    let mut residual: Vec<f64> = space.masses().iter().map(|m| -m).collect();
    for (g, w) in a.iter() {
        for (i, c) in g.counts() {
            space.check_index(i)?;
            residual[i] += c as f64 * w;
        }
    }
    Ok(residual)
}

/// Checks nonnegativity and the consistency condition, each residual taken
/// relative to the type's mass.
pub fn is_consistent(a: &Assignment, space: &TypeSpace, tol: f64) -> Result<bool> {
    if a.iter().any(|(_, w)| w < -tol) {
        return Ok(false);
    }
    let residual = consistency_residual(a, space)?;
    Ok(residual
        .iter()
        .zip(space.masses())
        .all(|(r, m)| r.abs() <= tol * m.max(1.0)))
}
