//! Fractional groups: size-`L` multisets that stand for `L/n`-fold
//! replications of `n`-person groups.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_cap, multiset_coefficient, Group, Multisets, SizeBounds};
use crate::surplus::SurplusTable;

/// How the common group size `L` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LMode {
    /// Least common multiple of the permitted sizes.
    #[default]
    Lcm,
    /// `N!` for the largest size `N`.
    Factorial,
}

impl LMode {
    pub fn name(self) -> &'static str {
        match self {
            LMode::Lcm => "lcm",
            LMode::Factorial => "factorial",
        }
    }
}

/// Common size `L` into which every permitted group size divides.
/// Saturates at `u64::MAX` for absurdly large bounds.
pub fn unified_size(bounds: SizeBounds, mode: LMode) -> u64 {
    let mut sizes = bounds.sizes().map(|n| n as u64);
    let step = |acc: u64, n: u64| -> Option<u64> {
        match mode {
            LMode::Lcm => (acc / acc.gcd(&n)).checked_mul(n),
            LMode::Factorial => acc.checked_mul(n),
        }
    };
    match mode {
        LMode::Lcm => sizes.try_fold(1u64, step),
        LMode::Factorial => (1..=bounds.max() as u64).try_fold(1u64, step),
    }
    .unwrap_or(u64::MAX)
}

/// Copies every member `factor` times.
pub fn replicate(g: &Group, factor: usize) -> Group {
    Group::new(
        g.members()
            .iter()
            .flat_map(|&i| std::iter::repeat_n(i, factor))
            .collect(),
    )
}

/// The `n`-person group whose `L/n`-fold replication is `fg`, if any.
pub fn deflate(fg: &Group, l: usize, n: usize) -> Option<Group> {
    if n == 0 || !l.is_multiple_of(n) || fg.size() != l {
        return None;
    }
    let factor = l / n;
    let mut members = Vec::with_capacity(n);
    for (i, c) in fg.counts() {
        if c % factor != 0 {
            return None;
        }
        members.extend(std::iter::repeat_n(i, c / factor));
    }
    Some(Group::new(members))
}

/// Permitted sizes `n` such that `fg` is a replication of an `n`-group.
pub fn k_membership(fg: &Group, bounds: SizeBounds, l: usize) -> Vec<usize> {
    bounds.sizes().filter(|&n| deflate(fg, l, n).is_some()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalGroup {
    pub members: Group,
    /// Sizes `n` with `members` in `K_n`, increasing.
    pub k_membership: Vec<usize>,
    /// `(N/n) s(P_n(members))`, aligned with `k_membership`.
    pub scaled_values: Vec<f64>,
    /// 0 when `k_membership` is empty, otherwise the smallest size
    /// attaining `s_hat`.
    pub r_label: usize,
    pub s_hat: f64,
}

impl FractionalGroup {
    pub fn new(members: Group, surplus: &SurplusTable, bounds: SizeBounds, l: usize) -> Self {
        let big_n = bounds.max() as f64;
        let mut k = Vec::new();
        let mut scaled = Vec::new();
        for n in bounds.sizes() {
            if let Some(g) = deflate(&members, l, n) {
                k.push(n);
                scaled.push(big_n / n as f64 * surplus.get(&g));
            }
        }
        let (r_label, s_hat) = best_size(&k, &scaled);
        Self {
            members,
            k_membership: k,
            scaled_values: scaled,
            r_label,
            s_hat,
        }
    }

    /// The group this fractional group stands for under its label.
    pub fn representative(&self) -> Option<Group> {
        if self.r_label == 0 {
            None
        } else {
            deflate(&self.members, self.members.size(), self.r_label)
        }
    }
}

fn best_size(k: &[usize], scaled: &[f64]) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (&n, &v) in k.iter().zip(scaled) {
        // strict comparison keeps the smallest attaining size
        if best.0 == 0 || v > best.1 {
            best = (n, v);
        }
    }
    best
}

/// `s_hat(fg) = max over n in K(fg) of (N/n) s(P_n(fg))`, and 0 outside
/// every `K_n`.
pub fn fractional_surplus(fg: &Group, surplus: &SurplusTable, bounds: SizeBounds, l: usize) -> f64 {
    FractionalGroup::new(fg.clone(), surplus, bounds, l).s_hat
}

/// Every size-`L` multiset with its membership, label and surplus, in
/// lexicographic order. Multisets outside every `K_n` are kept.
pub fn enumerate_fractional(
    type_count: usize,
    surplus: &SurplusTable,
    bounds: SizeBounds,
    l: u64,
    cap: u64,
) -> Result<Vec<FractionalGroup>> {
    let count = check_cap(multiset_coefficient(type_count as u64, l), cap)?;
    let l = usize::try_from(l).map_err(|_| Error::InvalidBounds(format!("unified size {l} is too large")))?;
    if let Some(n) = bounds.sizes().find(|n| l % n != 0) {
        return Err(Error::InvalidBounds(format!("size {n} does not divide {l}")));
    }
    let mut out = Vec::with_capacity(count);
    out.extend(Multisets::new(type_count, l).map(|fg| FractionalGroup::new(fg, surplus, bounds, l)));
    Ok(out)
}

/// Recomputes the labels from the stored per-size values.
pub fn partition_r(list: &[FractionalGroup]) -> Vec<usize> {
    list.iter()
        .map(|fg| best_size(&fg.k_membership, &fg.scaled_values).0)
        .collect()
}

/// Indices of `list` grouped by label.
pub fn r_cells(list: &[FractionalGroup]) -> BTreeMap<usize, Vec<usize>> {
    let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, label) in partition_r(list).into_iter().enumerate() {
        cells.entry(label).or_default().push(idx);
    }
    cells
}
