//! Surplus functions on groups.
//!
//! A [`SurplusTable`] is sparse: groups without an entry have surplus 0.
//! [`build_envy_surplus`] derives a table from a quasi-linear exchange
//! economy in which each agent envies the largest consumption in its group.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Group};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurplusTable {
    entries: BTreeMap<Group, f64>,
}

impl SurplusTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the surplus of `g`. Negative values are clamped to 0.
    pub fn insert(&mut self, g: Group, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "surplus of {g} is {value}; values must be finite"
            )));
        }
        let value = if value < 0.0 {
            warn!("surplus of {g} is negative ({value}); clamping to 0");
            0.0
        } else {
            value
        };
        self.entries.insert(g, value);
        Ok(())
    }

    pub fn with(mut self, members: &[usize], value: f64) -> Result<Self> {
        self.insert(Group::new(members.to_vec()), value)?;
        Ok(self)
    }

    pub fn get(&self, g: &Group) -> f64 {
        self.entries.get(g).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Group, f64)> {
        self.entries.iter().map(|(g, &v)| (g, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest stored value; 0 for an empty table.
    pub fn max_value(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    /// Total surplus `sum_G s(G) tau(G)` of an assignment.
    pub fn welfare(&self, a: &Assignment) -> f64 {
        a.iter().map(|(g, w)| self.get(g) * w).sum()
    }
}

impl FromIterator<(Group, f64)> for SurplusTable {
    /// Collects entries, clamping negatives; non-finite values panic.
    fn from_iter<T: IntoIterator<Item = (Group, f64)>>(iter: T) -> Self {
        let mut t = SurplusTable::new();
        for (g, v) in iter {
            t.insert(g, v).expect("finite surplus value");
        }
        t
    }
}

pub fn surplus_of(t: &SurplusTable, g: &Group) -> f64 {
    t.get(g)
}

/// One agent type of an exchange economy with groupwise envy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvyAgent {
    pub label: String,
    /// Endowment of money.
    pub money: f64,
    /// Endowment of the consumption good.
    pub good: f64,
    /// Coefficient on the square-root consumption term.
    pub coef: f64,
}

/// Utility of an agent with coefficient `b` consuming `x` in a group whose
/// largest consumption is `x_max`, money excluded:
/// `b * sqrt(x) + (x - x_max)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvyEconomySpec {
    pub agents: Vec<EnvyAgent>,
}

impl EnvyEconomySpec {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::InvalidSpec("economy has no agents".into()));
        }
        for a in &self.agents {
            let ok = a.money.is_finite()
                && a.money >= 0.0
                && a.good.is_finite()
                && a.good >= 0.0
                && a.coef.is_finite()
                && a.coef > 0.0;
            if !ok {
                return Err(Error::InvalidSpec(format!(
                    "agent `{}`: endowments must be nonnegative and the coefficient positive",
                    a.label
                )));
            }
        }
        Ok(())
    }
}

/// Best reallocation of the good inside one group.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvyOptimum {
    pub value: f64,
    /// Consumption for each member, aligned with the group's members.
    pub consumption: Vec<f64>,
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        }
    }
    let x = 0.5 * (lo + hi);
    // endpoints matter when the optimum sits on the boundary
    [(x, f(x)), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Maximizes total non-money utility of a group of one or two agents over
/// reallocations of the pooled good.
pub fn envy_group_optimum(spec: &EnvyEconomySpec, g: &Group, opt_tol: f64) -> Result<EnvyOptimum> {
    spec.validate()?;
    // Written this way so a NaN tolerance is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(opt_tol > 0.0) {
        return Err(Error::InvalidSpec("optimization tolerance must be positive".into()));
    }
    let agent = |i: usize| {
        spec.agents.get(i).ok_or(Error::UnknownType {
            index: i,
            len: spec.agents.len(),
        })
    };
    match g.members() {
        [i] => {
            let a = agent(*i)?;
            Ok(EnvyOptimum {
                value: a.coef * a.good.sqrt(),
                consumption: vec![a.good],
            })
        }
        [i, j] => {
            let (a, b) = (agent(*i)?, agent(*j)?);
            let total = a.good + b.good;
            let f = |x: f64| {
                let y = (total - x).max(0.0);
                a.coef * x.sqrt() + b.coef * y.sqrt() + total - 2.0 * x.max(y)
            };
            // concave on each side of the equal split
            let half = 0.5 * total;
            let left = golden_max(f, 0.0, half, opt_tol);
            let right = golden_max(f, half, total, opt_tol);
            let (x, value) = if right.1 > left.1 { right } else { left };
            Ok(EnvyOptimum {
                value,
                consumption: vec![x, total - x],
            })
        }
        other => Err(Error::InvalidSpec(format!(
            "envy surplus is defined for groups of one or two agents, got size {}",
            other.len()
        ))),
    }
}

/// Surplus of every singleton and (when `max_size == 2`) every pair.
pub fn build_envy_surplus(spec: &EnvyEconomySpec, max_size: usize, opt_tol: f64) -> Result<SurplusTable> {
    spec.validate()?;
    if !(1..=2).contains(&max_size) {
        return Err(Error::InvalidSpec(format!(
            "envy surplus supports groups of at most 2 agents, got {max_size}"
        )));
    }
    let k = spec.agents.len();
    let mut table = SurplusTable::new();
    for i in 0..k {
        let g = Group::new(vec![i]);
        let v = envy_group_optimum(spec, &g, opt_tol)?.value;
        table.insert(g, v)?;
    }
    if max_size == 2 {
        for i in 0..k {
            for j in i..k {
                let g = Group::new(vec![i, j]);
                let v = envy_group_optimum(spec, &g, opt_tol)?.value;
                table.insert(g, v)?;
            }
        }
    }
    Ok(table)
}

/// Per-type bound `a(i)` for checks of the form `s(G) <= sum_{i in G} a(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundVector(pub Vec<f64>);

/// Groups whose surplus exceeds the bound by more than `tol`. Only stored
/// entries can violate a nonnegative bound, so only they are scanned.
pub fn verify_upper_bound(t: &SurplusTable, a: &BoundVector, tol: f64) -> Vec<Group> {
    t.iter()
        .filter(|(g, v)| {
            let bound: f64 = g
                .members()
                .iter()
                .map(|&m| a.0.get(m).copied().unwrap_or(0.0))
                .sum();
            *v > bound + tol
        })
        .map(|(g, _)| g.clone())
        .collect()
}

/// The two-type economy in which one type holds all of the good and values
/// it a hundred times more.
pub fn envy_fixture() -> EnvyEconomySpec {
    EnvyEconomySpec {
        agents: vec![
            EnvyAgent {
                label: "1".into(),
                money: 0.0,
                good: 0.0,
                coef: 1.0,
            },
            EnvyAgent {
                label: "2".into(),
                money: 0.0,
                good: 100.0,
                coef: 100.0,
            },
        ],
    }
}
