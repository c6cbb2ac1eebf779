//! Symmetric transport plans in reduced form and the maps between plans
//! and assignments.
//!
//! A reduced plan stores one weight per size-`L` multiset: the total mass
//! of that multiset's orbit. Weights are normalized so that the marginal
//! row for type `i` reads `sum_fg w(fg) mult(fg, i) N / L = mu(i)` and the
//! transport objective is `sum_fg w(fg) s_hat(fg)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Assignment, Group, SizeBounds, TypeSpace};
use crate::solver::{solve_lp_with, LinearProgram, Sense, SolveReport, SolverOptions};
use crate::surplus::SurplusTable;

use super::change_of_variable::orbit;
use super::fractional::{deflate, enumerate_fractional, replicate, FractionalGroup};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPlanReduced {
    l: usize,
    big_n: usize,
    weights: BTreeMap<Group, f64>,
}

impl SymmetricPlanReduced {
    pub fn new(l: usize, big_n: usize) -> Self {
        Self {
            l,
            big_n,
            weights: BTreeMap::new(),
        }
    }

    pub fn unified_size(&self) -> usize {
        self.l
    }

    pub fn max_size(&self) -> usize {
        self.big_n
    }

    /// Adds mass to a size-`L` multiset; zero mass is not stored.
    pub fn add(&mut self, fg: Group, mass: f64) {
        debug_assert_eq!(fg.size(), self.l);
        if mass != 0.0 {
            *self.weights.entry(fg).or_insert(0.0) += mass;
        }
    }

    pub fn weight(&self, fg: &Group) -> f64 {
        self.weights.get(fg).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Group, f64)> {
        self.weights.iter().map(|(g, &w)| (g, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum_fg w(fg) mult(fg, i) N / L` for each type.
    pub fn marginals(&self, type_count: usize) -> Vec<f64> {
        let scale = self.big_n as f64 / self.l as f64;
        let mut m = vec![0.0; type_count];
        for (fg, w) in self.iter() {
            for (i, c) in fg.counts() {
                m[i] += w * c as f64 * scale;
            }
        }
        m
    }

    pub fn objective(&self, surplus: &SurplusTable, bounds: SizeBounds) -> f64 {
        self.iter()
            .map(|(fg, w)| w * FractionalGroup::new(fg.clone(), surplus, bounds, self.l).s_hat)
            .sum()
    }

    /// Total weight on multisets outside every `K_n`.
    pub fn mass_on_r0(&self, bounds: SizeBounds) -> f64 {
        self.iter()
            .filter(|(fg, _)| bounds.sizes().all(|n| deflate(fg, self.l, n).is_none()))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Sends `tau(G)` to weight `tau(G) n / N` on the `L/n`-fold replication of
/// `G`. Marginals carry over unchanged.
pub fn assignment_to_plan(a: &Assignment, bounds: SizeBounds, l: usize) -> Result<SymmetricPlanReduced> {
    let big_n = bounds.max();
    let mut plan = SymmetricPlanReduced::new(l, big_n);
    for (g, tau) in a.iter() {
        let n = g.size();
        if n == 0 || !l.is_multiple_of(n) {
            return Err(Error::InvalidBounds(format!("group size {n} does not divide {l}")));
        }
        plan.add(replicate(g, l / n), tau * n as f64 / big_n as f64);
    }
    Ok(plan)
}

/// Splits each labelled multiset into groups of its label size:
/// `tau(P_n(fg)) += w(fg) N / n`. Fails if more than `tol` sits outside
/// every `K_n`.
pub fn plan_to_assignment(
    plan: &SymmetricPlanReduced,
    surplus: &SurplusTable,
    bounds: SizeBounds,
    tol: f64,
) -> Result<Assignment> {
    let big_n = plan.big_n as f64;
    let mut out = Assignment::new();
    let mut stray = 0.0;
    for (fg, w) in plan.iter() {
        let f = FractionalGroup::new(fg.clone(), surplus, bounds, plan.l);
        match f.representative() {
            Some(g) => out.add(g, w * big_n / f.r_label as f64),
            None => stray += w,
        }
    }
    if stray.abs() > tol {
        return Err(Error::SupportOnR0 { mass: stray });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub plan: SymmetricPlanReduced,
    pub value: f64,
    pub fractional: Vec<FractionalGroup>,
    pub report: SolveReport,
    /// Set when the first optimum used multisets outside every `K_n` and
    /// the plan was re-solved without them.
    pub resolved_off_r0: bool,
}

fn transport_program(space: &TypeSpace, columns: &[&FractionalGroup], scale: f64) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize, columns.len());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); space.len()];
    for (j, fg) in columns.iter().enumerate() {
        lp.set_objective(j, fg.s_hat);
        for (i, c) in fg.members.counts() {
            rows[i].push((j, c as f64 * scale));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        lp.add_equality(row, space.mass(i));
    }
    lp
}

/// Optimal symmetric plan over every size-`L` multiset. Its value equals
/// the maximum welfare.
pub fn transport_value(
    space: &TypeSpace,
    bounds: SizeBounds,
    surplus: &SurplusTable,
    l: u64,
    opts: &SolverOptions,
) -> Result<TransportSolution> {
    let fractional = enumerate_fractional(space.len(), surplus, bounds, l, opts.enumeration_cap)?;
    let l = l as usize;
    let scale = bounds.max() as f64 / l as f64;
    let all: Vec<&FractionalGroup> = fractional.iter().collect();
    let report = solve_lp_with(&transport_program(space, &all, scale), &opts.simplex)?.into_optimal()?;

    let stray: f64 = all
        .iter()
        .zip(&report.primal)
        .filter(|(fg, _)| fg.r_label == 0)
        .map(|(_, &w)| w)
        .sum();
    let (columns, report, resolved) = if stray > opts.simplex.feasibility_tol {
        log::debug!("transport optimum put {stray} on R0; re-solving without those columns");
        let kept: Vec<&FractionalGroup> = fractional.iter().filter(|fg| fg.r_label != 0).collect();
        let again = solve_lp_with(&transport_program(space, &kept, scale), &opts.simplex)?.into_optimal()?;
        let tol = opts.simplex.optimality_tol * report.objective.abs().max(1.0);
        if (again.objective - report.objective).abs() > tol * 1e3 {
            log::warn!(
                "restricted transport value {} differs from {}",
                again.objective,
                report.objective
            );
        }
        (kept, again, true)
    } else {
        (all, report, false)
    };

    let mut plan = SymmetricPlanReduced::new(l, bounds.max());
    for (fg, &w) in columns.iter().zip(&report.primal) {
        if w > 0.0 {
            plan.add(fg.members.clone(), w);
        }
    }
    Ok(TransportSolution {
        plan,
        value: report.objective,
        fractional,
        report,
        resolved_off_r0: resolved,
    })
}

/// A measure on ordered `L`-tuples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TuplePlan {
    pub weights: BTreeMap<Vec<usize>, f64>,
}

impl TuplePlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, tuple: Vec<usize>, mass: f64) {
        *self.weights.entry(tuple).or_insert(0.0) += mass;
    }

    /// Tuple length, 0 when empty.
    pub fn tuple_len(&self) -> usize {
        self.weights.keys().next().map_or(0, Vec::len)
    }

    pub fn marginal(&self, k: usize, type_count: usize) -> Vec<f64> {
        let mut m = vec![0.0; type_count];
        for (t, &w) in &self.weights {
            m[t[k]] += w;
        }
        m
    }

    pub fn objective(&self, s: impl Fn(&[usize]) -> f64) -> f64 {
        self.weights.iter().map(|(t, &w)| w * s(t)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedPlan {
    /// Orbit-averaged tuple plan.
    pub tuples: TuplePlan,
    /// Total mass of each orbit, keyed by its multiset.
    pub orbit_totals: BTreeMap<Group, f64>,
}

impl SymmetrizedPlan {
    /// Reduced plan in the transport normalization: orbit totals divided
    /// by `N`.
    pub fn reduced(&self, big_n: usize) -> SymmetricPlanReduced {
        let l = self.orbit_totals.keys().next().map_or(0, Group::size);
        let mut plan = SymmetricPlanReduced::new(l, big_n);
        for (g, &m) in &self.orbit_totals {
            plan.add(g.clone(), m / big_n as f64);
        }
        plan
    }
}

/// Averages a tuple plan over coordinate permutations. When `target` is
/// given, every coordinate marginal must match it within `tol`.
pub fn symmetrize_plan(
    plan: &TuplePlan,
    type_count: usize,
    target: Option<&[f64]>,
    tol: f64,
) -> Result<SymmetrizedPlan> {
    let len = plan.tuple_len();
    if let Some(t) = plan.weights.keys().find(|t| t.len() != len || t.iter().any(|&i| i >= type_count)) {
        return Err(Error::InvalidSpec(format!("malformed tuple {t:?}")));
    }
    let reference = target.unwrap_or_default();
    for k in (0..len).filter(|_| target.is_some()) {
        let m = plan.marginal(k, type_count);
        let deviation = m
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if deviation > tol {
            return Err(Error::BadMarginals {
                coordinate: k,
                deviation,
            });
        }
    }

    let mut orbit_totals: BTreeMap<Group, f64> = BTreeMap::new();
    for (t, &w) in &plan.weights {
        *orbit_totals.entry(Group::new(t.clone())).or_insert(0.0) += w;
    }
    let mut tuples = TuplePlan::new();
    for (g, &m) in &orbit_totals {
        let members = orbit(g);
        let share = m / members.len() as f64;
        for t in members {
            tuples.add(t, share);
        }
    }
    Ok(SymmetrizedPlan {
        tuples,
        orbit_totals,
    })
}
