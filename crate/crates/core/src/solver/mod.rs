//! The two sides of the welfare duality.
//!
//! [`max_welfare`] solves the assignment LP over all permitted groups, one
//! consistency row per type. [`min_imputation`] minimizes the value of an
//! imputation over the no-blocking polytope, either with every group as a
//! row or by cutting planes driven by a [`ViolationOracle`].

pub mod simplex;

use crate::error::{Error, Result};
use crate::game::Game;
use crate::model::{check_cap, count_groups, enumerate_groups, iter_groups, Assignment, Group, DEFAULT_ENUMERATION_CAP};
use crate::surplus::SurplusTable;
use crate::model::{SizeBounds, TypeSpace};

pub use simplex::{
    certificate_residuals, solve_lp, solve_lp_with, CertificateResiduals, LinearProgram, Sense,
    SimplexOptions, SolveReport, Status,
};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub simplex: SimplexOptions,
    pub enumeration_cap: u64,
    /// Round budget for the cutting-plane dual.
    pub max_rounds: usize,
    /// Excess above which a group counts as blocking.
    pub violation_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            max_rounds: 10_000,
            violation_tol: 1e-9,
        }
    }
}

/// Payoff per type.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputation(pub Vec<f64>);

impl Imputation {
    pub fn zeros(type_count: usize) -> Self {
        Self(vec![0.0; type_count])
    }

    pub fn uniform(type_count: usize, value: f64) -> Self {
        Self(vec![value; type_count])
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.0
    }

    /// `sum_{i in G} u(i)` with multiplicity.
    pub fn group_payoff(&self, g: &Group) -> f64 {
        g.members().iter().map(|&i| self.0[i]).sum()
    }

    /// `sum_i u(i) mu(i)`
    pub fn value(&self, space: &TypeSpace) -> f64 {
        self.0.iter().zip(space.masses()).map(|(u, m)| u * m).sum()
    }
}

/// Maximum social welfare `Pi(mu)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WelfareValue(pub f64);

#[derive(Debug, Clone)]
pub struct WelfareSolution {
    pub assignment: Assignment,
    pub value: WelfareValue,
    pub report: SolveReport,
}

impl WelfareSolution {
    /// Multipliers of the consistency rows, one per type.
    pub fn row_imputation(&self) -> Imputation {
        Imputation(self.report.dual.clone())
    }
}

/// Builds the assignment LP over `groups`: one column per group, one
/// consistency row per type.
pub fn welfare_program(space: &TypeSpace, surplus: &SurplusTable, groups: &[Group]) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize, groups.len());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); space.len()];
    for (j, g) in groups.iter().enumerate() {
        lp.set_objective(j, surplus.get(g));
        for (i, c) in g.counts() {
            rows[i].push((j, c as f64));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        lp.add_equality(row, space.mass(i));
    }
    lp
}

pub fn max_welfare(game: &Game, opts: &SolverOptions) -> Result<WelfareSolution> {
    let groups = enumerate_groups(&game.space, game.bounds, opts.enumeration_cap)?;
    let lp = welfare_program(&game.space, &game.surplus, &groups);
    let report = solve_lp_with(&lp, &opts.simplex)?.into_optimal()?;
    let assignment = groups
        .iter()
        .zip(&report.primal)
        .filter(|(_, &w)| w > 0.0)
        .map(|(g, &w)| (g.clone(), w))
        .collect();
    Ok(WelfareSolution {
        assignment,
        value: WelfareValue(report.objective),
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualStrategy {
    /// One row per permitted group.
    Full,
    /// Rows added one most-violated group at a time.
    CuttingPlane,
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    pub imputation: Imputation,
    pub value: f64,
    /// Report of the last LP solved.
    pub report: SolveReport,
    /// Groups carried as rows in the last LP.
    pub rows: Vec<Group>,
    /// Cutting-plane rounds; 1 for the full strategy.
    pub rounds: usize,
}

impl DualSolution {
    /// Row multipliers of the last LP as an assignment over its rows.
    ///
    /// A type with payoff 0 may be under-used by the multipliers, since
    /// `u >= 0` is a bound rather than a row. Such a type has zero surplus
    /// alone, so the shortfall is placed on uniform groups of the smallest
    /// permitted size without changing welfare.
    pub fn row_assignment(&self, game: &Game) -> Assignment {
        let mut a: Assignment = self
            .rows
            .iter()
            .zip(&self.report.dual)
            .filter(|(_, &w)| w > 0.0)
            .map(|(g, &w)| (g.clone(), w))
            .collect();
        let n = game.bounds.min();
        for (i, &mu) in game.space.masses().iter().enumerate() {
            let used: f64 = a.iter().map(|(g, w)| w * g.multiplicity(i) as f64).sum();
            if mu - used > 0.0 {
                a.add(Group::uniform(i, n), (mu - used) / n as f64);
            }
        }
        a
    }
}

/// `min mu.u` subject to `sum_{i in G} u(i) >= s(G)` for every `G` in
/// `rows` and `u >= 0`. Nonnegativity is implied once every uniform group
/// `[i,..,i]` is a row, since surpluses are nonnegative.
fn imputation_program(space: &TypeSpace, surplus: &SurplusTable, rows: &[Group]) -> LinearProgram {
    let k = space.len();
    let mut lp = LinearProgram::new(Sense::Minimize, k + rows.len());
    for i in 0..k {
        lp.set_objective(i, space.mass(i));
    }
    for (r, g) in rows.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = g.counts().into_iter().map(|(i, c)| (i, c as f64)).collect();
        coeffs.push((k + r, -1.0));
        lp.add_equality(&coeffs, surplus.get(g));
    }
    lp
}

fn solve_restricted(game: &Game, rows: &[Group], opts: &SolverOptions) -> Result<(Imputation, SolveReport)> {
    let lp = imputation_program(&game.space, &game.surplus, rows);
    let report = solve_lp_with(&lp, &opts.simplex)?.into_optimal()?;
    let u = Imputation(report.primal[..game.space.len()].to_vec());
    Ok((u, report))
}

pub fn min_imputation(game: &Game, strategy: DualStrategy, opts: &SolverOptions) -> Result<DualSolution> {
    match strategy {
        DualStrategy::Full => {
            let rows = enumerate_groups(&game.space, game.bounds, opts.enumeration_cap)?;
            let (imputation, report) = solve_restricted(game, &rows, opts)?;
            Ok(DualSolution {
                value: imputation.value(&game.space),
                imputation,
                report,
                rows,
                rounds: 1,
            })
        }
        DualStrategy::CuttingPlane => {
            let oracle = ExhaustiveOracle::new(game, opts.enumeration_cap, opts.violation_tol);
            min_imputation_with_oracle(game, &oracle, opts)
        }
    }
}

/// Cutting-plane dual: starting from no rows, solve the restricted LP, ask
/// the oracle for the most violated group and add it, until none is left.
pub fn min_imputation_with_oracle(
    game: &Game,
    oracle: &dyn ViolationOracle,
    opts: &SolverOptions,
) -> Result<DualSolution> {
    let mut rows: Vec<Group> = Vec::new();
    for round in 1..=opts.max_rounds {
        let (imputation, report) = solve_restricted(game, &rows, opts)?;
        match oracle.most_violated(&imputation)? {
            Some((g, _)) if !rows.contains(&g) => rows.push(g),
            _ => {
                return Ok(DualSolution {
                    value: imputation.value(&game.space),
                    imputation,
                    report,
                    rows,
                    rounds: round,
                })
            }
        }
    }
    Err(Error::NonConvergence(opts.max_rounds))
}

/// Separation oracle for the no-blocking constraints.
pub trait ViolationOracle {
    /// The group maximizing `s(G) - sum_{i in G} u(i)` when that excess is
    /// above tolerance.
    fn most_violated(&self, u: &Imputation) -> Result<Option<(Group, f64)>>;
}

/// Scans every permitted group.
pub struct ExhaustiveOracle<'a> {
    game: &'a Game,
    cap: u64,
    tol: f64,
}

impl<'a> ExhaustiveOracle<'a> {
    pub fn new(game: &'a Game, cap: u64, tol: f64) -> Self {
        Self { game, cap, tol }
    }
}

impl ViolationOracle for ExhaustiveOracle<'_> {
    fn most_violated(&self, u: &Imputation) -> Result<Option<(Group, f64)>> {
        most_violated_group(u, &self.game.surplus, &self.game.space, self.game.bounds, self.tol, self.cap)
    }
}

/// Scans only the groups with a stored surplus. Exact for nonnegative
/// imputations, which is what the restricted LPs produce: an unlisted group
/// has surplus 0 and cannot beat a nonnegative payoff sum.
pub struct TableOracle<'a> {
    game: &'a Game,
    tol: f64,
}

impl<'a> TableOracle<'a> {
    pub fn new(game: &'a Game, tol: f64) -> Self {
        Self { game, tol }
    }
}

impl ViolationOracle for TableOracle<'_> {
    fn most_violated(&self, u: &Imputation) -> Result<Option<(Group, f64)>> {
        if u.0.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidSpec(
                "table oracle requires a nonnegative imputation".into(),
            ));
        }
        let candidates = self
            .game
            .surplus
            .iter()
            .filter(|(g, _)| self.game.bounds.contains(g.size()))
            .map(|(g, v)| (g.clone(), v - u.group_payoff(g)));
        Ok(best_violation(candidates, self.tol))
    }
}

fn best_violation(candidates: impl Iterator<Item = (Group, f64)>, tol: f64) -> Option<(Group, f64)> {
    let mut best: Option<(Group, f64)> = None;
    for (g, excess) in candidates {
        // strict comparison keeps the first group in canonical order on ties
        if best.as_ref().is_none_or(|(_, b)| excess > *b) {
            best = Some((g, excess));
        }
    }
    best.filter(|(_, e)| *e > tol)
}

/// Exhaustive separation: `argmax_G s(G) - sum_{i in G} u(i)`, ties broken
/// toward the first group in canonical order.
pub fn most_violated_group(
    u: &Imputation,
    surplus: &SurplusTable,
    space: &TypeSpace,
    bounds: SizeBounds,
    tol: f64,
    cap: u64,
) -> Result<Option<(Group, f64)>> {
    check_cap(count_groups(space.len() as u64, bounds), cap)?;
    let candidates = iter_groups(space.len(), bounds).map(|g| {
        let e = surplus.get(&g) - u.group_payoff(&g);
        (g, e)
    });
    Ok(best_violation(candidates, tol))
}

/// `dual - primal`.
pub fn duality_gap(primal: WelfareValue, dual: f64) -> f64 {
    dual - primal.0
}

/// Whether `|gap| <= tol * max(1, Pi)`.
pub fn gap_certified(primal: WelfareValue, dual: f64, tol: f64) -> bool {
    duality_gap(primal, dual).abs() <= tol * primal.0.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn nondiff_welfare() {
        let game = fixtures::nondiff(1.0, 1.0);
        let sol = max_welfare(&game, &opts()).unwrap();
        assert!((sol.value.0 - 1.0).abs() < 1e-12);
        assert!((sol.assignment.weight(&Group::new(vec![0, 1])) - 1.0).abs() < 1e-12);
        let res = certificate_residuals(&welfare_program(&game.space, &game.surplus, &enumerate_groups(&game.space, game.bounds, 100).unwrap()), &sol.report);
        assert!(res.primal < 1e-9 && res.dual < 1e-9 && res.complementarity < 1e-9);
    }

    #[test]
    fn unify_welfare() {
        let game = fixtures::unify();
        let sol = max_welfare(&game, &opts()).unwrap();
        assert!((sol.value.0 - 6.0).abs() < 1e-9);
        assert!((sol.assignment.weight(&Group::new(vec![0, 1, 1])) - 0.5).abs() < 1e-9);
        assert!((sol.assignment.weight(&Group::new(vec![2, 2])) - 0.5).abs() < 1e-9);
        assert!(crate::model::is_consistent(&sol.assignment, &game.space, 1e-9).unwrap());
    }

    #[test]
    fn zero_surplus() {
        let mut game = fixtures::unify();
        game.surplus = SurplusTable::new();
        let sol = max_welfare(&game, &opts()).unwrap();
        assert_eq!(sol.value.0, 0.0);
        assert!(crate::model::is_consistent(&sol.assignment, &game.space, 1e-9).unwrap());
        for strategy in [DualStrategy::Full, DualStrategy::CuttingPlane] {
            let d = min_imputation(&game, strategy, &opts()).unwrap();
            assert_eq!(d.imputation.0, vec![0.0; 3]);
        }
    }

    #[test]
    fn nondiff_dual_is_corner() {
        let game = fixtures::nondiff(2.0, 1.0);
        for strategy in [DualStrategy::Full, DualStrategy::CuttingPlane] {
            let d = min_imputation(&game, strategy, &opts()).unwrap();
            assert_eq!(d.imputation.0, vec![0.0, 1.0], "{strategy:?}");
            assert!((d.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unbounded_closed_form() {
        for n in 2..=6 {
            let game = fixtures::unbounded(n);
            let full = min_imputation(&game, DualStrategy::Full, &opts()).unwrap();
            let cut = min_imputation(&game, DualStrategy::CuttingPlane, &opts()).unwrap();
            let expected = (n as f64 - 1.0) / n as f64;
            assert!((full.value - expected).abs() < 1e-12);
            assert!((cut.value - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn violation_oracle_examples() {
        let game = fixtures::nondiff(1.0, 1.0);
        let v = most_violated_group(&Imputation::zeros(2), &game.surplus, &game.space, game.bounds, 1e-9, 100).unwrap();
        assert_eq!(v, Some((Group::new(vec![0, 1]), 1.0)));
        let v = most_violated_group(&Imputation(vec![0.5, 0.5]), &game.surplus, &game.space, game.bounds, 1e-9, 100).unwrap();
        assert_eq!(v, None);

        let game = fixtures::unify();
        let v = most_violated_group(&Imputation::zeros(3), &game.surplus, &game.space, game.bounds, 1e-9, 100).unwrap();
        assert_eq!(v, Some((Group::new(vec![0, 1, 1]), 9.0)));
        assert!(matches!(
            most_violated_group(&Imputation::zeros(3), &game.surplus, &game.space, game.bounds, 1e-9, 3),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn ties_go_to_first_canonical_group() {
        let space = TypeSpace::from_masses(&[1.0, 1.0]).unwrap();
        let surplus = SurplusTable::new().with(&[0, 1], 2.0).unwrap().with(&[1, 1], 2.0).unwrap();
        let v = most_violated_group(&Imputation::zeros(2), &surplus, &space, SizeBounds::exactly(2).unwrap(), 1e-9, 100).unwrap();
        assert_eq!(v.unwrap().0, Group::new(vec![0, 1]));
    }

    #[test]
    fn table_oracle_scales_past_the_cap() {
        // 1000 types, sizes 1..=4: far beyond exhaustive enumeration
        let masses = vec![1.0; 1000];
        let space = TypeSpace::from_masses(&masses).unwrap();
        let surplus = SurplusTable::new()
            .with(&[0, 1, 2, 3], 4.0).unwrap()
            .with(&[5, 5], 1.0).unwrap()
            .with(&[7], 0.25).unwrap();
        let game = Game::new(space, SizeBounds::new(1, 4).unwrap(), surplus);
        let o = opts();
        assert!(matches!(min_imputation(&game, DualStrategy::Full, &o), Err(Error::CapExceeded { .. })));
        let oracle = TableOracle::new(&game, o.violation_tol);
        let d = min_imputation_with_oracle(&game, &oracle, &o).unwrap();
        // [5,5] only forces u(5) >= 0.5
        assert!((d.value - (4.0 + 0.5 + 0.25)).abs() < 1e-9);
    }

    #[test]
    fn cutting_plane_round_budget() {
        let game = fixtures::unify();
        let o = SolverOptions { max_rounds: 1, ..opts() };
        assert!(matches!(
            min_imputation(&game, DualStrategy::CuttingPlane, &o),
            Err(Error::NonConvergence(1))
        ));
    }

    #[test]
    fn gap_helpers() {
        assert_eq!(duality_gap(WelfareValue(1.0), 1.0), 0.0);
        assert_eq!(duality_gap(WelfareValue(0.0), 0.0), 0.0);
        assert!(gap_certified(WelfareValue(6.0), 6.0 + 1e-10, 1e-9));
        assert!(!gap_certified(WelfareValue(6.0), 6.1, 1e-9));
    }
}
