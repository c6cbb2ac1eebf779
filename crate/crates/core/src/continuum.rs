//! Games whose groups are sub-measures of the population.
//!
//! A group is a measure `nu <= mu` with total mass between `eps_lo` and
//! `eps_hi`, where `mu` is a probability vector over types. The space of
//! such groups is replaced by a finite catalog: every `nu(i)` on the grid
//! `{0, mu(i)/m, ..., mu(i)}` whose mass is in range, plus the midpoint
//! group `((eps_lo + eps_hi)/2) mu`, which alone already admits a
//! consistent assignment. All values reported here are relative to the
//! catalog; refining the grid can only raise the welfare.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::TypeEntry;
use crate::model::TypeSpace;
use crate::solver::{solve_lp_with, Imputation, LinearProgram, Sense, SolveReport, SolverOptions};
use crate::stability::{verdict, Certificate, StabilityOptions};

const GRID_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumGame {
    space: TypeSpace,
    eps_lo: f64,
    eps_hi: f64,
}

impl ContinuumGame {
    pub fn new(space: TypeSpace, eps_lo: f64, eps_hi: f64) -> Result<Self> {
        let total = space.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidSpace(format!("masses sum to {total}, expected 1")));
        }
        if !(eps_lo > 0.0 && eps_lo <= eps_hi && eps_hi <= 1.0) {
            return Err(Error::InvalidBounds(format!(
                "group masses need 0 < {eps_lo} <= {eps_hi} <= 1"
            )));
        }
        Ok(Self { space, eps_lo, eps_hi })
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    pub fn eps_lo(&self) -> f64 {
        self.eps_lo
    }

    pub fn eps_hi(&self) -> f64 {
        self.eps_hi
    }

    pub fn midpoint_group(&self) -> MeasureGroup {
        let h = (self.eps_lo + self.eps_hi) / 2.0;
        MeasureGroup(self.space.masses().iter().map(|m| h * m).collect())
    }

    pub fn admits(&self, nu: &MeasureGroup) -> bool {
        let mass = nu.mass();
        nu.0.iter()
            .zip(self.space.masses())
            .all(|(&x, &m)| x >= 0.0 && x <= m + GRID_TOL)
            && mass >= self.eps_lo - GRID_TOL
            && mass <= self.eps_hi + GRID_TOL
    }
}

/// Per-type amounts of a sub-measure group.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MeasureGroup(pub Vec<f64>);

impl MeasureGroup {
    pub fn mass(&self) -> f64 {
        self.0.iter().sum()
    }

    fn close_to(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= GRID_TOL)
    }
}

/// Grid catalog at resolution `m`, with the midpoint group first.
pub fn grid_groups(game: &ContinuumGame, m: usize, cap: u64) -> Result<Vec<MeasureGroup>> {
    if m == 0 {
        return Err(Error::InvalidSpec("grid resolution must be at least 1".into()));
    }
    let k = game.space.len();
    let points = num_bigint::BigUint::from(m + 1).pow(k as u32);
    crate::model::check_cap(points, cap)?;

    let mut catalog = vec![game.midpoint_group()];
    let mut steps = vec![0usize; k];
    loop {
        let nu = MeasureGroup(
            steps
                .iter()
                .zip(game.space.masses())
                .map(|(&s, &mu)| s as f64 * mu / m as f64)
                .collect(),
        );
        if game.admits(&nu) && !catalog.iter().any(|c| c.close_to(&nu)) {
            catalog.push(nu);
        }
        // odometer over {0..m}^k
        let Some(pos) = steps.iter().rposition(|&s| s < m) else {
            break;
        };
        steps[pos] += 1;
        steps[pos + 1..].iter_mut().for_each(|s| *s = 0);
    }
    Ok(catalog)
}

/// Weights on catalog groups.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContinuumAssignment {
    pub weights: Vec<(MeasureGroup, f64)>,
}

impl ContinuumAssignment {
    /// `sum_nu w(nu) nu(i) - mu(i)` per type.
    pub fn residual(&self, space: &TypeSpace) -> Vec<f64> {
        let mut r: Vec<f64> = space.masses().iter().map(|m| -m).collect();
        for (nu, w) in &self.weights {
            for (ri, x) in r.iter_mut().zip(&nu.0) {
                *ri += w * x;
            }
        }
        r
    }

    pub fn is_consistent(&self, space: &TypeSpace, tol: f64) -> bool {
        self.weights.iter().all(|(_, w)| *w >= -tol) && self.residual(space).iter().all(|r| r.abs() <= tol)
    }
}

/// Everyone in copies of the midpoint group: weight `2/(eps_lo + eps_hi)`.
pub fn trivial_assignment(game: &ContinuumGame) -> ContinuumAssignment {
    let h = (game.eps_lo + game.eps_hi) / 2.0;
    ContinuumAssignment {
        weights: vec![(game.midpoint_group(), 1.0 / h)],
    }
}

/// Surplus functionals with a closed form, as used by game documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContinuumSurplus {
    /// `sum_i coef(i) nu(i)`.
    Linear { coef: Vec<f64> },
    /// Total mass of the group.
    Mass,
    /// Square of the total mass.
    MassSquared,
    Zero,
}

impl ContinuumSurplus {
    pub fn eval(&self, nu: &MeasureGroup) -> f64 {
        match self {
            ContinuumSurplus::Linear { coef } => coef.iter().zip(&nu.0).map(|(a, x)| a * x).sum(),
            ContinuumSurplus::Mass => nu.mass(),
            ContinuumSurplus::MassSquared => nu.mass().powi(2),
            ContinuumSurplus::Zero => 0.0,
        }
    }

    pub fn evaluate(&self, catalog: &[MeasureGroup]) -> Vec<f64> {
        catalog.iter().map(|nu| self.eval(nu)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumDocument {
    pub types: Vec<TypeEntry>,
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub surplus: ContinuumSurplus,
}

impl ContinuumDocument {
    pub fn into_game(&self) -> Result<(ContinuumGame, ContinuumSurplus)> {
        let space = TypeSpace::new(
            self.types.iter().map(|t| t.label.clone()).collect(),
            self.types.iter().map(|t| t.mass).collect(),
        )?;
        if let ContinuumSurplus::Linear { coef } = &self.surplus {
            if coef.len() != space.len() {
                return Err(Error::InvalidSpec(format!(
                    "{} linear coefficients for {} types",
                    coef.len(),
                    space.len()
                )));
            }
        }
        Ok((ContinuumGame::new(space, self.eps_lo, self.eps_hi)?, self.surplus.clone()))
    }
}

fn check_values(catalog: &[MeasureGroup], values: &[f64]) -> Result<()> {
    if catalog.is_empty() {
        return Err(Error::InvalidSpec("empty catalog".into()));
    }
    if values.len() != catalog.len() {
        return Err(Error::InvalidSpec(format!(
            "{} surplus values for {} catalog groups",
            values.len(),
            catalog.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec(format!("non-finite surplus value {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ContinuumSolution {
    pub assignment: ContinuumAssignment,
    pub value: f64,
    pub report: SolveReport,
}

/// Welfare LP over catalog weights with one marginal row per type.
pub fn continuum_max_welfare(
    game: &ContinuumGame,
    values: &[f64],
    catalog: &[MeasureGroup],
    opts: &SolverOptions,
) -> Result<ContinuumSolution> {
    check_values(catalog, values)?;
    let mut lp = LinearProgram::new(Sense::Maximize, catalog.len());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); game.space.len()];
    for (j, (nu, &s)) in catalog.iter().zip(values).enumerate() {
        lp.set_objective(j, s);
        for (i, &x) in nu.0.iter().enumerate() {
            if x != 0.0 {
                rows[i].push((j, x));
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        lp.add_equality(row, game.space.mass(i));
    }
    let report = solve_lp_with(&lp, &opts.simplex)?.into_optimal()?;
    let weights = catalog
        .iter()
        .zip(&report.primal)
        .filter(|(_, &w)| w > 0.0)
        .map(|(nu, &w)| (nu.clone(), w))
        .collect();
    Ok(ContinuumSolution {
        assignment: ContinuumAssignment { weights },
        value: report.objective,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct ContinuumDual {
    pub imputation: Imputation,
    pub value: f64,
    pub report: SolveReport,
}

/// Cheapest per-type payoff with `sum_i u(i) nu(i) >= s(nu)` on the
/// catalog. Payoffs are free in sign; the LP carries them as `u+ - u-`
/// with one surplus variable per catalog row.
pub fn continuum_dual(
    game: &ContinuumGame,
    values: &[f64],
    catalog: &[MeasureGroup],
    opts: &SolverOptions,
) -> Result<ContinuumDual> {
    check_values(catalog, values)?;
    let k = game.space.len();
    let mut lp = LinearProgram::new(Sense::Minimize, 2 * k);
    for (i, &mu) in game.space.masses().iter().enumerate() {
        lp.set_objective(i, mu);
        lp.set_objective(k + i, -mu);
    }
    for (nu, &s) in catalog.iter().zip(values) {
        let slack = lp.add_variable(0.0);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * k + 1);
        for (i, &x) in nu.0.iter().enumerate() {
            if x != 0.0 {
                row.push((i, x));
                row.push((k + i, -x));
            }
        }
        row.push((slack, -1.0));
        lp.add_equality(&row, s);
    }
    let report = solve_lp_with(&lp, &opts.simplex)?.into_optimal()?;
    let u = (0..k).map(|i| report.primal[i] - report.primal[k + i]).collect();
    Ok(ContinuumDual {
        imputation: Imputation(u),
        value: report.objective,
        report,
    })
}

fn payoff(u: &Imputation, nu: &MeasureGroup) -> f64 {
    u.0.iter().zip(&nu.0).map(|(a, x)| a * x).sum()
}

/// Catalog-level stability check of the primal and dual optima. Violations
/// are keyed by catalog index.
pub fn continuum_certify(
    game: &ContinuumGame,
    values: &[f64],
    catalog: &[MeasureGroup],
    stab: &StabilityOptions,
    opts: &SolverOptions,
) -> Result<Certificate<ContinuumAssignment, usize>> {
    let primal = continuum_max_welfare(game, values, catalog, opts)?;
    let dual = continuum_dual(game, values, catalog, opts)?;
    let u = dual.imputation;

    let support_violations = catalog
        .iter()
        .zip(values)
        .zip(&primal.report.primal)
        .enumerate()
        .filter(|(_, (_, &w))| w > stab.support_tol)
        .filter_map(|(j, ((nu, &s), _))| {
            let slack = payoff(&u, nu) - s;
            (slack > stab.tol).then_some((j, slack))
        })
        .collect::<Vec<_>>();
    let blocking_violations = catalog
        .iter()
        .zip(values)
        .enumerate()
        .filter_map(|(j, (nu, &s))| {
            let excess = s - payoff(&u, nu);
            (excess > stab.tol).then_some((j, excess))
        })
        .collect::<Vec<_>>();
    let dual_value = u.value(&game.space);
    let gap = dual_value - primal.value;
    Ok(Certificate {
        verdict: verdict(
            support_violations.is_empty(),
            blocking_violations.is_empty(),
            gap,
            primal.value,
            stab.tol,
        ),
        assignment: primal.assignment,
        imputation: u,
        welfare: primal.value,
        dual_value,
        support_violations,
        blocking_violations,
        gap,
    })
}
