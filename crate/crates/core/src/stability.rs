//! Stability certificates.
//!
//! An assignment is stable with imputation `u` when every formed group can
//! pay its members (`sum u <= s` on the support) and no group can block
//! (`sum u >= s` everywhere). [`certify`] solves both LPs and checks both
//! conditions together with the duality gap.
//!
//! [`conjugate_tighten`] and [`tighten_dual`] lower a no-blocking
//! imputation coordinate-wise by iterated conjugation of the surplus on
//! ordered tuples, without leaving the no-blocking set.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::Game;
use crate::model::{check_cap, count_groups, iter_groups, Assignment, Group, SizeBounds, TypeSpace};
use crate::solver::{duality_gap, max_welfare, min_imputation, DualStrategy, Imputation, SolverOptions};
use crate::surplus::SurplusTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
}

#[derive(Debug, Clone)]
pub struct Certificate<A = Assignment, K = Group> {
    pub assignment: A,
    pub imputation: Imputation,
    pub welfare: f64,
    pub dual_value: f64,
    /// Formed groups that cannot afford their members' payoffs, with slack
    /// `sum u - s`.
    pub support_violations: Vec<(K, f64)>,
    /// Groups that can block, with excess `s - sum u`.
    pub blocking_violations: Vec<(K, f64)>,
    pub gap: f64,
    pub verdict: Verdict,
}

impl<A, K> Certificate<A, K> {
    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::Stable
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StabilityOptions {
    /// Tolerance on both stability conditions and on the relative gap.
    pub tol: f64,
    /// Weights at or below this are not formed groups.
    pub support_tol: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            support_tol: 1e-12,
        }
    }
}

pub(crate) fn verdict(support: bool, blocking: bool, gap: f64, welfare: f64, tol: f64) -> Verdict {
    if support && blocking && gap.abs() <= tol * welfare.abs().max(1.0) {
        Verdict::Stable
    } else {
        Verdict::Unstable
    }
}

/// Formed groups whose members are promised more than the group produces.
pub fn check_feasibility(
    a: &Assignment,
    u: &Imputation,
    surplus: &SurplusTable,
    tol: f64,
    support_tol: f64,
) -> Vec<(Group, f64)> {
    a.support(support_tol)
        .filter_map(|(g, _)| {
            let slack = u.group_payoff(g) - surplus.get(g);
            (slack > tol).then(|| (g.clone(), slack))
        })
        .collect()
}

/// Every permitted group whose surplus exceeds its members' payoffs.
pub fn check_no_blocking(
    u: &Imputation,
    surplus: &SurplusTable,
    space: &TypeSpace,
    bounds: SizeBounds,
    tol: f64,
    cap: u64,
) -> Result<Vec<(Group, f64)>> {
    check_cap(count_groups(space.len() as u64, bounds), cap)?;
    Ok(iter_groups(space.len(), bounds)
        .filter_map(|g| {
            let excess = surplus.get(&g) - u.group_payoff(&g);
            (excess > tol).then_some((g, excess))
        })
        .collect())
}

/// Solves the welfare LP, then the imputation LP, and checks the pair.
pub fn certify(game: &Game, stab: &StabilityOptions, opts: &SolverOptions) -> Result<Certificate> {
    let primal = max_welfare(game, opts)?;
    let dual = min_imputation(game, DualStrategy::Full, opts)?;
    certify_pair(game, primal.assignment, dual.imputation, primal.value.0, stab, opts.enumeration_cap)
}

/// Checks a given assignment and imputation against each other.
pub fn certify_pair(
    game: &Game,
    assignment: Assignment,
    imputation: Imputation,
    welfare: f64,
    stab: &StabilityOptions,
    cap: u64,
) -> Result<Certificate> {
    let support_violations = check_feasibility(&assignment, &imputation, &game.surplus, stab.tol, stab.support_tol);
    let blocking_violations = check_no_blocking(&imputation, &game.surplus, &game.space, game.bounds, stab.tol, cap)?;
    let dual_value = imputation.value(&game.space);
    let gap = duality_gap(crate::solver::WelfareValue(welfare), dual_value);
    let verdict = verdict(
        support_violations.is_empty(),
        blocking_violations.is_empty(),
        gap,
        welfare,
        stab.tol,
    );
    Ok(Certificate {
        assignment,
        imputation,
        welfare,
        dual_value,
        support_violations,
        blocking_violations,
        gap,
        verdict,
    })
}

/// Payoff functions `w_1..w_n` over types with
/// `sum_k w_k(i_k) >= s([i_1..i_n])` for every ordered tuple, and their
/// average `v_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateSystem {
    pub size: usize,
    pub w: Vec<Vec<f64>>,
    pub v: Imputation,
}

impl ConjugateSystem {
    /// Largest `s(tuple) - sum_k w_k(i_k)` over ordered tuples; at most
    /// tolerance when the system is conjugate-feasible.
    pub fn max_shortfall(&self, surplus: &SurplusTable, type_count: usize) -> f64 {
        let table = TupleSurplus::new(surplus, type_count, self.size);
        let mut worst = f64::NEG_INFINITY;
        for code in 0..table.values.len() {
            let digits = table.digits(code);
            let total: f64 = digits.iter().enumerate().map(|(k, &i)| self.w[k][i]).sum();
            worst = worst.max(table.values[code] - total);
        }
        worst
    }
}

/// Surplus evaluated on every ordered tuple in `I^n`, indexed base `K`
/// with the first coordinate most significant.
struct TupleSurplus {
    type_count: usize,
    size: usize,
    values: Vec<f64>,
}

impl TupleSurplus {
    fn new(surplus: &SurplusTable, type_count: usize, size: usize) -> Self {
        let total = type_count.pow(size as u32);
        let mut values = Vec::with_capacity(total);
        let mut this = Self {
            type_count,
            size,
            values: Vec::new(),
        };
        for code in 0..total {
            values.push(surplus.get(&Group::new(this.digits(code))));
        }
        this.values = values;
        this
    }

    fn digits(&self, mut code: usize) -> Vec<usize> {
        let mut d = vec![0; self.size];
        for slot in d.iter_mut().rev() {
            *slot = code % self.type_count;
            code /= self.type_count;
        }
        d
    }
}

/// Iterated conjugation at group size `n`:
/// `w_m(i) = max over the other coordinates of
///   s(i_1..i_n) - sum_{k<m} w_k(i_k) - sum_{k>m} u(i_k)`
/// for `m = 1..n` in order, exact over the finite type set.
pub fn conjugate_tighten(
    u: &Imputation,
    surplus: &SurplusTable,
    space: &TypeSpace,
    n: usize,
    tol: f64,
    cap: u64,
) -> Result<ConjugateSystem> {
    let k = space.len();
    let bounds = SizeBounds::with_cap(n, n, usize::MAX)?;
    if let Some((group, excess)) = check_no_blocking(u, surplus, space, bounds, tol, cap)?
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        return Err(Error::NotInU { group, excess });
    }
    let tuples = num_bigint::BigUint::from(k).pow(n as u32);
    check_cap(tuples, cap)?;

    let table = TupleSurplus::new(surplus, k, n);
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(n);
    for m in 0..n {
        let mut wm = vec![f64::NEG_INFINITY; k];
        for (code, &s) in table.values.iter().enumerate() {
            let d = table.digits(code);
            let mut val = s;
            for (pos, &i) in d.iter().enumerate() {
                if pos < m {
                    val -= w[pos][i];
                } else if pos > m {
                    val -= u.0[i];
                }
            }
            let slot = &mut wm[d[m]];
            if val > *slot {
                *slot = val;
            }
        }
        w.push(wm);
    }
    let v = (0..k)
        .map(|i| w.iter().map(|wm| wm[i]).sum::<f64>() / n as f64)
        .collect();
    Ok(ConjugateSystem {
        size: n,
        w,
        v: Imputation(v),
    })
}

/// Pointwise maximum of the per-size conjugate averages `v_n`. Stays in the
/// no-blocking set and never exceeds `u`.
pub fn tighten_dual(u: &Imputation, game: &Game, tol: f64, cap: u64) -> Result<Imputation> {
    if let Some((group, excess)) = check_no_blocking(u, &game.surplus, &game.space, game.bounds, tol, cap)?
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        return Err(Error::NotInU { group, excess });
    }
    let mut v = vec![f64::NEG_INFINITY; game.space.len()];
    for n in game.bounds.sizes() {
        let sys = conjugate_tighten(u, &game.surplus, &game.space, n, tol, cap)?;
        for (vi, &x) in v.iter_mut().zip(&sys.v.0) {
            *vi = vi.max(x);
        }
    }
    // tuple sums can land a hair above u; u itself is a valid cap
    for (vi, &ui) in v.iter_mut().zip(&u.0) {
        *vi = vi.min(ui);
    }
    Ok(Imputation(v))
}
