//! Dense revised simplex with Bland's rule.
//!
//! Problems are stated over nonnegative variables with equality rows and
//! optional upper bounds. Upper bounds become extra rows with slack
//! columns. Phase I drives a full set of artificial columns to zero, then
//! phase II optimizes the real objective with the artificials barred from
//! entering. Row multipliers are read from the final basis.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `opt c.x` subject to `A x = b`, `0 <= x <= ub`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    upper: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(sense: Sense, num_vars: usize) -> Self {
        Self {
            sense,
            objective: vec![0.0; num_vars],
            columns: vec![Vec::new(); num_vars],
            rhs: Vec::new(),
            upper: vec![None; num_vars],
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn upper_bound(&self, j: usize) -> Option<f64> {
        self.upper[j]
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn add_variable(&mut self, c: f64) -> usize {
        self.objective.push(c);
        self.columns.push(Vec::new());
        self.upper.push(None);
        self.objective.len() - 1
    }

    /// Adds the row `sum coeffs = rhs` and returns its index. Repeated
    /// variable indices are summed.
    pub fn add_equality(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> usize {
        let row = self.rhs.len();
        for &(j, a) in coeffs {
            assert!(j < self.num_vars(), "variable {j} out of range");
            if a == 0.0 {
                continue;
            }
            match self.columns[j].last_mut() {
                Some((r, v)) if *r == row => *v += a,
                _ => self.columns[j].push((row, a)),
            }
        }
        self.rhs.push(rhs);
        row
    }

    pub fn set_upper_bound(&mut self, j: usize, ub: f64) {
        self.upper[j] = Some(ub);
    }

    /// `A x` for the equality rows.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_rows()];
        for (j, col) in self.columns.iter().enumerate() {
            for &(r, a) in col {
                out[r] += a * x[j];
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.rhs.iter().all(|v| v.is_finite())
            && self
                .columns
                .iter()
                .all(|c| c.iter().all(|(_, a)| a.is_finite()))
            && self
                .upper
                .iter()
                .all(|u| u.is_none_or(|u| u.is_finite() && u >= 0.0));
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidSpec(
                "linear program has non-finite entries or a negative upper bound".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub primal: Vec<f64>,
    /// One multiplier per equality row, signed so that `b.y` equals the
    /// objective at optimality.
    pub dual: Vec<f64>,
    /// Multipliers of the upper-bound rows, 0 for unbounded variables.
    pub bound_dual: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

impl SolveReport {
    /// Maps a non-optimal status to the matching error.
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            Status::Optimal => Ok(self),
            Status::Infeasible => Err(Error::Infeasible),
            Status::Unbounded => Err(Error::Unbounded),
            Status::IterLimit => Err(Error::IterLimit(self.iterations)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_pivots: u64,
    pub refactor_every: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            max_pivots: 1_000_000,
            refactor_every: 64,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<SolveReport> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<SolveReport> {
    lp.validate()?;
    let mut state = Tableau::new(lp, opts);
    Ok(state.run())
}

const PIVOT_TOL: f64 = 1e-9;

struct Tableau<'a> {
    lp: &'a LinearProgram,
    opts: &'a SimplexOptions,
    m: usize,
    /// structural columns: originals followed by upper-bound slacks
    cols: Vec<Vec<(usize, f64)>>,
    n: usize,
    b: Vec<f64>,
    flipped: Vec<bool>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: u64,
    since_refactor: u64,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterLimit,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram, opts: &'a SimplexOptions) -> Self {
        let n0 = lp.num_vars();
        let m0 = lp.num_rows();
        let mut cols = lp.columns.clone();
        let mut b = lp.rhs.clone();
        let mut row = m0;
        for j in 0..n0 {
            if let Some(ub) = lp.upper[j] {
                cols[j].push((row, 1.0));
                cols.push(vec![(row, 1.0)]);
                b.push(ub);
                row += 1;
            }
        }
        let m = row;
        let n = cols.len();
        let mut flipped = vec![false; m];
        for r in 0..m {
            if b[r] < 0.0 {
                flipped[r] = true;
                b[r] = -b[r];
            }
        }
        for col in &mut cols {
            for (r, a) in col.iter_mut() {
                if flipped[*r] {
                    *a = -*a;
                }
            }
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut is_basic = vec![false; n + m];
        for r in 0..m {
            is_basic[n + r] = true;
        }
        Self {
            lp,
            opts,
            m,
            xb: b.clone(),
            cols,
            n,
            b,
            flipped,
            basis: (n..n + m).collect(),
            is_basic,
            binv,
            pivots: 0,
            since_refactor: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n
    }

    /// `Binv * A_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut d = vec![0.0; m];
        if self.is_artificial(j) {
            let k = j - self.n;
            for r in 0..m {
                d[r] = self.binv[r * m + k];
            }
        } else {
            for &(k, a) in &self.cols[j] {
                for r in 0..m {
                    d[r] += self.binv[r * m + k] * a;
                }
            }
        }
        d
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if self.is_artificial(j) {
            y[j - self.n]
        } else {
            self.cols[j].iter().map(|&(r, a)| y[r] * a).sum()
        }
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let c = cost(self.basis[r]);
            if c != 0.0 {
                for k in 0..m {
                    y[k] += c * self.binv[r * m + k];
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, j: usize, d: &[f64]) {
        let m = self.m;
        let piv = d[r];
        let theta = self.xb[r] / piv;
        for k in 0..m {
            if k != r {
                self.xb[k] -= theta * d[k];
                if self.xb[k].abs() < 1e-13 {
                    self.xb[k] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for v in pivot_row.iter_mut() {
            *v /= piv;
        }
        for (k, row) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let k = if k < r { k } else { k + 1 };
            let f = d[k];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_every {
            self.refactor();
        }
    }

    /// Recomputes `Binv` and the basic values from scratch.
    fn refactor(&mut self) {
        self.since_refactor = 0;
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            if self.is_artificial(j) {
                a[(j - self.n) * m + r] = 1.0;
            } else {
                for &(k, v) in &self.cols[j] {
                    a[k * m + r] = v;
                }
            }
        }
        let Some(inv) = invert(a, m) else {
            return;
        };
        self.binv = inv;
        for r in 0..m {
            let v: f64 = (0..m).map(|k| self.binv[r * m + k] * self.b[k]).sum();
            self.xb[r] = if v.abs() < 1e-13 { 0.0 } else { v };
        }
    }

    fn iterate(&mut self, cost: &dyn Fn(usize) -> f64, allow_artificial: bool) -> Outcome {
        let total = self.n + self.m;
        loop {
            if self.pivots >= self.opts.max_pivots {
                return Outcome::IterLimit;
            }
            let y = self.duals(cost);
            // Bland: lowest-index improving column
            let entering = (0..total).find(|&j| {
                !self.is_basic[j]
                    && (allow_artificial || !self.is_artificial(j))
                    && cost(j) - self.column_dot(j, &y) < -self.opts.optimality_tol
            });
            let Some(j) = entering else {
                return Outcome::Optimal;
            };
            let d = self.ftran(j);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if d[r] > PIVOT_TOL {
                    let ratio = self.xb[r].max(0.0) / d[r];
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * best.max(1.0);
                            if ratio < best && !tie
                                || tie && self.basis[r] < self.basis[br]
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Outcome::Unbounded;
            };
            self.pivot(r, j, &d);
        }
    }

    /// Pivots zero-valued artificials out of the basis where possible.
    fn expel_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let candidate = (0..self.n).find(|&j| {
                !self.is_basic[j]
                    && self.cols[j]
                        .iter()
                        .map(|&(k, a)| self.binv[r * m + k] * a)
                        .sum::<f64>()
                        .abs()
                        > 1e-7
            });
            if let Some(j) = candidate {
                self.xb[r] = 0.0;
                let d = self.ftran(j);
                self.pivot(r, j, &d);
            }
        }
    }

    fn run(&mut self) -> SolveReport {
        let n = self.n;
        let phase1 = move |j: usize| if j >= n { 1.0 } else { 0.0 };
        let outcome = self.iterate(&phase1, true);
        if let Outcome::IterLimit = outcome {
            return self.report(Status::IterLimit);
        }
        self.refactor();
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| self.is_artificial(j))
            .map(|(_, &x)| x)
            .sum();
        let bnorm: f64 = self.b.iter().map(|v| v.abs()).sum();
        if infeasibility > self.opts.feasibility_tol * (1.0 + bnorm) {
            return self.report(Status::Infeasible);
        }
        self.expel_artificials();

        let sign = match self.lp.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let n0 = self.lp.num_vars();
        let objective = &self.lp.objective;
        let phase2 = move |j: usize| if j < n0 { sign * objective[j] } else { 0.0 };
        match self.iterate(&phase2, false) {
            Outcome::Optimal => {
                self.refactor();
                self.report(Status::Optimal)
            }
            Outcome::Unbounded => self.report(Status::Unbounded),
            Outcome::IterLimit => self.report(Status::IterLimit),
        }
    }

    fn report(&self, status: Status) -> SolveReport {
        let n0 = self.lp.num_vars();
        let m0 = self.lp.num_rows();
        let mut x = vec![0.0; self.n + self.m];
        for (r, &j) in self.basis.iter().enumerate() {
            x[j] = self.xb[r].max(0.0);
        }
        let primal = x[..n0].to_vec();
        let objective = primal
            .iter()
            .zip(&self.lp.objective)
            .map(|(x, c)| x * c)
            .sum();

        let sign = match self.lp.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let lp_obj = &self.lp.objective;
        let y = self.duals(&|j: usize| if j < n0 { sign * lp_obj[j] } else { 0.0 });
        let unflip = |r: usize| {
            let v = if self.flipped[r] { -y[r] } else { y[r] };
            sign * v
        };
        let dual = (0..m0).map(unflip).collect();
        let mut bound_dual = vec![0.0; n0];
        let mut row = m0;
        for (j, ub) in self.lp.upper.iter().enumerate() {
            if ub.is_some() {
                bound_dual[j] = unflip(row);
                row += 1;
            }
        }
        SolveReport {
            status,
            primal,
            dual,
            bound_dual,
            objective,
            iterations: self.pivots,
        }
    }
}

/// Gauss-Jordan inverse of a row-major `m x m` matrix with partial pivoting.
fn invert(mut a: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for r in 0..m {
        inv[r * m + r] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&i, &k| a[i * m + c].abs().total_cmp(&a[k * m + c].abs()))?;
        if a[p * m + c].abs() < 1e-14 {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let piv = a[c * m + c];
        for k in 0..m {
            a[c * m + k] /= piv;
            inv[c * m + k] /= piv;
        }
        for r in 0..m {
            if r != c {
                let f = a[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Residuals of an optimality certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateResiduals {
    /// `max |A x - b|` over equality rows, upper-bound excess included.
    pub primal: f64,
    /// Largest reduced-cost sign violation.
    pub dual: f64,
    /// `max |x_j * reduced_cost_j|`.
    pub complementarity: f64,
    /// `|c.x - b.y - ub.w|`.
    pub gap: f64,
}

/// Checks primal feasibility, dual sign conditions and complementary
/// slackness of a report against its program.
pub fn certificate_residuals(lp: &LinearProgram, report: &SolveReport) -> CertificateResiduals {
    let x = &report.primal;
    let act = lp.row_activity(x);
    let mut primal = act
        .iter()
        .zip(&lp.rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    for (j, ub) in lp.upper.iter().enumerate() {
        primal = primal.max(-x[j]);
        if let Some(ub) = ub {
            primal = primal.max(x[j] - ub);
        }
    }
    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut dual = 0.0f64;
    let mut complementarity = 0.0f64;
    for j in 0..lp.num_vars() {
        let ya: f64 = lp.columns[j].iter().map(|&(r, a)| report.dual[r] * a).sum();
        // for max: c_j - y.A_j - w_j <= 0 ; for min: >= 0
        let reduced = lp.objective[j] - ya - report.bound_dual[j];
        dual = dual.max(sign * reduced);
        let at_upper = lp.upper[j].is_some_and(|u| (x[j] - u).abs() < 1e-9);
        if !at_upper {
            complementarity = complementarity.max((x[j] * reduced).abs());
        }
        // bound multipliers only live on variables at their upper bound
        if lp.upper[j].is_some() && !at_upper {
            complementarity = complementarity.max(report.bound_dual[j].abs());
        }
    }
    let dual_obj: f64 = report.dual.iter().zip(&lp.rhs).map(|(y, b)| y * b).sum::<f64>()
        + report
            .bound_dual
            .iter()
            .zip(&lp.upper)
            .map(|(w, u)| w * u.unwrap_or(0.0))
            .sum::<f64>();
    CertificateResiduals {
        primal,
        dual,
        complementarity,
        gap: (report.objective - dual_obj).abs(),
    }
}
