//! JSON report shapes. Field order is declaration order, and every float
//! is rounded to 12 significant digits so reports diff cleanly. Magnitudes
//! below 1e-12 are solver noise and print as 0.

use coalition_core::continuum::ContinuumAssignment;
use coalition_core::transport::{ModeCounts, UnknownCounts};
use coalition_core::{Assignment, Certificate, Group, Imputation, TypeSpace, Verdict};
use serde::Serialize;

pub fn r12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < 1e-12 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Serialize)]
pub struct GroupMass {
    pub group: Vec<String>,
    pub mass: f64,
}

#[derive(Debug, Serialize)]
pub struct Payoff {
    pub label: String,
    pub payoff: f64,
}

#[derive(Debug, Serialize)]
pub struct Violation {
    pub group: Vec<String>,
    pub amount: f64,
}

fn labels(g: &Group, space: &TypeSpace) -> Vec<String> {
    g.labels(space).into_iter().map(String::from).collect()
}

pub fn assignment(a: &Assignment, space: &TypeSpace) -> Vec<GroupMass> {
    a.iter()
        .map(|(g, w)| GroupMass {
            group: labels(g, space),
            mass: r12(w),
        })
        .filter(|gm| gm.mass != 0.0)
        .collect()
}

pub fn imputation(u: &Imputation, space: &TypeSpace) -> Vec<Payoff> {
    space
        .labels()
        .iter()
        .zip(&u.0)
        .map(|(label, &p)| Payoff {
            label: label.clone(),
            payoff: r12(p),
        })
        .collect()
}

fn violations(list: &[(Group, f64)], space: &TypeSpace) -> Vec<Violation> {
    list.iter()
        .map(|(g, x)| Violation {
            group: labels(g, space),
            amount: r12(*x),
        })
        .collect()
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Stable => "stable",
        Verdict::Unstable => "unstable",
    }
}

/// Output of `solve` and `dual`.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub status: &'static str,
    pub welfare: f64,
    pub assignment: Vec<GroupMass>,
    pub imputation: Vec<Payoff>,
    pub gap: f64,
    pub iterations: u64,
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub verdict: &'static str,
    pub welfare: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub assignment: Vec<GroupMass>,
    pub imputation: Vec<Payoff>,
    pub support_violations: Vec<Violation>,
    pub blocking_violations: Vec<Violation>,
}

impl CertificateReport {
    pub fn new(c: &Certificate, space: &TypeSpace) -> Self {
        Self {
            verdict: verdict_name(c.verdict),
            welfare: r12(c.welfare),
            dual_value: r12(c.dual_value),
            gap: r12(c.gap),
            assignment: assignment(&c.assignment, space),
            imputation: imputation(&c.imputation, space),
            support_violations: violations(&c.support_violations, space),
            blocking_violations: violations(&c.blocking_violations, space),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ModeReport {
    #[serde(rename = "L")]
    pub l: u64,
    pub fractional: String,
    pub reduced_bound: String,
}

impl From<&ModeCounts> for ModeReport {
    fn from(m: &ModeCounts) -> Self {
        Self {
            l: m.l,
            fractional: m.fractional.to_string(),
            reduced_bound: m.reduced_bound.to_string(),
        }
    }
}

/// Big counts are decimal strings, since they overflow any float.
#[derive(Debug, Serialize)]
pub struct CountsReport {
    pub direct: String,
    pub lcm: ModeReport,
    pub factorial: ModeReport,
}

impl From<&UnknownCounts> for CountsReport {
    fn from(c: &UnknownCounts) -> Self {
        Self {
            direct: c.direct.to_string(),
            lcm: (&c.lcm).into(),
            factorial: (&c.factorial).into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CountReport {
    pub types: u64,
    pub min_size: usize,
    pub max_size: usize,
    #[serde(flatten)]
    pub counts: CountsReport,
}

#[derive(Debug, Serialize)]
pub struct ReformulationReport {
    #[serde(rename = "L")]
    pub l: u64,
    pub mode: &'static str,
    pub fractional_count: usize,
    pub unknown_counts: CountsReport,
    pub value: f64,
    pub value_direct: f64,
    pub max_abs_diff: f64,
}

#[derive(Debug, Serialize)]
pub struct MeasureMass {
    pub group: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Serialize)]
pub struct IndexedViolation {
    pub index: usize,
    pub amount: f64,
}

#[derive(Debug, Serialize)]
pub struct ContinuumReport {
    pub catalog_resolution: usize,
    pub catalog_size: usize,
    pub verdict: &'static str,
    pub welfare: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub assignment: Vec<MeasureMass>,
    pub imputation: Vec<Payoff>,
    pub support_violations: Vec<IndexedViolation>,
    pub blocking_violations: Vec<IndexedViolation>,
}

impl ContinuumReport {
    pub fn new(
        c: &Certificate<ContinuumAssignment, usize>,
        space: &TypeSpace,
        resolution: usize,
        catalog_size: usize,
    ) -> Self {
        let indexed = |list: &[(usize, f64)]| {
            list.iter()
                .map(|&(index, x)| IndexedViolation { index, amount: r12(x) })
                .collect()
        };
        Self {
            catalog_resolution: resolution,
            catalog_size,
            verdict: verdict_name(c.verdict),
            welfare: r12(c.welfare),
            dual_value: r12(c.dual_value),
            gap: r12(c.gap),
            assignment: c
                .assignment
                .weights
                .iter()
                .map(|(nu, w)| MeasureMass {
                    group: nu.0.iter().map(|&x| r12(x)).collect(),
                    mass: r12(*w),
                })
                .collect(),
            imputation: imputation(&c.imputation, space),
            support_violations: indexed(&c.support_violations),
            blocking_violations: indexed(&c.blocking_violations),
        }
    }
}
