//! Welfare-maximizing assignments, minimal imputations and stability
//! certificates for transferable-utility games in which players of finitely
//! many types form groups of bounded size.
//!
//! The two central linear programs are [`max_welfare`] (choose a mass of
//! each group so that every type is used exactly once) and
//! [`min_imputation`] (the cheapest per-type payoff that no group can
//! block). [`certify`] solves both and checks the pair. The [`transport`]
//! module rewrites the welfare problem as a symmetric multi-marginal
//! transport problem over replicated groups, and [`continuum`] handles a
//! discretized game whose groups are sub-measures of the population.

pub mod continuum;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod model;
pub mod solver;
pub mod stability;
pub mod surplus;
pub mod transport;

pub use error::{Error, Result};
pub use game::{Game, GameDocument, SurplusEntry, TypeEntry};
pub use model::{
    binomial, count_groups, enumerate_groups, is_consistent, iter_groups, multiset_coefficient, Assignment, Group,
    SizeBounds, TypeSpace, DEFAULT_ENUMERATION_CAP, DEFAULT_MAX_SIZE_CAP,
};
pub use solver::{
    max_welfare, min_imputation, DualSolution, DualStrategy, Imputation, SolverOptions, WelfareSolution, WelfareValue,
};
pub use stability::{certify, Certificate, StabilityOptions, Verdict};
pub use surplus::{build_envy_surplus, EnvyAgent, EnvyEconomySpec, SurplusTable};
pub use transport::{transport_value, unified_size, unknown_counts, FractionalGroup, LMode, SymmetricPlanReduced};
