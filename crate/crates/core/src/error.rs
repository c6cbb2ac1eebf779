use num_bigint::BigUint;
use thiserror::Error;

use crate::model::Group;

#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration needs {count} items, above the cap of {cap}")]
    CapExceeded { count: BigUint, cap: u64 },

    #[error("type index {index} is outside a space of {len} types")]
    UnknownType { index: usize, len: usize },

    #[error("invalid type space: {0}")]
    InvalidSpace(String),

    #[error("invalid size bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("pivot budget of {0} exhausted")]
    IterLimit(u64),

    #[error("cutting plane did not converge within {0} rounds")]
    NonConvergence(usize),

    #[error("imputation is blocked by group {group} with excess {excess}")]
    NotInU { group: Group, excess: f64 },

    #[error("plan puts mass {mass} on fractional groups outside every K_n")]
    SupportOnR0 { mass: f64 },

    #[error("tuple plan marginal {coordinate} deviates from the target by {deviation}")]
    BadMarginals { coordinate: usize, deviation: f64 },

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
