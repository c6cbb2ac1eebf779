//! The welfare problem as a symmetric multi-marginal transport problem.
//!
//! Pick a common size `L` divisible by every permitted group size. An
//! `n`-person group replicated `L/n` times is a size-`L` multiset, and the
//! surplus of a multiset is the best per-capita scaled surplus of any group
//! it replicates. Optimizing over symmetric plans on `I^L` then gives the
//! same value as the assignment LP, and optimal plans and assignments map
//! onto each other.

pub mod change_of_variable;
pub mod fractional;
pub mod plan;

use num_bigint::BigUint;

use crate::model::{count_groups, multiset_coefficient, SizeBounds};

pub use change_of_variable::{change_of_variable_coeff, orbit, ChangeOfVariable, RationalMeasure};
pub use fractional::{
    deflate, enumerate_fractional, fractional_surplus, k_membership, partition_r, r_cells, replicate, unified_size,
    FractionalGroup, LMode,
};
pub use plan::{
    assignment_to_plan, plan_to_assignment, symmetrize_plan, transport_value, SymmetricPlanReduced,
    SymmetrizedPlan, TransportSolution, TuplePlan,
};

/// Problem sizes under one choice of `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeCounts {
    pub mode: LMode,
    pub l: u64,
    /// Size-`L` multisets, `C(|I| + L - 1, L)`.
    pub fractional: BigUint,
    /// `(L + 1) |I|` unknowns of the reduced combinatorial formulation.
    pub reduced_bound: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCounts {
    /// Unknowns of the assignment LP, one per permitted group.
    pub direct: BigUint,
    pub lcm: ModeCounts,
    pub factorial: ModeCounts,
}

impl UnknownCounts {
    pub fn for_mode(&self, mode: LMode) -> &ModeCounts {
        match mode {
            LMode::Lcm => &self.lcm,
            LMode::Factorial => &self.factorial,
        }
    }
}

/// Exact unknown counts for the direct and reformulated problems.
pub fn unknown_counts(type_count: u64, bounds: SizeBounds) -> UnknownCounts {
    let mode_counts = |mode| {
        let l = unified_size(bounds, mode);
        ModeCounts {
            mode,
            l,
            fractional: multiset_coefficient(type_count, l),
            reduced_bound: (BigUint::from(l) + 1u32) * type_count,
        }
    };
    UnknownCounts {
        direct: count_groups(type_count, bounds),
        lcm: mode_counts(LMode::Lcm),
        factorial: mode_counts(LMode::Factorial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_population_counts() {
        let c = unknown_counts(1000, SizeBounds::new(1, 4).unwrap());
        assert_eq!(c.direct, BigUint::from(42_084_793_750u64));
        assert_eq!(c.factorial.l, 24);
        assert_eq!(c.factorial.reduced_bound, BigUint::from(25_000u32));
        assert_eq!(c.lcm.reduced_bound, BigUint::from(13_000u32));
    }

    #[test]
    fn small_counts() {
        let c = unknown_counts(3, SizeBounds::exactly(2).unwrap());
        assert_eq!(c.direct, BigUint::from(6u32));
        assert_eq!(c.lcm.reduced_bound, BigUint::from(9u32));
        assert_eq!(c.lcm.fractional, BigUint::from(6u32));
        let c = unknown_counts(7, SizeBounds::exactly(1).unwrap());
        assert_eq!(c.direct, BigUint::from(7u32));
        assert_eq!(c.factorial.reduced_bound, BigUint::from(14u32));
    }
}
