//! Social choice functions and their exact evaluation: interim allocations,
//! Bayesian incentive compatibility, welfare, the ordinal projection and the
//! qualified/weighted majority benchmarks.

mod analysis;
mod rules;

use thiserror::Error;

pub use analysis::{
    check_bic, evaluate, interim_allocation, interim_profile, ordinal_projection, qmr_best, symmetric_threshold,
    welfare, welfare_via_interims, wmr_build, BicCheck, BicViolation, InterimProfile, OrdinalProjection, QmrTable,
    SymmetricThreshold, ViolationKind, WmrBuild, MAX_PROJECTION_AGENTS,
};
pub use rules::{
    AnonymousScf, AnyMechanism, CoalitionRule, Mechanism, MultisetIndex, OrderedTable, QualifiedMajorityRule,
    ReportMultiset, WeightedMajorityRule,
};

use crate::env::{EnvError, ValueSet};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanismError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("allocation {0} is outside [0, 1]")]
    OutOfRange(Rational),
    #[error("malformed mechanism: {0}")]
    Shape(String),
    #[error("mechanism does not fit the environment: {0}")]
    Incompatible(String),
    #[error("mechanism is not BIC: {0}")]
    NotBic(Box<BicViolation>),
    #[error("coalition {coalition:?} has probability zero, the ordinal projection is undefined")]
    ZeroProbabilityCoalition { coalition: Vec<usize> },
    #[error("ordinal projection enumerates 2^n coalitions; n = {0} exceeds the limit")]
    TooManyAgents(usize),
    #[error("environment is not symmetric")]
    NotSymmetric,
    #[error("agent {agent}: conditional mean undefined (probability of a positive value is 0 or 1)")]
    UndefinedStats { agent: usize },
}

/// Agents (0-based) reporting a strictly positive value.
pub fn coalition(profile: &[Rational]) -> Vec<usize> {
    profile
        .iter()
        .enumerate()
        .filter(|(_, v)| num_traits::Signed::is_positive(*v))
        .map(|(i, _)| i)
        .collect()
}

/// Bitmask form of the coalition for a profile of support indices.
pub fn coalition_mask(values: &ValueSet, profile: &[usize]) -> usize {
    profile
        .iter()
        .enumerate()
        .filter(|(_, &v)| values.is_positive(v))
        .fold(0, |mask, (i, _)| mask | (1 << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn coalition_reads_signs() {
        assert_eq!(coalition(&[rat(-2, 1), rat(1, 1)]), vec![1]);
        assert_eq!(coalition(&[rat(10, 1), rat(10, 1), rat(-1, 1)]), vec![0, 1]);
        assert!(coalition(&[rat(-1, 1), rat(-100, 1)]).is_empty());
    }
}
