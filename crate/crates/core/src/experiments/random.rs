use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::{AgentDistribution, Environment, ValueSet};
use crate::rational::Rational;

/// Shape of randomly drawn environments.
#[derive(Debug, Clone)]
pub struct RandomEnvConfig {
    pub min_values: usize,
    pub max_values: usize,
    /// Values are drawn from `[-value_bound, value_bound] \ {0}`.
    pub value_bound: i64,
    /// Largest denominator of the raw probability weights.
    pub max_denominator: i64,
}

impl Default for RandomEnvConfig {
    fn default() -> Self {
        Self {
            min_values: 2,
            max_values: 6,
            value_bound: 20,
            max_denominator: 64,
        }
    }
}

/// Distinct nonzero integers with at least one of each sign.
pub fn random_value_set<R: Rng>(rng: &mut R, size: usize, bound: i64) -> ValueSet {
    assert!(size >= 2 && size as i64 <= 2 * bound, "cannot draw {size} values");
    let pool: Vec<i64> = (-bound..=bound).filter(|&v| v != 0).collect();
    loop {
        let picked: Vec<i64> = pool.choose_multiple(rng, size).copied().collect();
        if picked.iter().any(|&v| v < 0) && picked.iter().any(|&v| v > 0) {
            let values = picked.into_iter().map(|v| Rational::from_integer(v.into())).collect();
            return ValueSet::new(values).expect("distinct nonzero values");
        }
    }
}

/// Strictly positive weights `k/D`, renormalized to sum to one.
fn random_probs<R: Rng>(rng: &mut R, len: usize, max_den: i64) -> Vec<Rational> {
    let raw: Vec<Rational> = (0..len)
        .map(|_| {
            let d = rng.gen_range(1..=max_den);
            let k = rng.gen_range(1..=d);
            Rational::new(BigInt::from(k), BigInt::from(d))
        })
        .collect();
    let total: Rational = raw.iter().sum();
    raw.into_iter().map(|r| r / &total).collect()
}

/// `n` independently drawn agents over one random value set.
pub fn random_environment<R: Rng>(rng: &mut R, n: usize, config: &RandomEnvConfig) -> Environment {
    let size = rng.gen_range(config.min_values..=config.max_values);
    let values = random_value_set(rng, size, config.value_bound);
    let agents = (0..n)
        .map(|_| AgentDistribution::new(random_probs(rng, size, config.max_denominator)))
        .collect();
    let env = Environment::new(values, agents).expect("generated environment is valid");
    debug_assert!(env.agents().iter().all(|a| a.probs().iter().all(|p| p.is_positive())));
    env
}

/// `n` identically distributed agents.
pub fn random_symmetric_environment<R: Rng>(rng: &mut R, n: usize, config: &RandomEnvConfig) -> Environment {
    let size = rng.gen_range(config.min_values..=config.max_values);
    let values = random_value_set(rng, size, config.value_bound);
    let probs = random_probs(rng, size, config.max_denominator);
    debug_assert!(!probs.iter().any(Zero::is_zero));
    Environment::symmetric(values, AgentDistribution::new(probs), n).expect("generated environment is valid")
}
