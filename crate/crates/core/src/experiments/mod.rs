//! Reproducible experiments: the high/low-stakes environment family where
//! cardinal rules beat every ordinal rule, the explicit cardinal rule `f*`,
//! seeded property campaigns, and a two-agent fixture whose ordinal
//! projection is not anonymous.

mod campaigns;
mod example1;
mod random;
mod suites;

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use campaigns::{
    verify_lemma3, verify_proposition1, verify_theorem1, Lemma3Campaign, Lemma3Case, Proposition1Campaign,
    Proposition1Case, Theorem1Campaign, Theorem1Trial,
};
pub use example1::{example1_fixture, Example1};
pub use random::{random_environment, random_symmetric_environment, random_value_set, RandomEnvConfig};
pub use suites::{run_suite, Check, SuiteName, SuiteOptions, SuiteReport};

use crate::env::{AgentDistribution, EnvError, Environment, ValueSet};
use crate::mechanism::{qmr_best, welfare, wmr_build, AnonymousScf, MechanismError, MultisetIndex, QmrTable};
use crate::opt::{solve_opt, OptError};
use crate::rational::{rat, Rational};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("the family needs n >= 3 agents, got {0}")]
    TooFewAgents(usize),
    #[error("unanimity condition fails: (2/n)[-M^2+M+n-2] + ((n-2)/n)[2M+n-4] = {0} is not negative")]
    UnanimityCondition(Rational),
    #[error("improvement condition fails: 2M - (n-2) = {0} is not positive")]
    ImprovementCondition(Rational),
    #[error("epsilon must lie in [0, 1/2), got {0}")]
    EpsilonOutOfRange(Rational),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

/// Left-hand sides of the two conditions on `(n, M)`: the first must be
/// negative (unanimity beats every other threshold at the limit), the second
/// positive (`f*` improves on unanimity).
pub fn family_conditions(n: usize, m: &Rational) -> (Rational, Rational) {
    let nr = Rational::from_integer(n.into());
    let two = rat(2, 1);
    let n_minus_2 = &nr - &two;
    let first = &two / &nr * (-(m * m) + m + &n_minus_2) + &n_minus_2 / &nr * (&two * m + &nr - rat(4, 1));
    let second = &two * m - &n_minus_2;
    (first, second)
}

/// Two high-stakes agents on `{-M^2, M}`, `n-2` low-stakes agents on
/// `{-1, 1}`, each leaking probability `eps` to the other pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Family {
    pub n: usize,
    pub m: Rational,
    pub eps: Rational,
}

impl Theorem2Family {
    pub fn new(n: usize, m: Rational, eps: Rational) -> Result<Self, ExperimentError> {
        if n < 3 {
            return Err(ExperimentError::TooFewAgents(n));
        }
        let (first, second) = family_conditions(n, &m);
        if !first.is_negative() {
            return Err(ExperimentError::UnanimityCondition(first));
        }
        if !second.is_positive() {
            return Err(ExperimentError::ImprovementCondition(second));
        }
        if eps.is_negative() || eps >= rat(1, 2) {
            return Err(ExperimentError::EpsilonOutOfRange(eps));
        }
        Ok(Self { n, m, eps })
    }

    /// `{-M^2, -1, 1, M}` in ascending order.
    pub fn value_set(&self) -> Result<ValueSet, EnvError> {
        ValueSet::new(vec![-(&self.m * &self.m), rat(-1, 1), rat(1, 1), self.m.clone()])
    }

    pub fn environment(&self) -> Result<Environment, ExperimentError> {
        let big = &rat(1, 2) - &self.eps;
        let eps = self.eps.clone();
        let high = vec![big.clone(), eps.clone(), eps.clone(), big.clone()];
        let low = vec![eps.clone(), big.clone(), big, eps];
        let agents = (0..self.n)
            .map(|i| {
                if i < 2 {
                    AgentDistribution::named("high", high.clone())
                } else {
                    AgentDistribution::named("low", low.clone())
                }
            })
            .collect();
        Ok(Environment::new(self.value_set()?, agents)?)
    }
}

pub fn make_theorem2_env(n: usize, m: Rational, eps: Rational) -> Result<Environment, ExperimentError> {
    Theorem2Family::new(n, m, eps)?.environment()
}

/// Unanimity, except Reform also at `{M,M,-1,...,-1}`, `{-M^2,1,...,1}` and
/// `{-M^2,-M^2,-M^2,1,...,1}`.
pub fn make_fstar(n: usize, m: &Rational) -> Result<AnonymousScf, ExperimentError> {
    if n < 3 {
        return Err(ExperimentError::TooFewAgents(n));
    }
    // Support indices: 0 = -M^2, 1 = -1, 2 = 1, 3 = M.
    ValueSet::new(vec![-(m * m), rat(-1, 1), rat(1, 1), m.clone()])?;
    let index = Arc::new(MultisetIndex::new(n, 4));
    let f = AnonymousScf::from_fn(index, |ms| {
        let count = |v| ms.count(v);
        let all_positive = count(0) + count(1) == 0;
        let pair_of_high = count(3) == 2 && count(1) == n - 2;
        let lone_big_loss = count(0) == 1 && count(2) == n - 1;
        let triple_big_loss = count(0) == 3 && count(2) == n - 3;
        if all_positive || pair_of_high || lone_big_loss || triple_big_loss {
            Rational::one()
        } else {
            Rational::zero()
        }
    })?;
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct Theorem2Demo {
    pub family: Theorem2Family,
    pub qmr: QmrTable,
    pub opt_welfare: Rational,
    /// Welfare of `f*`; only reported at `eps = 0`, where it is BIC.
    pub fstar_welfare: Option<Rational>,
    pub wmr_welfare: Rational,
    pub wmr_flagged: bool,
}

impl Theorem2Demo {
    pub fn best_qmr_welfare(&self) -> &Rational {
        self.qmr.best_welfare()
    }

    /// The optimal anonymous rule strictly beats every ordinal anonymous rule.
    pub fn strict_gap(&self) -> bool {
        &self.opt_welfare > self.best_qmr_welfare()
    }

    pub fn ratio(&self) -> Option<Rational> {
        let base = self.best_qmr_welfare();
        (!base.is_zero()).then(|| &self.opt_welfare / base)
    }
}

pub fn run_theorem2_demo(n: usize, m: Rational, eps: Rational) -> Result<Theorem2Demo, ExperimentError> {
    let family = Theorem2Family::new(n, m, eps)?;
    let env = family.environment()?;
    let qmr = qmr_best(&env);
    let opt = solve_opt(&env)?;
    let fstar_welfare = if family.eps.is_zero() {
        Some(welfare(&env, &make_fstar(n, &family.m)?))
    } else {
        None
    };
    let wmr = wmr_build(&env, rat(1, 2))?;
    Ok(Theorem2Demo {
        family,
        qmr,
        opt_welfare: opt.welfare,
        fstar_welfare,
        wmr_welfare: welfare(&env, &wmr.rule),
        wmr_flagged: wmr.is_flagged(),
    })
}

/// Best qualified majority rule, the anonymous optimum and the utilitarian
/// weighted majority rule on one environment.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub qmr: QmrTable,
    pub opt_welfare: Rational,
    pub wmr: crate::mechanism::WmrBuild,
    pub wmr_welfare: Rational,
    /// `None` when the WMR welfare is zero.
    pub qmr_over_wmr: Option<Rational>,
    pub opt_over_wmr: Option<Rational>,
}

impl Comparison {
    /// Ratios against a WMR built from undefined conditional means are suspect.
    pub fn ratios_flagged(&self) -> bool {
        self.wmr.is_flagged()
    }
}

pub fn compare(env: &Environment, tie_value: Rational) -> Result<Comparison, ExperimentError> {
    let qmr = qmr_best(env);
    let opt_welfare = solve_opt(env)?.welfare;
    let wmr = wmr_build(env, tie_value)?;
    let wmr_welfare = welfare(env, &wmr.rule);
    let over = |w: &Rational| (!wmr_welfare.is_zero()).then(|| w / &wmr_welfare);
    Ok(Comparison {
        qmr_over_wmr: over(qmr.best_welfare()),
        opt_over_wmr: over(&opt_welfare),
        qmr,
        opt_welfare,
        wmr,
        wmr_welfare,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub m: Rational,
    pub best_qmr: Rational,
    pub opt: Rational,
    pub ratio: Rational,
    /// `4M / (2M + 1)`, the limit ratio for three agents.
    pub closed_form: Option<Rational>,
}

/// Ratio of the optimal anonymous welfare to the best qualified majority
/// welfare at `eps = 0`, for each `M`.
pub fn cardinal_ordinal_ratio_sweep(n: usize, ms: &[Rational]) -> Result<Vec<RatioRow>, ExperimentError> {
    ms.iter()
        .map(|m| {
            let env = make_theorem2_env(n, m.clone(), Rational::zero())?;
            let best_qmr = qmr_best(&env).best_welfare().clone();
            let opt = solve_opt(&env)?.welfare;
            let closed_form = (n == 3).then(|| rat(4, 1) * m / (rat(2, 1) * m + rat(1, 1)));
            Ok(RatioRow {
                m: m.clone(),
                ratio: &opt / &best_qmr,
                best_qmr,
                opt,
                closed_form,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{check_bic, QualifiedMajorityRule};

    #[test]
    fn family_conditions_at_known_points() {
        let (first, second) = family_conditions(3, &rat(10, 1));
        assert_eq!(first, rat(-53, 1));
        assert_eq!(second, rat(19, 1));
        // n = 4, M = 10: (1/2)(-88) + (1/2)(20) = -34, and 20 - 2 = 18.
        assert_eq!(family_conditions(4, &rat(10, 1)), (rat(-34, 1), rat(18, 1)));
    }

    #[test]
    fn family_rejects_bad_parameters() {
        assert!(matches!(
            Theorem2Family::new(3, rat(1, 2), Rational::zero()),
            Err(ExperimentError::ImprovementCondition(_)) | Err(ExperimentError::UnanimityCondition(_))
        ));
        assert!(matches!(
            Theorem2Family::new(3, rat(1, 2), Rational::zero()).unwrap_err(),
            ExperimentError::UnanimityCondition(_)
        ));
        assert!(matches!(
            Theorem2Family::new(3, rat(10, 1), rat(1, 2)),
            Err(ExperimentError::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            Theorem2Family::new(2, rat(10, 1), Rational::zero()),
            Err(ExperimentError::TooFewAgents(2))
        ));
    }

    #[test]
    fn improvement_condition_alone() {
        // For n = 3 and M = 1/2 the improvement margin is exactly zero.
        assert_eq!(family_conditions(3, &rat(1, 2)).1, Rational::zero());
    }

    #[test]
    fn near_limit_configuration_probabilities() {
        let env = make_theorem2_env(3, rat(10, 1), rat(1, 1000)).unwrap();
        assert_eq!(
            env.agent(0).probs(),
            &[rat(499, 1000), rat(1, 1000), rat(1, 1000), rat(499, 1000)]
        );
        assert_eq!(
            env.agent(2).probs(),
            &[rat(1, 1000), rat(499, 1000), rat(499, 1000), rat(1, 1000)]
        );
    }

    #[test]
    fn fstar_support_for_three_agents() {
        let f = make_fstar(3, &rat(10, 1)).unwrap();
        let ones: Vec<Vec<usize>> = f
            .entries()
            .filter(|(_, a)| a.is_one())
            .map(|(m, _)| m.as_slice().to_vec())
            .collect();
        assert_eq!(
            ones,
            vec![
                vec![0, 0, 0],
                vec![0, 2, 2],
                vec![1, 3, 3],
                vec![2, 2, 2],
                vec![2, 2, 3],
                vec![2, 3, 3],
                vec![3, 3, 3],
            ]
        );
    }

    #[test]
    fn fstar_is_bic_at_the_limit_and_improves_on_unanimity() {
        for (n, m) in [(3, rat(10, 1)), (4, rat(10, 1)), (5, rat(7, 1))] {
            let env = make_theorem2_env(n, m.clone(), Rational::zero()).unwrap();
            let f = make_fstar(n, &m).unwrap();
            assert!(check_bic(&env, &f).is_bic(), "n = {n}");
            let gap = welfare(&env, &f) - welfare(&env, &QualifiedMajorityRule::new(n));
            let half_pow = Rational::new(1.into(), num_bigint::BigInt::from(2u8).pow(n as u32));
            let margin = rat(2, 1) * &m - Rational::from_integer((n - 2).into());
            assert_eq!(gap, half_pow * margin, "n = {n}");
        }
    }
}
