//! Seeded randomized campaigns. Environments are drawn sequentially from one
//! `ChaCha8Rng` stream, so a seed fixes every instance; solving then fans out
//! over rayon and results come back in trial order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::random::{random_environment, random_symmetric_environment, RandomEnvConfig};
use crate::env::Environment;
use crate::mechanism::{
    qmr_best, symmetric_threshold, welfare, welfare_via_interims, AnonymousScf, QualifiedMajorityRule,
};
use crate::opt::{aux_corners, build_opt_lp, lemma3_bounds, qmr_aux_points, solve_opt, Lemma3Report, OptError};
use crate::rational::Rational;

/// One random two-agent environment checked against the two-rule optimum.
#[derive(Debug, Clone)]
pub struct Theorem1Trial {
    pub index: usize,
    pub env: Environment,
    pub opt_welfare: Option<Rational>,
    pub opt_mechanism: Option<AnonymousScf>,
    /// `W(f^(1))` and `W(f^(2))`.
    pub qmr_welfare: (Rational, Rational),
    pub aux_best: Option<Rational>,
    /// The relaxation corners coincide with the interims of `f^(1)`, `f^(2)`.
    pub aux_points_match: bool,
    /// Influence bounds on the optimal rule.
    pub lemma3: Option<Lemma3Report>,
    pub error: Option<String>,
}

impl Theorem1Trial {
    pub fn best_qmr(&self) -> &Rational {
        let (w1, w2) = &self.qmr_welfare;
        if w1 >= w2 {
            w1
        } else {
            w2
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.opt_welfare.as_ref() == Some(self.best_qmr())
            && self.aux_best.as_ref() == Some(self.best_qmr())
            && self.aux_points_match
            && self.lemma3.as_ref().is_some_and(Lemma3Report::both_hold)
    }
}

#[derive(Debug, Clone)]
pub struct Theorem1Campaign {
    pub seed: u64,
    pub trials: Vec<Theorem1Trial>,
}

impl Theorem1Campaign {
    pub fn passed(&self) -> bool {
        self.trials.iter().all(Theorem1Trial::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Theorem1Trial> {
        self.trials.iter().filter(|t| !t.passed())
    }
}

fn theorem1_trial(index: usize, env: Environment) -> Theorem1Trial {
    let qmr_welfare = (
        welfare(&env, &QualifiedMajorityRule::new(1)),
        welfare(&env, &QualifiedMajorityRule::new(2)),
    );
    let mut trial = Theorem1Trial {
        index,
        env,
        opt_welfare: None,
        opt_mechanism: None,
        qmr_welfare,
        aux_best: None,
        aux_points_match: false,
        lemma3: None,
        error: None,
    };
    let run = |trial: &mut Theorem1Trial| -> Result<(), OptError> {
        let env = &trial.env;
        let opt = solve_opt(env)?;
        let corners = aux_corners(env)?;
        let (q1, q2) = qmr_aux_points(env)?;
        trial.aux_points_match = corners.majority == q1 && corners.unanimity == q2;
        trial.aux_best = Some(corners.best_value().clone());
        trial.lemma3 = Some(lemma3_bounds(env, &opt.mechanism)?);
        trial.opt_welfare = Some(opt.welfare);
        trial.opt_mechanism = Some(opt.mechanism);
        Ok(())
    };
    if let Err(e) = run(&mut trial) {
        trial.error = Some(e.to_string());
    }
    trial
}

/// Random two-agent environments: the optimum over anonymous BIC rules must
/// equal the better of majority and unanimity, and the relaxation's best corner.
pub fn verify_theorem1(trials: usize, seed: u64) -> Theorem1Campaign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = RandomEnvConfig::default();
    let envs: Vec<Environment> = (0..trials).map(|_| random_environment(&mut rng, 2, &config)).collect();
    let trials = envs
        .into_par_iter()
        .enumerate()
        .map(|(i, env)| theorem1_trial(i, env))
        .collect();
    Theorem1Campaign { seed, trials }
}

/// Influence bounds at one random vertex of the feasible set.
#[derive(Debug, Clone)]
pub struct Lemma3Case {
    pub index: usize,
    pub env: Environment,
    pub objective: Vec<Rational>,
    pub mechanism: Option<AnonymousScf>,
    pub report: Option<Lemma3Report>,
    /// Enumerated welfare equals the interim-constant formula.
    pub welfare_identity: bool,
    pub error: Option<String>,
}

impl Lemma3Case {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.welfare_identity && self.report.as_ref().is_some_and(Lemma3Report::both_hold)
    }
}

#[derive(Debug, Clone)]
pub struct Lemma3Campaign {
    pub seed: u64,
    pub cases: Vec<Lemma3Case>,
}

impl Lemma3Campaign {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(Lemma3Case::passed)
    }
}

fn lemma3_case(index: usize, env: Environment, objective: Vec<Rational>) -> Lemma3Case {
    let mut case = Lemma3Case {
        index,
        env,
        objective,
        mechanism: None,
        report: None,
        welfare_identity: false,
        error: None,
    };
    let run = |case: &mut Lemma3Case| -> Result<(), OptError> {
        let mut built = build_opt_lp(&case.env);
        built.lp.set_objective(case.objective.clone());
        let sol = ratlp::solve(&built.lp)?;
        if !sol.is_optimal() {
            return Err(OptError::Internal(format!("random objective gave {}", sol.status)));
        }
        let f = built.mechanism(&sol.x)?;
        case.welfare_identity = welfare(&case.env, &f) == welfare_via_interims(&case.env, &f)?;
        case.report = Some(lemma3_bounds(&case.env, &f)?);
        case.mechanism = Some(f);
        Ok(())
    };
    if let Err(e) = run(&mut case) {
        case.error = Some(e.to_string());
    }
    case
}

/// Maximizes random integer objectives over the anonymous BIC polytope of
/// random two-agent environments and checks the bounds at each vertex.
pub fn verify_lemma3(cases: usize, seed: u64) -> Lemma3Campaign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = RandomEnvConfig::default();
    let inputs: Vec<(Environment, Vec<Rational>)> = (0..cases)
        .map(|_| {
            let env = random_environment(&mut rng, 2, &config);
            let vars = build_opt_lp(&env).lp.num_vars;
            let objective = (0..vars)
                .map(|_| Rational::from_integer(rng.gen_range(-10i64..=10).into()))
                .collect();
            (env, objective)
        })
        .collect();
    let cases = inputs
        .into_par_iter()
        .enumerate()
        .map(|(i, (env, objective))| lemma3_case(i, env, objective))
        .collect();
    Lemma3Campaign { seed, cases }
}

/// One symmetric environment checked against the closed-form threshold.
#[derive(Debug, Clone)]
pub struct Proposition1Case {
    pub index: usize,
    pub env: Environment,
    pub k_bar: Option<usize>,
    pub threshold_welfare: Option<Rational>,
    pub qmr_welfare: Rational,
    pub opt_welfare: Option<Rational>,
    pub opt_mechanism: Option<AnonymousScf>,
    pub error: Option<String>,
}

impl Proposition1Case {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.opt_welfare.is_some()
            && self.opt_welfare == self.threshold_welfare
            && self.opt_welfare.as_ref() == Some(&self.qmr_welfare)
    }
}

#[derive(Debug, Clone)]
pub struct Proposition1Campaign {
    pub seed: u64,
    pub cases: Vec<Proposition1Case>,
}

impl Proposition1Campaign {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(Proposition1Case::passed)
    }
}

fn proposition1_case(index: usize, env: Environment) -> Proposition1Case {
    let mut case = Proposition1Case {
        index,
        qmr_welfare: qmr_best(&env).best_welfare().clone(),
        env,
        k_bar: None,
        threshold_welfare: None,
        opt_welfare: None,
        opt_mechanism: None,
        error: None,
    };
    let run = |case: &mut Proposition1Case| -> Result<(), OptError> {
        let t = symmetric_threshold(&case.env)?;
        case.k_bar = Some(t.k_bar);
        case.threshold_welfare = Some(welfare(&case.env, &QualifiedMajorityRule::new(t.k_bar)));
        let opt = solve_opt(&case.env)?;
        case.opt_welfare = Some(opt.welfare);
        case.opt_mechanism = Some(opt.mechanism);
        Ok(())
    };
    if let Err(e) = run(&mut case) {
        case.error = Some(e.to_string());
    }
    case
}

/// Random symmetric environments with `n` in `2..=5` and at most four values,
/// which keeps the largest LP at 56 variables.
pub fn verify_proposition1(cases: usize, seed: u64) -> Proposition1Campaign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = RandomEnvConfig {
        max_values: 4,
        ..RandomEnvConfig::default()
    };
    let envs: Vec<Environment> = (0..cases)
        .map(|_| {
            let n = rng.gen_range(2..=5);
            random_symmetric_environment(&mut rng, n, &config)
        })
        .collect();
    let cases = envs
        .into_par_iter()
        .enumerate()
        .map(|(i, env)| proposition1_case(i, env))
        .collect();
    Proposition1Campaign { seed, cases }
}
