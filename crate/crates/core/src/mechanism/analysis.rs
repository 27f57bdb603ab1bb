use std::fmt;

use num_traits::{One, Signed, Zero};

use super::rules::{CoalitionRule, Mechanism, QualifiedMajorityRule, WeightedMajorityRule};
use super::{coalition_mask, MechanismError};
use crate::env::{for_each_profile, Environment};
use crate::rational::Rational;

/// Largest `n` for which the `2^n` coalition table is built.
pub const MAX_PROJECTION_AGENTS: usize = 12;

/// Allocation of `f` at an ordered profile of values.
pub fn evaluate<M: Mechanism + ?Sized>(
    env: &Environment,
    f: &M,
    profile: &[Rational],
) -> Result<Rational, MechanismError> {
    f.check_compatible(env)?;
    let idx = env.profile_indices(profile)?;
    Ok(f.allocation(env.values(), &idx))
}

/// `E[f(v, v_-i)]` over the other agents' independent values.
pub fn interim_allocation<M: Mechanism + ?Sized>(
    env: &Environment,
    f: &M,
    agent: usize,
    report: &Rational,
) -> Result<Rational, MechanismError> {
    f.check_compatible(env)?;
    if agent >= env.n() {
        return Err(crate::env::EnvError::AgentIndex {
            index: agent,
            n: env.n(),
        }
        .into());
    }
    let v = env.values().index_of(report)?;
    let n = env.n();
    let mut profile = vec![0; n];
    let mut total = Rational::zero();
    for_each_profile(n - 1, env.values().len(), |others| {
        let mut prob = Rational::one();
        for (j, &w) in (0..n).filter(|&j| j != agent).zip(others) {
            profile[j] = w;
            prob *= env.agent(j).prob(w);
            if prob.is_zero() {
                return;
            }
        }
        profile[agent] = v;
        let a = f.allocation(env.values(), &profile);
        if !a.is_zero() {
            total += prob * a;
        }
    });
    Ok(total)
}

/// Interim allocations of every agent at every report, including reports
/// the agent makes with probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InterimProfile {
    /// `by_agent[i][v]` for support index `v`.
    pub by_agent: Vec<Vec<Rational>>,
}

impl InterimProfile {
    pub fn get(&self, agent: usize, report: usize) -> &Rational {
        &self.by_agent[agent][report]
    }

    /// `(c_minus, c_plus)` when the agent's interims are flat on each sign.
    pub fn flat(&self, env: &Environment, agent: usize) -> Option<(Rational, Rational)> {
        let row = &self.by_agent[agent];
        let vs = env.values();
        let c_minus = &row[vs.negatives().start];
        let c_plus = &row[vs.positives().start];
        let flat = vs.negatives().all(|v| &row[v] == c_minus) && vs.positives().all(|v| &row[v] == c_plus);
        flat.then(|| (c_minus.clone(), c_plus.clone()))
    }
}

pub fn interim_profile<M: Mechanism + ?Sized>(env: &Environment, f: &M) -> InterimProfile {
    let n = env.n();
    let k = env.values().len();
    let mut by_agent = vec![vec![Rational::zero(); k]; n];
    let mut prefix = vec![Rational::one(); n + 1];
    let mut suffix = vec![Rational::one(); n + 1];
    for_each_profile(n, k, |p| {
        let a = f.allocation(env.values(), p);
        if a.is_zero() {
            return;
        }
        for j in 0..n {
            prefix[j + 1] = &prefix[j] * env.agent(j).prob(p[j]);
        }
        for j in (0..n).rev() {
            suffix[j] = &suffix[j + 1] * env.agent(j).prob(p[j]);
        }
        for i in 0..n {
            let others = &prefix[i] * &suffix[i + 1];
            if !others.is_zero() {
                by_agent[i][p[i]] += others * &a;
            }
        }
    });
    InterimProfile { by_agent }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Two negative reports with different interims.
    NegativeNotFlat,
    /// Two positive reports with different interims.
    PositiveNotFlat,
    /// The negative-side interim exceeds the positive-side one.
    NotMonotone,
}

/// First BIC failure in canonical (agent, report) order.
#[derive(Debug, Clone, PartialEq)]
pub struct BicViolation {
    pub agent: usize,
    pub kind: ViolationKind,
    pub report: Rational,
    pub other_report: Rational,
    pub interim: Rational,
    pub other_interim: Rational,
}

impl fmt::Display for BicViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::NegativeNotFlat => "negative reports not flat",
            ViolationKind::PositiveNotFlat => "positive reports not flat",
            ViolationKind::NotMonotone => "negative interim exceeds positive interim",
        };
        write!(
            f,
            "agent {}: {} (report {} -> {}, report {} -> {})",
            self.agent + 1,
            what,
            self.report,
            self.interim,
            self.other_report,
            self.other_interim
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicCheck {
    pub interims: InterimProfile,
    pub violation: Option<BicViolation>,
}

impl BicCheck {
    pub fn is_bic(&self) -> bool {
        self.violation.is_none()
    }
}

/// Interim characterization of BIC: flat on each sign, negative side below
/// positive side, enforced at every support point.
pub fn check_bic<M: Mechanism + ?Sized>(env: &Environment, f: &M) -> BicCheck {
    let interims = interim_profile(env, f);
    let violation = first_violation(env, &interims);
    BicCheck { interims, violation }
}

fn first_violation(env: &Environment, interims: &InterimProfile) -> Option<BicViolation> {
    let vs = env.values();
    let witness = |agent: usize, kind, a: usize, b: usize| BicViolation {
        agent,
        kind,
        report: vs.value(a).clone(),
        other_report: vs.value(b).clone(),
        interim: interims.get(agent, a).clone(),
        other_interim: interims.get(agent, b).clone(),
    };
    for agent in 0..env.n() {
        let row = &interims.by_agent[agent];
        for v in vs.negatives().skip(1) {
            if row[v - 1] != row[v] {
                return Some(witness(agent, ViolationKind::NegativeNotFlat, v - 1, v));
            }
        }
        for v in vs.positives().skip(1) {
            if row[v - 1] != row[v] {
                return Some(witness(agent, ViolationKind::PositiveNotFlat, v - 1, v));
            }
        }
        let top_negative = vs.negatives().end - 1;
        let bottom_positive = vs.positives().start;
        if row[top_negative] > row[bottom_positive] {
            return Some(witness(
                agent,
                ViolationKind::NotMonotone,
                top_negative,
                bottom_positive,
            ));
        }
    }
    None
}

/// `W(f) = E[f(v) · sum_i v_i]` by enumeration of ordered profiles.
pub fn welfare<M: Mechanism + ?Sized>(env: &Environment, f: &M) -> Rational {
    let mut total = Rational::zero();
    for_each_profile(env.n(), env.values().len(), |p| {
        let prob = env.profile_probability_idx(p);
        if prob.is_zero() {
            return;
        }
        let a = f.allocation(env.values(), p);
        if !a.is_zero() {
            total += prob * a * env.profile_total(p);
        }
    });
    total
}

/// Welfare from interim constants: `sum_i c_i^+ p_i U_i^+ - c_i^- (1-p_i) U_i^-`.
pub fn welfare_via_interims<M: Mechanism + ?Sized>(env: &Environment, f: &M) -> Result<Rational, MechanismError> {
    let check = check_bic(env, f);
    if let Some(v) = check.violation {
        return Err(MechanismError::NotBic(Box::new(v)));
    }
    let mut total = Rational::zero();
    for i in 0..env.n() {
        let (c_minus, c_plus) = check.interims.flat(env, i).expect("BIC implies flat interims");
        let stats = env.agent_stats(i)?;
        total += c_plus * stats.positive_mass - c_minus * stats.negative_mass;
    }
    Ok(total)
}

/// The ordinal conditional expectation `hat f` of a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalProjection {
    pub rule: CoalitionRule,
    /// Whether `phi(T)` depends only on `|T|`.
    pub anonymous: bool,
}

/// `phi_f(T) = E[f | coalition = T]` for every coalition `T`.
pub fn ordinal_projection<M: Mechanism + ?Sized>(
    env: &Environment,
    f: &M,
) -> Result<OrdinalProjection, MechanismError> {
    f.check_compatible(env)?;
    let n = env.n();
    if n > MAX_PROJECTION_AGENTS {
        return Err(MechanismError::TooManyAgents(n));
    }
    let mut num = vec![Rational::zero(); 1 << n];
    let mut den = vec![Rational::zero(); 1 << n];
    for_each_profile(n, env.values().len(), |p| {
        let prob = env.profile_probability_idx(p);
        if prob.is_zero() {
            return;
        }
        let mask = coalition_mask(env.values(), p);
        num[mask] += &prob * f.allocation(env.values(), p);
        den[mask] += prob;
    });
    let mut phi = Vec::with_capacity(1 << n);
    for (mask, (a, b)) in num.into_iter().zip(den).enumerate() {
        if b.is_zero() {
            let coalition = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            return Err(MechanismError::ZeroProbabilityCoalition { coalition });
        }
        phi.push(a / b);
    }
    let rule = CoalitionRule::new(n, phi)?;
    Ok(OrdinalProjection {
        anonymous: rule.is_anonymous(),
        rule,
    })
}

/// Welfare of every qualified majority rule `f^(k)`, `k = 0..=n+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QmrTable {
    pub welfare: Vec<Rational>,
    /// Smallest maximizing threshold.
    pub best_k: usize,
}

impl QmrTable {
    pub fn best_welfare(&self) -> &Rational {
        &self.welfare[self.best_k]
    }

    pub fn best_rule(&self) -> QualifiedMajorityRule {
        QualifiedMajorityRule::new(self.best_k)
    }
}

pub fn qmr_best(env: &Environment) -> QmrTable {
    let n = env.n();
    // by_size[s] = E[1{|coalition| = s} · sum of values]
    let mut by_size = vec![Rational::zero(); n + 1];
    for_each_profile(n, env.values().len(), |p| {
        let prob = env.profile_probability_idx(p);
        if prob.is_zero() {
            return;
        }
        let s = p.iter().filter(|&&v| env.values().is_positive(v)).count();
        by_size[s] += prob * env.profile_total(p);
    });
    let mut welfare = vec![Rational::zero(); n + 2];
    for k in (0..=n).rev() {
        welfare[k] = &welfare[k + 1] + &by_size[k];
    }
    let mut best_k = 0;
    for k in 1..welfare.len() {
        if welfare[k] > welfare[best_k] {
            best_k = k;
        }
    }
    QmrTable { welfare, best_k }
}

/// Closed-form optimal threshold for identically distributed agents.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricThreshold {
    pub k_bar: usize,
    /// `n · U^- / (U^+ + U^-)`; `k_bar` is the least integer above it.
    pub boundary: Rational,
    /// The boundary is an integer, so `f^(boundary)` is optimal too.
    pub tie: bool,
}

pub fn symmetric_threshold(env: &Environment) -> Result<SymmetricThreshold, MechanismError> {
    if !env.is_symmetric() {
        return Err(MechanismError::NotSymmetric);
    }
    let stats = env.agent_stats(0)?;
    let (Some(u_plus), Some(u_minus)) = (stats.u_plus, stats.u_minus) else {
        return Err(MechanismError::UndefinedStats { agent: 0 });
    };
    let n = Rational::from_integer(env.n().into());
    let boundary = n * &u_minus / (u_plus + &u_minus);
    let floor = boundary.floor().to_integer();
    let k_bar: usize = (floor + 1u8).try_into().expect("boundary lies in (0, n)");
    Ok(SymmetricThreshold {
        k_bar: k_bar.max(1),
        tie: boundary.is_integer(),
        boundary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WmrBuild {
    pub rule: WeightedMajorityRule,
    /// Agents whose `U^+` or `U^-` was undefined and taken as 0.
    pub undefined_agents: Vec<usize>,
}

impl WmrBuild {
    pub fn is_flagged(&self) -> bool {
        !self.undefined_agents.is_empty()
    }
}

/// Utilitarian weighted majority rule: weight `U_i^+ + U_i^-`, quorum
/// `sum_i U_i^-`.
pub fn wmr_build(env: &Environment, tie_value: Rational) -> Result<WmrBuild, MechanismError> {
    if tie_value.is_negative() || tie_value > Rational::one() {
        return Err(MechanismError::OutOfRange(tie_value));
    }
    let mut weights = Vec::with_capacity(env.n());
    let mut quorum = Rational::zero();
    let mut undefined_agents = Vec::new();
    for i in 0..env.n() {
        let s = env.agent_stats(i)?;
        if !s.is_defined() {
            undefined_agents.push(i);
        }
        let u_plus = s.u_plus.unwrap_or_else(Rational::zero);
        let u_minus = s.u_minus.unwrap_or_else(Rational::zero);
        weights.push(&u_plus + &u_minus);
        quorum += u_minus;
    }
    Ok(WmrBuild {
        rule: WeightedMajorityRule {
            weights,
            quorum,
            tie_value,
        },
        undefined_agents,
    })
}
