//! Voting environments: a common finite value support and one independent
//! discrete value distribution per agent.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("value set is empty")]
    EmptyValues,
    #[error("0 is not allowed in the value set")]
    ZeroValue,
    #[error("duplicate value {0} in the value set")]
    DuplicateValue(Rational),
    #[error("value set needs at least one negative and one positive value")]
    MissingSign,
    #[error("an environment needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("agent {agent}: expected {expected} probabilities, got {got}")]
    WrongLength { agent: usize, expected: usize, got: usize },
    #[error("agent {agent}: negative probability {prob} at value {value}")]
    NegativeProbability {
        agent: usize,
        value: Box<Rational>,
        prob: Box<Rational>,
    },
    #[error("agent {agent}: probabilities must sum to 1, got {sum}")]
    NotNormalized { agent: usize, sum: Rational },
    #[error("value {0} is not in the support")]
    NotInSupport(Rational),
    #[error("agent index {index} out of range for {n} agents")]
    AgentIndex { index: usize, n: usize },
    #[error("profile has {got} entries, expected {expected}")]
    ProfileLength { got: usize, expected: usize },
}

/// Common support `V`: strictly increasing, nonzero, both signs present.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueSet {
    values: Vec<Rational>,
    first_positive: usize,
}

impl ValueSet {
    /// Sorts `values`; rejects zero, duplicates and single-signed sets.
    pub fn new(mut values: Vec<Rational>) -> Result<Self, EnvError> {
        if values.is_empty() {
            return Err(EnvError::EmptyValues);
        }
        if values.iter().any(Zero::is_zero) {
            return Err(EnvError::ZeroValue);
        }
        values.sort();
        if let Some(w) = values.windows(2).find(|w| w[0] == w[1]) {
            return Err(EnvError::DuplicateValue(w[0].clone()));
        }
        let first_positive = values.iter().position(Signed::is_positive).unwrap_or(values.len());
        if first_positive == 0 || first_positive == values.len() {
            return Err(EnvError::MissingSign);
        }
        Ok(Self { values, first_positive })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> &Rational {
        &self.values[idx]
    }

    pub fn index_of(&self, v: &Rational) -> Result<usize, EnvError> {
        self.values
            .binary_search(v)
            .map_err(|_| EnvError::NotInSupport(v.clone()))
    }

    pub fn is_positive(&self, idx: usize) -> bool {
        idx >= self.first_positive
    }

    /// Indices of negative values, ascending.
    pub fn negatives(&self) -> std::ops::Range<usize> {
        0..self.first_positive
    }

    /// Indices of positive values, ascending.
    pub fn positives(&self) -> std::ops::Range<usize> {
        self.first_positive..self.values.len()
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Distribution `G_i` over the common support, aligned with [`ValueSet`] indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentDistribution {
    pub name: Option<String>,
    probs: Vec<Rational>,
}

impl AgentDistribution {
    pub fn new(probs: Vec<Rational>) -> Self {
        Self { name: None, probs }
    }

    pub fn named(name: impl Into<String>, probs: Vec<Rational>) -> Self {
        Self {
            name: Some(name.into()),
            probs,
        }
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn prob(&self, idx: usize) -> &Rational {
        &self.probs[idx]
    }
}

/// Conditional statistics of one agent's value.
///
/// `u_plus` is `E[v | v > 0]` and `u_minus` is `E[|v| | v < 0]`; either is
/// `None` when its conditioning event has probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentStats {
    pub p: Rational,
    pub u_plus: Option<Rational>,
    pub u_minus: Option<Rational>,
    /// `p · u_plus`, i.e. `sum_{v>0} v G(v)`. Always defined.
    pub positive_mass: Rational,
    /// `(1-p) · u_minus`, i.e. `sum_{v<0} |v| G(v)`. Always defined.
    pub negative_mass: Rational,
}

impl AgentStats {
    pub fn is_defined(&self) -> bool {
        self.u_plus.is_some() && self.u_minus.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flag {
    /// `p_i` is 0 or 1, so one sign never occurs.
    DegenerateSign { agent: usize },
    /// A support point carries zero probability.
    ZeroProbabilityValue { agent: usize, value: Rational },
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::DegenerateSign { agent } => {
                write!(f, "agent {}: probability of a positive value is 0 or 1", agent + 1)
            }
            Flag::ZeroProbabilityValue { agent, value } => {
                write!(f, "agent {}: value {} has probability 0", agent + 1, value)
            }
        }
    }
}

/// Outcome of [`Environment::validate`]. Hard violations are rejected at
/// construction; what remains are boundary cases accepted in limit mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub flags: Vec<Flag>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }

    /// True when the environment is only admissible as a limit case.
    pub fn limit_mode(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn strict_sign_probabilities(&self) -> bool {
        !self.flags.iter().any(|f| matches!(f, Flag::DegenerateSign { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Environment {
    values: ValueSet,
    agents: Vec<AgentDistribution>,
}

impl Environment {
    pub fn new(values: ValueSet, agents: Vec<AgentDistribution>) -> Result<Self, EnvError> {
        if agents.len() < 2 {
            return Err(EnvError::TooFewAgents(agents.len()));
        }
        for (agent, dist) in agents.iter().enumerate() {
            if dist.probs.len() != values.len() {
                return Err(EnvError::WrongLength {
                    agent,
                    expected: values.len(),
                    got: dist.probs.len(),
                });
            }
            if let Some((idx, prob)) = dist.probs.iter().enumerate().find(|(_, p)| p.is_negative()) {
                return Err(EnvError::NegativeProbability {
                    agent,
                    value: Box::new(values.value(idx).clone()),
                    prob: Box::new(prob.clone()),
                });
            }
            let sum: Rational = dist.probs.iter().sum();
            if !sum.is_one() {
                return Err(EnvError::NotNormalized { agent, sum });
            }
        }
        Ok(Self { values, agents })
    }

    /// `n` agents sharing one distribution.
    pub fn symmetric(values: ValueSet, dist: AgentDistribution, n: usize) -> Result<Self, EnvError> {
        Self::new(values, vec![dist; n])
    }

    pub fn values(&self) -> &ValueSet {
        &self.values
    }

    pub fn agents(&self) -> &[AgentDistribution] {
        &self.agents
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, i: usize) -> &AgentDistribution {
        &self.agents[i]
    }

    pub fn is_symmetric(&self) -> bool {
        self.agents.windows(2).all(|w| w[0].probs == w[1].probs)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut flags = Vec::new();
        for i in 0..self.n() {
            let p = self.positive_probability(i);
            if p.is_zero() || p.is_one() {
                flags.push(Flag::DegenerateSign { agent: i });
            }
            for (idx, prob) in self.agents[i].probs.iter().enumerate() {
                if prob.is_zero() {
                    flags.push(Flag::ZeroProbabilityValue {
                        agent: i,
                        value: self.values.value(idx).clone(),
                    });
                }
            }
        }
        ValidationReport { flags }
    }

    fn positive_probability(&self, i: usize) -> Rational {
        self.values
            .positives()
            .map(|idx| self.agents[i].probs[idx].clone())
            .sum()
    }

    pub fn agent_stats(&self, i: usize) -> Result<AgentStats, EnvError> {
        if i >= self.n() {
            return Err(EnvError::AgentIndex { index: i, n: self.n() });
        }
        let g = &self.agents[i].probs;
        let p = self.positive_probability(i);
        let positive_mass: Rational = self
            .values
            .positives()
            .map(|idx| self.values.value(idx) * &g[idx])
            .sum();
        let negative_mass: Rational = self
            .values
            .negatives()
            .map(|idx| -self.values.value(idx) * &g[idx])
            .sum();
        let q = Rational::one() - &p;
        Ok(AgentStats {
            u_plus: (!p.is_zero()).then(|| &positive_mass / &p),
            u_minus: (!q.is_zero()).then(|| &negative_mass / &q),
            p,
            positive_mass,
            negative_mass,
        })
    }

    /// Probability of an ordered profile given as support indices.
    pub fn profile_probability_idx(&self, profile: &[usize]) -> Rational {
        let mut prob = Rational::one();
        for (dist, &v) in self.agents.iter().zip(profile) {
            let g = &dist.probs[v];
            if g.is_zero() {
                return Rational::zero();
            }
            prob *= g;
        }
        prob
    }

    /// Probability of an ordered profile of values.
    pub fn profile_probability(&self, profile: &[Rational]) -> Result<Rational, EnvError> {
        let idx = self.profile_indices(profile)?;
        Ok(self.profile_probability_idx(&idx))
    }

    pub fn profile_indices(&self, profile: &[Rational]) -> Result<Vec<usize>, EnvError> {
        if profile.len() != self.n() {
            return Err(EnvError::ProfileLength {
                got: profile.len(),
                expected: self.n(),
            });
        }
        profile.iter().map(|v| self.values.index_of(v)).collect()
    }

    /// Sum of the values in a profile of support indices.
    pub fn profile_total(&self, profile: &[usize]) -> Rational {
        profile.iter().map(|&v| self.values.value(v)).sum()
    }
}

/// Visits every ordered profile in `{0..k}^n`, last coordinate fastest.
pub fn for_each_profile(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    let mut profile = vec![0usize; n];
    loop {
        visit(&profile);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            profile[pos] += 1;
            if profile[pos] < k {
                break;
            }
            profile[pos] = 0;
        }
    }
}
