//! The welfare-maximization program over anonymous BIC rules as an exact LP,
//! plus the four-variable interim relaxation used for two agents.
//!
//! One LP variable per report multiset keeps anonymity structural. For each
//! distinct agent distribution the rows are:
//!
//! * interim equalities between consecutive negative reports,
//! * interim equalities between consecutive positive reports,
//! * `interim(top negative) <= interim(bottom positive)`.
//!
//! Interims are raw sums `sum_{v_-i} Pr(v_-i) f(v, v_-i)`, not scaled by the
//! own-report probability, so the rows stay meaningful at reports an agent
//! makes with probability zero.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use ratlp::{EnumerationGuard, LinearProgram, LpError, LpSolution, LpStatus};
use thiserror::Error;

use crate::env::{for_each_profile, Environment};
use crate::mechanism::{
    check_bic, welfare, welfare_via_interims, AnonymousScf, InterimProfile, Mechanism, MechanismError, MultisetIndex,
    OrderedTable, QualifiedMajorityRule,
};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum OptError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("expected a 2-agent environment, got {0} agents")]
    NotTwoAgents(usize),
    #[error("agent {agent}: probability of a positive value must lie strictly in (0, 1)")]
    DegenerateAgent { agent: usize },
    #[error("mechanism is not anonymous")]
    NotAnonymous,
    #[error("internal error: {0}")]
    Internal(String),
}

/// LP embodiment of the program plus the map back to multisets.
#[derive(Debug, Clone)]
pub struct OptLp {
    pub lp: LinearProgram,
    pub index: Arc<MultisetIndex>,
    /// One representative agent per distinct distribution that got rows.
    pub constraint_agents: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Share one constraint block among agents with identical distributions.
    pub dedup_types: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { dedup_types: true }
    }
}

pub fn build_opt_lp(env: &Environment) -> OptLp {
    build_opt_lp_with(env, BuildOptions::default())
}

pub fn build_opt_lp_with(env: &Environment, options: BuildOptions) -> OptLp {
    let n = env.n();
    let k = env.values().len();
    let index = Arc::new(MultisetIndex::new(n, k));
    let vars = index.len();

    let mut constraint_agents: Vec<usize> = Vec::new();
    for i in 0..n {
        let duplicate = options.dedup_types
            && constraint_agents
                .iter()
                .any(|&j| env.agent(j).probs() == env.agent(i).probs());
        if !duplicate {
            constraint_agents.push(i);
        }
    }

    let mut objective = vec![Rational::zero(); vars];
    // interim[a][v][m]: coefficient of multiset m in agent a's interim at report v.
    let mut interim = vec![vec![vec![Rational::zero(); vars]; k]; constraint_agents.len()];
    let mut prefix = vec![Rational::one(); n + 1];
    let mut suffix = vec![Rational::one(); n + 1];
    for_each_profile(n, k, |p| {
        let m = index.position_of_profile(p);
        for j in 0..n {
            prefix[j + 1] = &prefix[j] * env.agent(j).prob(p[j]);
        }
        for j in (0..n).rev() {
            suffix[j] = &suffix[j + 1] * env.agent(j).prob(p[j]);
        }
        if !prefix[n].is_zero() {
            objective[m] += &prefix[n] * env.profile_total(p);
        }
        for (a, &i) in constraint_agents.iter().enumerate() {
            let others = &prefix[i] * &suffix[i + 1];
            if !others.is_zero() {
                interim[a][p[i]][m] += others;
            }
        }
    });

    let mut lp = LinearProgram::unit_box(vars);
    lp.set_objective(objective);
    let vs = env.values();
    let difference = |row: &[Vec<Rational>], a: usize, b: usize| -> Vec<Rational> {
        row[a].iter().zip(&row[b]).map(|(x, y)| x - y).collect()
    };
    for rows in &interim {
        for v in vs.negatives().skip(1) {
            lp.add_eq(difference(rows, v - 1, v), Rational::zero());
        }
        for v in vs.positives().skip(1) {
            lp.add_eq(difference(rows, v - 1, v), Rational::zero());
        }
        lp.add_le(
            difference(rows, vs.negatives().end - 1, vs.positives().start),
            Rational::zero(),
        );
    }
    OptLp {
        lp,
        index,
        constraint_agents,
    }
}

impl OptLp {
    /// Reads an LP point back as an anonymous rule.
    pub fn mechanism(&self, x: &[Rational]) -> Result<AnonymousScf, MechanismError> {
        AnonymousScf::new(self.index.clone(), x.to_vec())
    }

    /// LP point of an anonymous rule (for feasibility checks).
    pub fn point_of(&self, f: &AnonymousScf) -> Vec<Rational> {
        f.allocations().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpStats {
    pub variables: usize,
    pub equality_rows: usize,
    pub inequality_rows: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub struct OptimalMechanismReport {
    pub mechanism: AnonymousScf,
    pub welfare: Rational,
    pub interims: InterimProfile,
    pub lp_stats: LpStats,
}

impl OptimalMechanismReport {
    pub fn c_minus_plus(&self, env: &Environment, agent: usize) -> (Rational, Rational) {
        self.interims.flat(env, agent).expect("optimal mechanism is BIC")
    }
}

/// Solves the program and verifies the result before returning it.
pub fn solve_opt(env: &Environment) -> Result<OptimalMechanismReport, OptError> {
    solve_opt_with(env, BuildOptions::default())
}

pub fn solve_opt_with(env: &Environment, options: BuildOptions) -> Result<OptimalMechanismReport, OptError> {
    let built = build_opt_lp_with(env, options);
    let sol = ratlp::solve(&built.lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(OptError::Internal(format!(
            "LP reported {} although the zero rule is feasible",
            sol.status
        )));
    }
    verified_report(env, &built, &sol)
}

/// Cross-checks an LP solution as a mechanism: BIC, and the enumerated and
/// interim welfare both equal to the LP objective.
pub fn verified_report(env: &Environment, built: &OptLp, sol: &LpSolution) -> Result<OptimalMechanismReport, OptError> {
    let mechanism = built.mechanism(&sol.x)?;
    let check = check_bic(env, &mechanism);
    if let Some(v) = check.violation {
        return Err(OptError::Internal(format!("LP vertex is not BIC: {v}")));
    }
    let direct = welfare(env, &mechanism);
    if direct != sol.objective_value {
        return Err(OptError::Internal(format!(
            "LP objective {} differs from enumerated welfare {}",
            sol.objective_value, direct
        )));
    }
    let via = welfare_via_interims(env, &mechanism)?;
    if via != direct {
        return Err(OptError::Internal(format!(
            "interim welfare {via} differs from enumerated welfare {direct}"
        )));
    }
    Ok(OptimalMechanismReport {
        mechanism,
        welfare: direct,
        interims: check.interims,
        lp_stats: LpStats {
            variables: built.lp.num_vars,
            equality_rows: built.lp.eq_rows.len(),
            inequality_rows: built.lp.ineq_rows.len(),
            pivots: sol.pivots,
        },
    })
}

/// Optimal welfare of the program by the enumeration oracle instead of the simplex.
pub fn opt_value_by_enumeration(env: &Environment, guard: EnumerationGuard) -> Result<Rational, OptError> {
    let built = build_opt_lp(env);
    let sol = ratlp::vertex_enumerate(&built.lp, guard)?;
    if sol.status != LpStatus::Optimal {
        return Err(OptError::Internal(format!("oracle reported {}", sol.status)));
    }
    Ok(sol.objective_value)
}

/// Interim constants `(c_1^+, c_1^-, c_2^+, c_2^-)` of a two-agent rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxPoint {
    pub c1_plus: Rational,
    pub c1_minus: Rational,
    pub c2_plus: Rational,
    pub c2_minus: Rational,
}

impl AuxPoint {
    pub fn from_interims(env: &Environment, interims: &InterimProfile) -> Option<Self> {
        let (c1_minus, c1_plus) = interims.flat(env, 0)?;
        let (c2_minus, c2_plus) = interims.flat(env, 1)?;
        Some(Self {
            c1_plus,
            c1_minus,
            c2_plus,
            c2_minus,
        })
    }

    fn coords(&self) -> [&Rational; 4] {
        [&self.c1_plus, &self.c1_minus, &self.c2_plus, &self.c2_minus]
    }
}

/// Two-agent environment data the relaxation needs.
#[derive(Debug, Clone)]
struct TwoAgent {
    p1: Rational,
    p2: Rational,
    pos1: Rational,
    neg1: Rational,
    pos2: Rational,
    neg2: Rational,
}

impl TwoAgent {
    fn new(env: &Environment) -> Result<Self, OptError> {
        if env.n() != 2 {
            return Err(OptError::NotTwoAgents(env.n()));
        }
        let s1 = env.agent_stats(0).map_err(MechanismError::from)?;
        let s2 = env.agent_stats(1).map_err(MechanismError::from)?;
        for (agent, s) in [(0, &s1), (1, &s2)] {
            if s.p.is_zero() || s.p.is_one() {
                return Err(OptError::DegenerateAgent { agent });
            }
        }
        Ok(Self {
            p1: s1.p,
            p2: s2.p,
            pos1: s1.positive_mass,
            neg1: s1.negative_mass,
            pos2: s2.positive_mass,
            neg2: s2.negative_mass,
        })
    }

    fn objective(&self, c: &AuxPoint) -> Rational {
        &self.pos1 * &c.c1_plus - &self.neg1 * &c.c1_minus + &self.pos2 * &c.c2_plus - &self.neg2 * &c.c2_minus
    }
}

/// Slack of each relaxation constraint at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFeasibility {
    /// `p_1^2 - (p_1 c_2^+ - (1-p_1) c_2^-)`.
    pub bound1_slack: Rational,
    /// `p_2^2 - (p_2 c_1^+ - (1-p_2) c_1^-)`.
    pub bound2_slack: Rational,
    /// `p_1 c_1^+ + (1-p_1) c_1^- - p_2 c_2^+ - (1-p_2) c_2^-`; zero when balanced.
    pub balance_gap: Rational,
    pub in_unit_box: bool,
}

impl AuxFeasibility {
    pub fn feasible(&self) -> bool {
        !self.bound1_slack.is_negative()
            && !self.bound2_slack.is_negative()
            && self.balance_gap.is_zero()
            && self.in_unit_box
    }
}

pub fn aux_feasibility(env: &Environment, c: &AuxPoint) -> Result<AuxFeasibility, OptError> {
    let t = TwoAgent::new(env)?;
    let one = Rational::one();
    let (q1, q2) = (&one - &t.p1, &one - &t.p2);
    Ok(AuxFeasibility {
        bound1_slack: &t.p1 * &t.p1 - (&t.p1 * &c.c2_plus - &q1 * &c.c2_minus),
        bound2_slack: &t.p2 * &t.p2 - (&t.p2 * &c.c1_plus - &q2 * &c.c1_minus),
        balance_gap: &t.p1 * &c.c1_plus + &q1 * &c.c1_minus - &t.p2 * &c.c2_plus - &q2 * &c.c2_minus,
        in_unit_box: c.coords().iter().all(|v| !v.is_negative() && **v <= one),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuxWinner {
    Majority,
    Unanimity,
    Both,
}

#[derive(Debug, Clone)]
pub struct AuxCorners {
    /// Interims of `f^(1)`.
    pub majority: AuxPoint,
    /// Interims of `f^(2)`.
    pub unanimity: AuxPoint,
    pub majority_value: Rational,
    pub unanimity_value: Rational,
    pub winner: AuxWinner,
}

impl AuxCorners {
    pub fn best_value(&self) -> &Rational {
        if self.majority_value >= self.unanimity_value {
            &self.majority_value
        } else {
            &self.unanimity_value
        }
    }
}

/// The two candidate corners of the relaxation and their objective values.
pub fn aux_corners(env: &Environment) -> Result<AuxCorners, OptError> {
    let t = TwoAgent::new(env)?;
    let one = Rational::one();
    let majority = AuxPoint {
        c1_plus: one.clone(),
        c1_minus: t.p2.clone(),
        c2_plus: one.clone(),
        c2_minus: t.p1.clone(),
    };
    let unanimity = AuxPoint {
        c1_plus: t.p2.clone(),
        c1_minus: Rational::zero(),
        c2_plus: t.p1.clone(),
        c2_minus: Rational::zero(),
    };
    let majority_value = t.objective(&majority);
    let unanimity_value = t.objective(&unanimity);
    let winner = match majority_value.cmp(&unanimity_value) {
        std::cmp::Ordering::Greater => AuxWinner::Majority,
        std::cmp::Ordering::Less => AuxWinner::Unanimity,
        std::cmp::Ordering::Equal => AuxWinner::Both,
    };
    Ok(AuxCorners {
        majority,
        unanimity,
        majority_value,
        unanimity_value,
        winner,
    })
}

/// The relaxation as a 4-variable LP in the order `(c1+, c1-, c2+, c2-)`.
pub fn aux_lp(env: &Environment) -> Result<LinearProgram, OptError> {
    let t = TwoAgent::new(env)?;
    let one = Rational::one();
    let (q1, q2) = (&one - &t.p1, &one - &t.p2);
    let zero = Rational::zero;
    let mut lp = LinearProgram::unit_box(4);
    lp.set_objective(vec![t.pos1.clone(), -t.neg1.clone(), t.pos2.clone(), -t.neg2.clone()]);
    lp.add_le(vec![zero(), zero(), t.p1.clone(), -q1.clone()], &t.p1 * &t.p1);
    lp.add_le(vec![t.p2.clone(), -q2.clone(), zero(), zero()], &t.p2 * &t.p2);
    lp.add_eq(vec![t.p1.clone(), q1, -t.p2.clone(), -q2], zero());
    Ok(lp)
}

/// Both sides of the two-agent influence bounds for one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma3Report {
    pub lhs1: Rational,
    pub bound1: Rational,
    pub lhs2: Rational,
    pub bound2: Rational,
}

impl Lemma3Report {
    pub fn holds(&self) -> (bool, bool) {
        (self.lhs1 <= self.bound1, self.lhs2 <= self.bound2)
    }

    pub fn both_hold(&self) -> bool {
        let (a, b) = self.holds();
        a && b
    }
}

/// `p_1 c_2^+ - (1-p_1) c_2^- <= p_1^2` and `p_2 c_1^+ - (1-p_2) c_1^- <= p_2^2`.
pub fn lemma3_bounds<M: Mechanism + ?Sized>(env: &Environment, f: &M) -> Result<Lemma3Report, OptError> {
    let t = TwoAgent::new(env)?;
    f.check_compatible(env)?;
    if !OrderedTable::tabulate(env, f).is_anonymous() {
        return Err(OptError::NotAnonymous);
    }
    let check = check_bic(env, f);
    if let Some(v) = check.violation {
        return Err(MechanismError::NotBic(Box::new(v)).into());
    }
    let c = AuxPoint::from_interims(env, &check.interims).expect("BIC implies flat interims");
    let one = Rational::one();
    Ok(Lemma3Report {
        lhs1: &t.p1 * &c.c2_plus - (&one - &t.p1) * &c.c2_minus,
        bound1: &t.p1 * &t.p1,
        lhs2: &t.p2 * &c.c1_plus - (&one - &t.p2) * &c.c1_minus,
        bound2: &t.p2 * &t.p2,
    })
}

/// Interims of the two-agent qualified majority rules, for comparison
/// with [`aux_corners`].
pub fn qmr_aux_points(env: &Environment) -> Result<(AuxPoint, AuxPoint), OptError> {
    TwoAgent::new(env)?;
    let point = |k| -> Result<AuxPoint, OptError> {
        let check = check_bic(env, &QualifiedMajorityRule::new(k));
        AuxPoint::from_interims(env, &check.interims)
            .ok_or_else(|| OptError::Internal(format!("f^({k}) interims are not flat")))
    };
    Ok((point(1)?, point(2)?))
}
