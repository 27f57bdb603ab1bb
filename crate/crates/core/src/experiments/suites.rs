//! Named verification suites: each runs one experiment and turns it into a
//! flat list of pass/fail checks.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::campaigns::{verify_lemma3, verify_theorem1};
use super::example1::example1_fixture;
use super::random::{random_environment, RandomEnvConfig};
use super::{cardinal_ordinal_ratio_sweep, make_fstar, make_theorem2_env, run_theorem2_demo, ExperimentError};
use crate::mechanism::{check_bic, ordinal_projection, welfare, welfare_via_interims, QualifiedMajorityRule};
use crate::opt::{aux_corners, aux_feasibility, aux_lp, qmr_aux_points, OptError};
use crate::rational::{annotated, exact, rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Theorem1,
    Theorem2,
    Lemma3,
    Aux,
    Example1,
    Ratio,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        SuiteName::Theorem1,
        SuiteName::Theorem2,
        SuiteName::Lemma3,
        SuiteName::Aux,
        SuiteName::Example1,
        SuiteName::Ratio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Theorem1 => "theorem1",
            SuiteName::Theorem2 => "theorem2",
            SuiteName::Lemma3 => "lemma3",
            SuiteName::Aux => "aux",
            SuiteName::Example1 => "example1",
            SuiteName::Ratio => "ratio",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|name| name.as_str() == s).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|n| n.as_str()).collect();
            format!("unknown suite '{s}', expected one of: {}", known.join(", "))
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    pub m: Rational,
    pub eps: Rational,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            trials: 100,
            n: 3,
            m: rat(10, 1),
            eps: Rational::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub checks: Vec<Check>,
    /// Human-readable tables produced along the way.
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_suite(suite: SuiteName, options: &SuiteOptions) -> Result<SuiteReport, ExperimentError> {
    let mut report = SuiteReport {
        suite,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    match suite {
        SuiteName::Theorem1 => theorem1(options, &mut report),
        SuiteName::Theorem2 => theorem2(options, &mut report)?,
        SuiteName::Lemma3 => lemma3(options, &mut report),
        SuiteName::Aux => aux(options, &mut report)?,
        SuiteName::Example1 => example1(&mut report)?,
        SuiteName::Ratio => ratio(options.n, &mut report)?,
    }
    Ok(report)
}

fn theorem1(options: &SuiteOptions, report: &mut SuiteReport) {
    let campaign = verify_theorem1(options.trials, options.seed);
    let failed: Vec<String> = campaign
        .failures()
        .map(|t| {
            let why = t.error.clone().unwrap_or_else(|| {
                format!(
                    "opt {:?} vs max(W(f^(1)), W(f^(2))) {}",
                    t.opt_welfare.as_ref().map(exact),
                    exact(t.best_qmr())
                )
            });
            format!("trial {}: {why}; values {}", t.index, t.env.values())
        })
        .collect();
    report.checks.push(Check::new(
        "opt equals the better of majority and unanimity, and the best relaxation corner",
        failed.is_empty(),
        if failed.is_empty() {
            format!(
                "{} of {} trials (seed {})",
                campaign.trials.len(),
                campaign.trials.len(),
                options.seed
            )
        } else {
            failed.join("\n")
        },
    ));
}

fn theorem2(options: &SuiteOptions, report: &mut SuiteReport) -> Result<(), ExperimentError> {
    let demo = run_theorem2_demo(options.n, options.m.clone(), options.eps.clone())?;
    let n = options.n;
    report.notes.push(format!(
        "n = {n}, M = {}, eps = {}\nbest QMR  {} (k* = {})\nOPT       {}\nWMR       {}{}",
        exact(&options.m),
        exact(&options.eps),
        annotated(demo.best_qmr_welfare()),
        demo.qmr.best_k,
        annotated(&demo.opt_welfare),
        annotated(&demo.wmr_welfare),
        demo.fstar_welfare
            .as_ref()
            .map(|w| format!("\nf*        {}", annotated(w)))
            .unwrap_or_default(),
    ));
    report.checks.push(Check::new(
        "opt strictly exceeds every qualified majority rule",
        demo.strict_gap(),
        format!("gap {}", exact(&(&demo.opt_welfare - demo.best_qmr_welfare()))),
    ));
    if let Some(fstar_welfare) = &demo.fstar_welfare {
        let env = make_theorem2_env(n, options.m.clone(), options.eps.clone())?;
        let fstar = make_fstar(n, &options.m)?;
        let bic = check_bic(&env, &fstar);
        report.checks.push(Check::new(
            "f* is BIC",
            bic.is_bic(),
            bic.violation.map(|v| v.to_string()).unwrap_or_default(),
        ));
        let unanimity = welfare(&env, &QualifiedMajorityRule::new(n));
        report.checks.push(Check::new(
            "f* improves on unanimity and opt is at least W(f*)",
            fstar_welfare > &unanimity && &demo.opt_welfare >= fstar_welfare,
            format!("W(f^({n})) = {}, W(f*) = {}", exact(&unanimity), exact(fstar_welfare)),
        ));
    }
    Ok(())
}

fn lemma3(options: &SuiteOptions, report: &mut SuiteReport) {
    let campaign = verify_lemma3(options.trials, options.seed);
    let failed: Vec<String> = campaign
        .cases
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("case {}: {:?}", c.index, c.error.as_deref().unwrap_or("bound violated")))
        .collect();
    report.checks.push(Check::new(
        "influence bounds hold at random vertices of the anonymous BIC polytope",
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} cases (seed {})", campaign.cases.len(), options.seed)
        } else {
            failed.join("\n")
        },
    ));
}

fn aux(options: &SuiteOptions, report: &mut SuiteReport) -> Result<(), ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let config = RandomEnvConfig::default();
    let mut failures = Vec::new();
    for trial in 0..options.trials {
        let env = random_environment(&mut rng, 2, &config);
        let corners = aux_corners(&env)?;
        let (q1, q2) = qmr_aux_points(&env)?;
        let feasible = aux_feasibility(&env, &corners.majority)?.feasible()
            && aux_feasibility(&env, &corners.unanimity)?.feasible();
        let sol = ratlp::solve(&aux_lp(&env)?).map_err(OptError::from)?;
        let lp_matches = sol.is_optimal() && &sol.objective_value == corners.best_value();
        let rule_values = welfare(&env, &QualifiedMajorityRule::new(1)) == corners.majority_value
            && welfare(&env, &QualifiedMajorityRule::new(2)) == corners.unanimity_value;
        if !(corners.majority == q1 && corners.unanimity == q2 && feasible && lp_matches && rule_values) {
            failures.push(format!("trial {trial}: values {}", env.values()));
        }
    }
    report.checks.push(Check::new(
        "relaxation corners are the majority and unanimity interims and the relaxation optimum is the better one",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} trials (seed {})", options.trials, options.seed)
        } else {
            failures.join("\n")
        },
    ));
    Ok(())
}

fn example1(report: &mut SuiteReport) -> Result<(), ExperimentError> {
    let fx = example1_fixture();
    let bic = check_bic(&fx.env, &fx.f);
    report.checks.push(Check::new("f is BIC", bic.is_bic(), String::new()));
    report
        .checks
        .push(Check::new("f is anonymous", fx.f.is_anonymous(), String::new()));
    let projection = ordinal_projection(&fx.env, &fx.f)?;
    report.notes.push(coalition_table(projection.rule.values()));
    report.checks.push(Check::new(
        "ordinal projection matches the expected table",
        projection.rule == fx.hat_f,
        String::new(),
    ));
    report.checks.push(Check::new(
        "ordinal projection is not anonymous",
        !projection.anonymous,
        format!(
            "phi({{1}}) = {}, phi({{2}}) = {}",
            exact(projection.rule.phi(0b01)),
            exact(projection.rule.phi(0b10))
        ),
    ));
    let direct = welfare(&fx.env, &fx.f);
    let projected = welfare(&fx.env, &projection.rule);
    report.checks.push(Check::new(
        "projection preserves welfare and the interim welfare identity holds",
        direct == projected && welfare_via_interims(&fx.env, &fx.f)? == direct,
        format!("W = {}", exact(&direct)),
    ));
    Ok(())
}

/// Two-agent coalition table: rows agent 1 (-, +), columns agent 2 (-, +).
fn coalition_table(phi: &[Rational]) -> String {
    format!(
        "           v2 < 0   v2 > 0\nv1 < 0   {:>8} {:>8}\nv1 > 0   {:>8} {:>8}",
        exact(&phi[0b00]),
        exact(&phi[0b10]),
        exact(&phi[0b01]),
        exact(&phi[0b11])
    )
}

fn ratio(n: usize, report: &mut SuiteReport) -> Result<(), ExperimentError> {
    let ms = [rat(10, 1), rat(100, 1), rat(1000, 1)];
    let rows = cardinal_ordinal_ratio_sweep(n, &ms)?;
    let mut table = format!("n = {n}\n{:<7} {:<12} {:<12} ratio", "M", "best QMR", "OPT");
    for row in &rows {
        table.push_str(&format!(
            "\n{:<7} {:<12} {:<12} {}",
            exact(&row.m),
            exact(&row.best_qmr),
            exact(&row.opt),
            annotated(&row.ratio)
        ));
    }
    report.notes.push(table);
    report.checks.push(Check::new(
        "OPT strictly above best QMR at every M",
        rows.iter().all(|r| r.opt > r.best_qmr),
        String::new(),
    ));
    // The closed form and the bound of 2 are only known for three agents.
    if n == 3 {
        report.checks.push(Check::new(
            "ratio equals 4M/(2M+1)",
            rows.iter().all(|r| r.closed_form.as_ref() == Some(&r.ratio)),
            String::new(),
        ));
        report.checks.push(Check::new(
            "ratios strictly increase and stay below 2",
            rows.windows(2).all(|w| w[0].ratio < w[1].ratio) && rows.iter().all(|r| r.ratio < rat(2, 1)),
            String::new(),
        ));
    }
    Ok(())
}
