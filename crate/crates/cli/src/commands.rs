use std::fmt;
use std::path::Path;

use binvote::env::Environment;
use binvote::experiments::{self, run_suite, SuiteName, SuiteOptions};
use binvote::io::{
    anonymous_allocations, interims_value, mechanism_to_value, parse_environment, parse_mechanism, rational_value,
};
use binvote::mechanism::{
    check_bic, ordinal_projection, qmr_best, symmetric_threshold, welfare, welfare_via_interims, wmr_build,
    AnyMechanism, InterimProfile, Mechanism, OrderedTable,
};
use binvote::opt::solve_opt;
use binvote::rational::{annotated, exact, parse_rational, percent, rat, Rational};
use serde_json::{json, Value};

use crate::render::{coalition_name, columns, kv};
use crate::{EnvArgs, FamilyArgs};

/// Largest agent count or support size accepted without `--force-large`.
const LARGE: usize = 8;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

fn failed(e: impl fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

pub struct Output {
    pub json: Value,
    pub table: String,
    /// False when an asserted property did not hold.
    pub passed: bool,
}

impl Output {
    fn report(json: Value, table: String) -> Self {
        Self {
            json,
            table,
            passed: true,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::Input(format!("{}: file is empty", path.display())));
    }
    Ok(text)
}

fn load_env(args: &EnvArgs, guarded: bool) -> Result<Environment, CliError> {
    let env =
        parse_environment(&read(&args.path)?).map_err(|e| CliError::Input(format!("{}: {e}", args.path.display())))?;
    if guarded && !args.force_large && (env.n() > LARGE || env.values().len() > LARGE) {
        return Err(CliError::Input(format!(
            "{} agents over {} values exceeds the limit of {LARGE}; pass --force-large to solve anyway",
            env.n(),
            env.values().len()
        )));
    }
    Ok(env)
}

fn load_mech(path: &Path, env: &Environment) -> Result<AnyMechanism, CliError> {
    parse_mechanism(&read(path)?, env).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn rational_arg(name: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

fn interim_table(env: &Environment, interims: &InterimProfile) -> String {
    let values: Vec<String> = env.values().values().iter().map(exact).collect();
    let mut header = vec!["agent"];
    header.extend(values.iter().map(String::as_str));
    header.extend(["c-", "c+"]);
    let rows: Vec<Vec<String>> = (0..env.n())
        .map(|i| {
            let mut row = vec![(i + 1).to_string()];
            row.extend((0..values.len()).map(|v| exact(interims.get(i, v))));
            match interims.flat(env, i) {
                Some((lo, hi)) => row.extend([exact(&lo), exact(&hi)]),
                None => row.extend(["-".to_string(), "-".to_string()]),
            }
            row
        })
        .collect();
    columns(&header, &rows)
}

pub fn solve(args: &EnvArgs) -> Result<Output, CliError> {
    let env = load_env(args, true)?;
    let report = solve_opt(&env).map_err(failed)?;
    let m = AnyMechanism::Anonymous(report.mechanism.clone());
    let stats = &report.lp_stats;
    let json = json!({
        "welfare": rational_value(&report.welfare),
        "mechanism": mechanism_to_value(&m, &env),
        "interims": interims_value(&env, &report.interims),
        "lp": {
            "variables": stats.variables,
            "equality_rows": stats.equality_rows,
            "inequality_rows": stats.inequality_rows,
            "pivots": stats.pivots,
        },
    });
    let nonzero = anonymous_allocations(&report.mechanism, &env, true);
    let rows: Vec<Vec<String>> = nonzero
        .iter()
        .map(|(k, v)| vec![k.clone(), v.as_str().unwrap_or_default().to_string()])
        .collect();
    let mut table = kv("welfare", &report.welfare);
    table.push_str(&format!(
        "\nnonzero allocations ({} of {} multisets)\n",
        rows.len(),
        report.mechanism.index().len()
    ));
    table.push_str(&columns(&["reports", "Pr(Reform)"], &rows));
    table.push_str("\ninterim allocations\n");
    table.push_str(&interim_table(&env, &report.interims));
    table.push_str(&format!(
        "\nLP: {} variables, {} equality rows, {} inequality rows, {} pivots\n",
        stats.variables, stats.equality_rows, stats.inequality_rows, stats.pivots
    ));
    Ok(Output::report(json, table))
}

fn ratio_json(r: &Option<Rational>) -> Value {
    match r {
        Some(r) => json!({ "exact": exact(r), "decimal": binvote::rational::decimal(r), "percent": percent(r) }),
        None => Value::Null,
    }
}

fn ratio_text(r: &Option<Rational>) -> String {
    match r {
        Some(r) => format!("{} ({})", exact(r), percent(r)),
        None => "undefined (WMR welfare is 0)".to_string(),
    }
}

pub fn compare(args: &EnvArgs, tie: &str) -> Result<Output, CliError> {
    let env = load_env(args, true)?;
    let tie = rational_arg("tie", tie)?;
    let c = experiments::compare(&env, tie).map_err(|e| match e {
        experiments::ExperimentError::Mechanism(m) => CliError::Input(m.to_string()),
        other => failed(other),
    })?;
    let qmr_over_opt = (c.opt_welfare != rat(0, 1)).then(|| c.qmr.best_welfare() / &c.opt_welfare);
    let json = json!({
        "best_qmr": { "k": c.qmr.best_k, "welfare": rational_value(c.qmr.best_welfare()) },
        "opt": rational_value(&c.opt_welfare),
        "wmr": rational_value(&c.wmr_welfare),
        "qmr_over_opt": ratio_json(&qmr_over_opt),
        "qmr_over_wmr": ratio_json(&c.qmr_over_wmr),
        "opt_over_wmr": ratio_json(&c.opt_over_wmr),
        "ratios_flagged": c.ratios_flagged(),
        "undefined_agents": c.wmr.undefined_agents.iter().map(|i| i + 1).collect::<Vec<_>>(),
    });
    let mut table = kv(&format!("best QMR (k={})", c.qmr.best_k), c.qmr.best_welfare());
    table.push_str(&kv("OPT", &c.opt_welfare));
    table.push_str(&kv("WMR", &c.wmr_welfare));
    if let Some(r) = &qmr_over_opt {
        table.push_str(&format!("{:<18}{} ({})\n", "QMR/OPT", exact(r), percent(r)));
    }
    table.push_str(&format!("{:<18}{}\n", "QMR/WMR", ratio_text(&c.qmr_over_wmr)));
    table.push_str(&format!("{:<18}{}\n", "OPT/WMR", ratio_text(&c.opt_over_wmr)));
    if c.ratios_flagged() {
        let agents: Vec<String> = c.wmr.undefined_agents.iter().map(|i| (i + 1).to_string()).collect();
        table.push_str(&format!(
            "warning: WMR ratios are flagged, conditional means undefined for agent(s) {} (taken as 0)\n",
            agents.join(", ")
        ));
    }
    Ok(Output::report(json, table))
}

fn projection_section(env: &Environment, m: &AnyMechanism) -> (Value, String) {
    match ordinal_projection(env, m) {
        Ok(p) => {
            let n = env.n();
            let rows: Vec<Vec<String>> = p
                .rule
                .values()
                .iter()
                .enumerate()
                .map(|(mask, v)| vec![coalition_name(mask, n), annotated(v)])
                .collect();
            let by_coalition: serde_json::Map<String, Value> = p
                .rule
                .values()
                .iter()
                .enumerate()
                .map(|(mask, v)| (coalition_name(mask, n), Value::String(exact(v))))
                .collect();
            let json = json!({ "phi": by_coalition, "anonymous": p.anonymous });
            let mut table = columns(&["coalition", "phi"], &rows);
            table.push_str(&format!("anonymous: {}\n", if p.anonymous { "yes" } else { "no" }));
            (json, table)
        }
        Err(e) => (json!({ "error": e.to_string() }), format!("not computable: {e}\n")),
    }
}

pub fn check(args: &EnvArgs, mech: &Path) -> Result<Output, CliError> {
    let env = load_env(args, false)?;
    let m = load_mech(mech, &env)?;
    compatible(&m, &env)?;
    let anonymous = match &m {
        AnyMechanism::OrderedTable(t) => t.is_anonymous(),
        AnyMechanism::Anonymous(_) => true,
        other => OrderedTable::tabulate(&env, other).is_anonymous(),
    };
    let bic = check_bic(&env, &m);
    let w = welfare(&env, &m);
    let via = if bic.is_bic() {
        Some(welfare_via_interims(&env, &m).map_err(failed)?)
    } else {
        None
    };
    let (hat_json, hat_table) = projection_section(&env, &m);
    let json = json!({
        "kind": m.kind(),
        "anonymous": anonymous,
        "bic": bic.is_bic(),
        "violation": bic.violation.as_ref().map(|v| v.to_string()),
        "welfare": rational_value(&w),
        "welfare_via_interims": via.as_ref().map(rational_value),
        "interims": interims_value(&env, &bic.interims),
        "hat_f": hat_json,
    });
    let mut table = format!("kind              {}\n", m.kind());
    table.push_str(&format!("anonymous         {}\n", if anonymous { "yes" } else { "no" }));
    match &bic.violation {
        None => table.push_str("BIC               yes\n"),
        Some(v) => table.push_str(&format!("BIC               no: {v}\n")),
    }
    table.push_str(&kv("welfare", &w));
    table.push_str("\ninterim allocations\n");
    table.push_str(&interim_table(&env, &bic.interims));
    table.push_str("\nordinal projection\n");
    table.push_str(&hat_table);
    Ok(Output::report(json, table))
}

pub fn hatf(args: &EnvArgs, mech: &Path) -> Result<Output, CliError> {
    let env = load_env(args, false)?;
    let m = load_mech(mech, &env)?;
    compatible(&m, &env)?;
    let p = ordinal_projection(&env, &m).map_err(|e| CliError::Input(e.to_string()))?;
    let (json, table) = projection_section(&env, &m);
    let bic = check_bic(&env, &p.rule).is_bic();
    let json = json!({ "hat_f": json, "bic": bic, "welfare": rational_value(&welfare(&env, &p.rule)) });
    Ok(Output::report(json, table))
}

pub fn qmr(args: &EnvArgs) -> Result<Output, CliError> {
    let env = load_env(args, false)?;
    let t = qmr_best(&env);
    let rows: Vec<Vec<String>> = t
        .welfare
        .iter()
        .enumerate()
        .map(|(k, w)| {
            vec![
                k.to_string(),
                annotated(w),
                if k == t.best_k { "*".into() } else { String::new() },
            ]
        })
        .collect();
    let mut table = columns(&["k", "welfare", "best"], &rows);
    let mut json = json!({
        "welfare": t.welfare.iter().map(rational_value).collect::<Vec<_>>(),
        "best_k": t.best_k,
        "best_welfare": rational_value(t.best_welfare()),
    });
    if env.is_symmetric() {
        match symmetric_threshold(&env) {
            Ok(s) => {
                table.push_str(&format!(
                    "closed-form threshold k = {} (boundary {}{})\n",
                    s.k_bar,
                    exact(&s.boundary),
                    if s.tie { ", tie" } else { "" }
                ));
                json["threshold"] = json!({ "k_bar": s.k_bar, "boundary": exact(&s.boundary), "tie": s.tie });
            }
            Err(e) => table.push_str(&format!("closed-form threshold unavailable: {e}\n")),
        }
    }
    Ok(Output::report(json, table))
}

pub fn wmr(args: &EnvArgs, tie: &str) -> Result<Output, CliError> {
    let env = load_env(args, false)?;
    let tie = rational_arg("tie", tie)?;
    let b = wmr_build(&env, tie).map_err(|e| CliError::Input(e.to_string()))?;
    let w = welfare(&env, &b.rule);
    let json = json!({
        "mechanism": mechanism_to_value(&AnyMechanism::Wmr(b.rule.clone()), &env),
        "welfare": rational_value(&w),
        "undefined_agents": b.undefined_agents.iter().map(|i| i + 1).collect::<Vec<_>>(),
    });
    let rows: Vec<Vec<String>> = b
        .rule
        .weights
        .iter()
        .enumerate()
        .map(|(i, w)| vec![(i + 1).to_string(), annotated(w)])
        .collect();
    let mut table = columns(&["agent", "weight"], &rows);
    table.push_str(&kv("quorum", &b.rule.quorum));
    table.push_str(&kv("tie", &b.rule.tie_value));
    table.push_str(&kv("welfare", &w));
    if b.is_flagged() {
        let agents: Vec<String> = b.undefined_agents.iter().map(|i| (i + 1).to_string()).collect();
        table.push_str(&format!(
            "warning: undefined conditional means for agent(s) {}, taken as 0\n",
            agents.join(", ")
        ));
    }
    Ok(Output::report(json, table))
}

fn family(args: &FamilyArgs) -> Result<(Rational, Rational), CliError> {
    Ok((rational_arg("M", &args.m)?, rational_arg("eps", &args.eps)?))
}

fn experiment_error(e: experiments::ExperimentError) -> CliError {
    use experiments::ExperimentError as E;
    match e {
        E::TooFewAgents(_) | E::UnanimityCondition(_) | E::ImprovementCondition(_) | E::EpsilonOutOfRange(_) => {
            CliError::Input(e.to_string())
        }
        other => failed(other),
    }
}

pub fn verify(suite: &str, seed: u64, trials: usize, args: &FamilyArgs) -> Result<Output, CliError> {
    let suite: SuiteName = suite.parse().map_err(CliError::Input)?;
    if trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let (m, eps) = family(args)?;
    let options = SuiteOptions {
        seed,
        trials,
        n: args.n,
        m,
        eps,
    };
    let report = run_suite(suite, &options).map_err(experiment_error)?;
    let json = serde_json::to_value(&report).map_err(failed)?;
    let mut table = String::new();
    for note in &report.notes {
        table.push_str(note);
        table.push_str("\n\n");
    }
    for c in &report.checks {
        table.push_str(&format!("{} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name));
        if !c.detail.is_empty() {
            for line in c.detail.lines() {
                table.push_str(&format!("     {line}\n"));
            }
        }
    }
    let passed = report.passed();
    table.push_str(&format!("{suite}: {}\n", if passed { "pass" } else { "FAIL" }));
    Ok(Output { json, table, passed })
}

pub fn demo_theorem2(args: &FamilyArgs) -> Result<Output, CliError> {
    let (m, eps) = family(args)?;
    let demo = experiments::run_theorem2_demo(args.n, m, eps).map_err(experiment_error)?;
    let ratio = demo.ratio();
    let json = json!({
        "n": demo.family.n,
        "M": exact(&demo.family.m),
        "eps": exact(&demo.family.eps),
        "best_qmr": { "k": demo.qmr.best_k, "welfare": rational_value(demo.best_qmr_welfare()) },
        "opt": rational_value(&demo.opt_welfare),
        "fstar": demo.fstar_welfare.as_ref().map(rational_value),
        "wmr": rational_value(&demo.wmr_welfare),
        "opt_over_best_qmr": ratio.as_ref().map(rational_value),
        "strict_gap": demo.strict_gap(),
    });
    let mut table = format!(
        "n = {}, M = {}, eps = {}\n",
        demo.family.n,
        exact(&demo.family.m),
        exact(&demo.family.eps)
    );
    table.push_str(&kv(
        &format!("best QMR (k={})", demo.qmr.best_k),
        demo.best_qmr_welfare(),
    ));
    table.push_str(&kv("OPT", &demo.opt_welfare));
    if let Some(w) = &demo.fstar_welfare {
        table.push_str(&kv("f*", w));
    }
    table.push_str(&kv("WMR", &demo.wmr_welfare));
    if let Some(r) = &ratio {
        table.push_str(&kv("OPT/QMR", r));
    }
    table.push_str(&format!(
        "strict gap        {}\n",
        if demo.strict_gap() { "yes" } else { "no" }
    ));
    // At eps = 0 the gap is guaranteed by f*, so its absence is a failure.
    let passed = demo.strict_gap() || demo.family.eps != rat(0, 1);
    Ok(Output { json, table, passed })
}

fn compatible(m: &AnyMechanism, env: &Environment) -> Result<(), CliError> {
    m.check_compatible(env).map_err(|e| CliError::Input(e.to_string()))
}
