//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use binvote::env::Environment;
use binvote::experiments::{
    cardinal_ordinal_ratio_sweep, compare, example1_fixture, family_conditions, make_fstar, make_theorem2_env,
    verify_lemma3, verify_proposition1, verify_theorem1, Theorem1Campaign,
};
use binvote::mechanism::{
    check_bic, ordinal_projection, qmr_best, welfare, welfare_via_interims, wmr_build, AnyMechanism,
    QualifiedMajorityRule,
};
use binvote::opt::{aux_corners, opt_value_by_enumeration, solve_opt};
use binvote::rational::{exact, rat, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratlp::{solve, vertex_enumerate, EnumerationGuard, LinearProgram, LpError, LpStatus};

type Outcome = Result<String, String>;

/// BIC rules met along the way; the interim welfare identity is checked on all of them.
#[derive(Default)]
struct Seen {
    rules: Vec<(String, Environment, AnyMechanism)>,
}

impl Seen {
    fn add(&mut self, label: impl Into<String>, env: &Environment, f: AnyMechanism) {
        self.rules.push((label.into(), env.clone(), f));
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion1(seen: &mut Seen) -> Outcome {
    let fx = example1_fixture();
    ensure(check_bic(&fx.env, &fx.f).is_bic(), || "f is not BIC".into())?;
    ensure(fx.f.is_anonymous(), || "f is not anonymous".into())?;
    let p = ordinal_projection(&fx.env, &fx.f).map_err(err)?;
    let blocks: Vec<String> = p.rule.values().iter().map(exact).collect();
    ensure(p.rule == fx.hat_f, || format!("projection blocks {blocks:?}"))?;
    ensure(!p.anonymous, || "projection reported anonymous".into())?;
    seen.add("fixture f", &fx.env, AnyMechanism::OrderedTable(fx.f.clone()));
    Ok(format!("hat-f blocks {blocks:?} (by coalition mask), not anonymous"))
}

fn criterion2(seen: &mut Seen) -> Outcome {
    let env = make_theorem2_env(3, rat(10, 1), Rational::zero()).map_err(err)?;
    let qmr = qmr_best(&env);
    ensure(qmr.best_welfare() == &rat(21, 8) && qmr.best_k == 3, || {
        format!("best QMR {} at k = {}", qmr.best_welfare(), qmr.best_k)
    })?;
    let fstar = make_fstar(3, &rat(10, 1)).map_err(err)?;
    let w_fstar = welfare(&env, &fstar);
    ensure(w_fstar == rat(5, 1), || format!("W(f*) = {w_fstar}"))?;
    let opt = solve_opt(&env).map_err(err)?;
    ensure(opt.welfare == rat(5, 1), || format!("simplex optimum {}", opt.welfare))?;
    ensure(opt.lp_stats.variables == 20, || {
        format!("{} LP variables", opt.lp_stats.variables)
    })?;
    let oracle = opt_value_by_enumeration(&env, EnumerationGuard::default()).map_err(err)?;
    ensure(oracle == rat(5, 1), || format!("enumeration optimum {oracle}"))?;
    seen.add("f* on the limit family", &env, AnyMechanism::Anonymous(fstar));
    seen.add(
        "optimum on the limit family",
        &env,
        AnyMechanism::Anonymous(opt.mechanism),
    );
    seen.add("best QMR on the limit family", &env, AnyMechanism::Qmr(qmr.best_rule()));
    Ok("best QMR 21/8 (k* = 3), W(f*) = 5, simplex 5, enumeration oracle 5".into())
}

fn criterion3(seen: &mut Seen) -> Outcome {
    let env = make_theorem2_env(3, rat(10, 1), rat(1, 1000)).map_err(err)?;
    let qmr = qmr_best(&env);
    let opt = solve_opt(&env).map_err(err)?;
    ensure(&opt.welfare > qmr.best_welfare(), || {
        format!("optimum {} vs best QMR {}", opt.welfare, qmr.best_welfare())
    })?;
    let gap = &opt.welfare - qmr.best_welfare();
    seen.add("optimum at eps = 1/1000", &env, AnyMechanism::Anonymous(opt.mechanism));
    Ok(format!(
        "optimum - best QMR = {} > 0",
        binvote::rational::annotated(&gap)
    ))
}

fn criterion4(campaign: &Theorem1Campaign, seen: &mut Seen) -> Outcome {
    ensure(campaign.trials.len() == 100, || {
        format!("{} trials", campaign.trials.len())
    })?;
    for t in &campaign.trials {
        let opt = t
            .opt_welfare
            .as_ref()
            .ok_or_else(|| format!("trial {}: {:?}", t.index, t.error))?;
        ensure(opt == t.best_qmr(), || {
            format!("trial {}: optimum {} vs {}", t.index, opt, t.best_qmr())
        })?;
        let corners = aux_corners(&t.env).map_err(err)?;
        ensure(corners.best_value() == opt, || {
            format!(
                "trial {}: relaxation corner {} vs {}",
                t.index,
                corners.best_value(),
                opt
            )
        })?;
        if let Some(f) = &t.opt_mechanism {
            seen.add(
                format!("two-agent trial {}", t.index),
                &t.env,
                AnyMechanism::Anonymous(f.clone()),
            );
        }
    }
    Ok(format!("100/100 exact equalities (seed {})", campaign.seed))
}

fn criterion5(campaign: &Theorem1Campaign, seen: &mut Seen) -> Outcome {
    for t in &campaign.trials {
        let r = t
            .lemma3
            .as_ref()
            .ok_or_else(|| format!("trial {}: no bound report", t.index))?;
        ensure(r.both_hold(), || format!("trial {}: {r:?}", t.index))?;
    }
    let extra = verify_lemma3(100, 11);
    for c in &extra.cases {
        ensure(c.passed(), || {
            format!("random vertex {}: {:?} {:?}", c.index, c.report, c.error)
        })?;
        if let Some(f) = &c.mechanism {
            seen.add(
                format!("random vertex {}", c.index),
                &c.env,
                AnyMechanism::Anonymous(f.clone()),
            );
        }
    }
    Ok("bounds hold on 100 optimal rules and 100 random vertices (seed 11)".into())
}

fn criterion6(seen: &mut Seen) -> Outcome {
    let campaign = verify_proposition1(20, 13);
    for c in &campaign.cases {
        ensure(c.passed(), || {
            format!(
                "case {} (n = {}): optimum {:?}, threshold {:?} at k = {:?}, best QMR {}; {:?}",
                c.index,
                c.env.n(),
                c.opt_welfare,
                c.threshold_welfare,
                c.k_bar,
                c.qmr_welfare,
                c.error
            )
        })?;
        if let Some(f) = &c.opt_mechanism {
            seen.add(
                format!("symmetric case {}", c.index),
                &c.env,
                AnyMechanism::Anonymous(f.clone()),
            );
        }
    }
    let sizes: Vec<usize> = campaign.cases.iter().map(|c| c.env.n()).collect();
    ensure((2..=5).all(|n| sizes.contains(&n)), || {
        format!("agent counts drawn: {sizes:?}")
    })?;
    Ok("20/20 symmetric environments, n in 2..=5 (seed 13)".into())
}

fn criterion7() -> Outcome {
    let rows = cardinal_ordinal_ratio_sweep(3, &[rat(10, 1), rat(100, 1), rat(1000, 1)]).map_err(err)?;
    let expected = [rat(40, 21), rat(400, 201), rat(4000, 2001)];
    for (row, want) in rows.iter().zip(&expected) {
        ensure(&row.ratio == want, || {
            format!("M = {}: ratio {} expected {}", row.m, row.ratio, want)
        })?;
        ensure(row.closed_form.as_ref() == Some(want), || {
            format!("M = {}: closed form mismatch", row.m)
        })?;
    }
    ensure(rows.windows(2).all(|w| w[0].ratio < w[1].ratio), || {
        "ratios not increasing".into()
    })?;
    ensure(rows.iter().all(|r| r.ratio < rat(2, 1)), || "a ratio reached 2".into())?;
    Ok("40/21 < 400/201 < 4000/2001 < 2".into())
}

fn criterion8(seen: &mut Seen) -> Outcome {
    let env = make_theorem2_env(3, rat(10, 1), Rational::zero()).map_err(err)?;
    let build = wmr_build(&env, rat(1, 2)).map_err(err)?;
    let weights: Vec<String> = build.rule.weights.iter().map(exact).collect();
    ensure(weights == ["110", "110", "2"], || format!("weights {weights:?}"))?;
    ensure(build.rule.quorum == rat(201, 1), || {
        format!("quorum {}", build.rule.quorum)
    })?;
    let mut profiles = 0;
    binvote::env::for_each_profile(env.n(), env.values().len(), |_| profiles += 1);
    ensure(profiles == 64, || format!("{profiles} profiles"))?;
    let w = welfare(&env, &build.rule);
    ensure(w == rat(5, 1), || format!("WMR welfare {w}"))?;
    let c = compare(&env, rat(1, 2)).map_err(err)?;
    ensure(c.opt_over_wmr == Some(rat(1, 1)), || {
        format!("OPT/WMR {:?}", c.opt_over_wmr)
    })?;
    seen.add("WMR on the limit family", &env, AnyMechanism::Wmr(build.rule));
    Ok("weights (110, 110, 2), quorum 201, welfare 5, OPT/WMR = 1".into())
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=6);
    let mut lp = LinearProgram::new(n);
    let ints =
        |rng: &mut ChaCha8Rng, den: i64| -> Vec<Rational> { (0..n).map(|_| rat(rng.gen_range(-5..=5), den)).collect() };
    let objective = ints(rng, 1);
    lp.set_objective(objective);
    for j in 0..n {
        let lo = rng.gen_range(0..=1);
        let width = rng.gen_range(1..=3);
        lp.set_bounds(j, rat(lo, 1), Some(rat(lo + width, 2)));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let coeffs = ints(rng, 1);
        lp.add_eq(coeffs, rat(rng.gen_range(-4..=6), 1));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let coeffs = ints(rng, 2);
        lp.add_le(coeffs, rat(rng.gen_range(-4..=8), 1));
    }
    lp
}

fn beale() -> LinearProgram {
    let mut lp = LinearProgram::new(4);
    lp.set_objective(vec![rat(3, 4), rat(-20, 1), rat(1, 2), rat(-6, 1)]);
    lp.add_le(vec![rat(1, 4), rat(-8, 1), rat(-1, 1), rat(9, 1)], Rational::zero());
    lp.add_le(vec![rat(1, 2), rat(-12, 1), rat(-1, 2), rat(3, 1)], Rational::zero());
    lp.add_le(vec![rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1)], rat(1, 1));
    lp
}

fn criterion9(seen: &Seen) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut agreed, mut optimal) = (0, 0);
    while agreed < 50 {
        let lp = random_lp(&mut rng);
        let slow = match vertex_enumerate(&lp, EnumerationGuard::default()) {
            Ok(s) => s,
            Err(LpError::GuardExceeded { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        let fast = solve(&lp).map_err(err)?;
        ensure(fast.status == slow.status, || {
            format!("LP {agreed}: {} vs {}", fast.status, slow.status)
        })?;
        if fast.is_optimal() {
            ensure(fast.objective_value == slow.objective_value, || {
                format!("LP {agreed}: {} vs {}", fast.objective_value, slow.objective_value)
            })?;
            optimal += 1;
        }
        agreed += 1;
    }
    let cycling = solve(&beale()).map_err(err)?;
    ensure(
        cycling.status == LpStatus::Optimal && cycling.objective_value == rat(5, 4),
        || format!("cycling fixture gave {} {}", cycling.status, cycling.objective_value),
    )?;
    for (label, env, f) in &seen.rules {
        ensure(check_bic(env, f).is_bic(), || format!("{label}: not BIC"))?;
        let direct = welfare(env, f);
        let via = welfare_via_interims(env, f).map_err(err)?;
        ensure(direct == via, || format!("{label}: {direct} vs {via}"))?;
    }
    Ok(format!(
        "50 random LPs agree ({optimal} optimal), cycling fixture terminates at 5/4, identity on {} BIC rules",
        seen.rules.len()
    ))
}

fn criterion10(seen: &mut Seen) -> Outcome {
    let m = rat(10, 1);
    let (first, second) = family_conditions(4, &m);
    ensure(first.is_negative() && second.is_positive(), || {
        format!("conditions {first}, {second}")
    })?;
    let env = make_theorem2_env(4, m.clone(), Rational::zero()).map_err(err)?;
    let fstar = make_fstar(4, &m).map_err(err)?;
    ensure(check_bic(&env, &fstar).is_bic(), || "f* is not BIC".into())?;
    let opt = solve_opt(&env).map_err(err)?.welfare;
    let w_fstar = welfare(&env, &fstar);
    let w_unanimity = welfare(&env, &QualifiedMajorityRule::new(4));
    ensure(opt >= w_fstar && w_fstar > w_unanimity, || {
        format!("optimum {opt}, W(f*) {w_fstar}, W(f^(4)) {w_unanimity}")
    })?;
    seen.add("f* with four agents", &env, AnyMechanism::Anonymous(fstar));
    Ok(format!("optimum {opt} >= W(f*) {w_fstar} > W(f^(4)) {w_unanimity}"))
}

struct Criterion {
    number: usize,
    title: &'static str,
    limit: Option<Duration>,
}

fn report(c: &Criterion, outcome: Outcome, elapsed: Duration) -> bool {
    let over = c.limit.is_some_and(|l| elapsed > l);
    let (passed, detail) = match outcome {
        Ok(d) if over => (false, format!("{d}; took {elapsed:.2?}, limit {:?}", c.limit.unwrap())),
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!(
        "{} criterion {:>2}: {} [{elapsed:.2?}] {detail}",
        if passed { "PASS" } else { "FAIL" },
        c.number,
        c.title
    );
    passed
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            number: 1,
            title: "non-anonymous projection fixture",
            limit: Some(Duration::from_secs(1)),
        },
        Criterion {
            number: 2,
            title: "limit family headline numbers",
            limit: Some(Duration::from_secs(10)),
        },
        Criterion {
            number: 3,
            title: "strict cardinal gap at eps = 1/1000",
            limit: Some(Duration::from_secs(30)),
        },
        Criterion {
            number: 4,
            title: "two-agent campaign",
            limit: Some(Duration::from_secs(60)),
        },
        Criterion {
            number: 5,
            title: "influence bounds",
            limit: None,
        },
        Criterion {
            number: 6,
            title: "symmetric threshold campaign",
            limit: None,
        },
        Criterion {
            number: 7,
            title: "ratio sweep",
            limit: None,
        },
        Criterion {
            number: 8,
            title: "weighted majority benchmark",
            limit: None,
        },
        Criterion {
            number: 9,
            title: "solver integrity",
            limit: None,
        },
        Criterion {
            number: 10,
            title: "four-agent family",
            limit: None,
        },
    ];
    let mut seen = Seen::default();
    let mut all = true;
    let timed = |f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed())
    };

    let (o, t) = timed(&mut || criterion1(&mut seen));
    all &= report(&criteria[0], o, t);
    let (o, t) = timed(&mut || criterion2(&mut seen));
    all &= report(&criteria[1], o, t);
    let (o, t) = timed(&mut || criterion3(&mut seen));
    all &= report(&criteria[2], o, t);

    let start = Instant::now();
    let campaign = verify_theorem1(100, 7);
    let o = criterion4(&campaign, &mut seen);
    all &= report(&criteria[3], o, start.elapsed());

    let (o, t) = timed(&mut || criterion5(&campaign, &mut seen));
    all &= report(&criteria[4], o, t);
    let (o, t) = timed(&mut || criterion6(&mut seen));
    all &= report(&criteria[5], o, t);
    let (o, t) = timed(&mut criterion7);
    all &= report(&criteria[6], o, t);
    let (o, t) = timed(&mut || criterion8(&mut seen));
    all &= report(&criteria[7], o, t);
    // Runs last among the mechanism criteria so every rule seen so far is covered.
    let (o, t) = timed(&mut || criterion10(&mut seen));
    let tenth = (o, t);
    let (o, t) = timed(&mut || criterion9(&seen));
    all &= report(&criteria[8], o, t);
    all &= report(&criteria[9], tenth.0, tenth.1);

    if all {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
