use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn binvote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binvote"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = binvote(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn solve_gamma0() {
    let env = data("gamma0.json");
    let out = binvote(&["solve", "--env", path(&env)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("welfare           5\n"), "{text}");
    assert!(text.contains("nonzero allocations"));
    assert!(!text.contains("  0\n"), "table mode hides zero entries:\n{text}");

    let v = json(&["solve", "--env", path(&env)]);
    assert_eq!(v["welfare"]["exact"], "5");
    assert_eq!(v["mechanism"]["allocations"].as_object().unwrap().len(), 20);
    assert_eq!(v["lp"]["variables"], 20);
    assert_eq!(v["interims"][2]["c_minus"]["exact"], "1/4");
}

#[test]
fn solve_example1_matches_best_qmr() {
    let env = data("example1.json");
    let opt = json(&["solve", "--env", path(&env)]);
    let qmr = json(&["qmr", "--env", path(&env)]);
    assert_eq!(opt["welfare"]["exact"], "1/4");
    assert_eq!(qmr["best_welfare"]["exact"], "1/4");
    assert_eq!(qmr["best_k"], 2);
}

#[test]
fn input_errors_exit_2() {
    let empty = temp_file("");
    let out = binvote(&["solve", "--env", path(empty.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    let broken = temp_file("{\n  \"values\": [1, -1],\n  \"agents\": [\n");
    let out = binvote(&["solve", "--env", path(broken.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let out = binvote(&["solve", "--env", "/nonexistent/env.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = binvote(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theorem1"));

    let out = binvote(&["compare", "--env", path(&data("gamma0.json")), "--tie", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = binvote(&["demo-theorem2", "--M", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_mechanism_is_an_input_error() {
    let out = binvote(&[
        "check",
        "--env",
        path(&data("example1.json")),
        "--mech",
        path(&data("fstar.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn large_environments_need_the_override() {
    let agent = r#"{"probs": {"-1": "1/2", "1": "1/2"}}"#;
    let text = format!(r#"{{"values": ["-1", "1"], "agents": [{}]}}"#, [agent; 9].join(","));
    let env = temp_file(&text);
    let out = binvote(&["solve", "--env", path(env.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force-large"));

    let v = json(&["solve", "--env", path(env.path()), "--force-large"]);
    assert_eq!(v["lp"]["variables"], 10);
}

#[test]
fn compare_gamma0() {
    let env = data("gamma0.json");
    let v = json(&["compare", "--env", path(&env)]);
    assert_eq!(v["best_qmr"]["welfare"]["exact"], "21/8");
    assert_eq!(v["qmr_over_opt"]["exact"], "21/40");
    assert_eq!(v["qmr_over_wmr"]["exact"], "21/40");
    assert_eq!(v["opt_over_wmr"]["exact"], "1");
    assert_eq!(v["ratios_flagged"], false);

    let text = stdout(&binvote(&["compare", "--env", path(&env)]));
    assert!(text.contains("OPT/WMR           1 (100.00%)"), "{text}");
    assert!(!text.contains("warning"), "{text}");
}

#[test]
fn compare_flags_undefined_conditional_means() {
    let env = data("one_sided.json");
    let v = json(&["compare", "--env", path(&env)]);
    assert_eq!(v["ratios_flagged"], true);
    assert_eq!(v["undefined_agents"], serde_json::json!([1]));
    let text = stdout(&binvote(&["compare", "--env", path(&env)]));
    assert!(text.contains("warning: WMR ratios are flagged"), "{text}");
}

#[test]
fn compare_near_the_limit() {
    let v = json(&["compare", "--env", path(&data("gamma_eps.json"))]);
    assert_eq!(v["wmr"]["exact"], "9937/2000");
    assert_eq!(v["ratios_flagged"], false);
    let r: f64 = v["opt_over_wmr"]["decimal"].as_str().unwrap().parse().unwrap();
    assert!((r - 0.978210548009345).abs() < 1e-6, "{r}");
}

#[test]
fn compare_symmetric_qmr_equals_opt() {
    let agent = r#"{"probs": {"-3": "1/4", "-1": "1/4", "2": "1/3", "5": "1/6"}}"#;
    let env = temp_file(&format!(
        r#"{{"values": ["-3", "-1", "2", "5"], "agents": [{agent}, {agent}, {agent}]}}"#
    ));
    let v = json(&["compare", "--env", path(env.path())]);
    assert_eq!(v["qmr_over_opt"]["exact"], "1");
}

#[test]
fn check_example1() {
    let env = data("example1.json");
    let mech = data("example1_f.json");
    let text = stdout(&binvote(&["check", "--env", path(&env), "--mech", path(&mech)]));
    assert!(text.contains("anonymous         yes"), "{text}");
    assert!(text.contains("BIC               yes"), "{text}");
    assert!(text.contains("anonymous: no"), "{text}");

    let v = json(&["hatf", "--env", path(&env), "--mech", path(&mech)]);
    assert_eq!(v["hat_f"]["anonymous"], false);
    let phi = &v["hat_f"]["phi"];
    assert_eq!(phi["{}"], "7/12");
    assert_eq!(phi["{1}"], "1/3");
    assert_eq!(phi["{2}"], "1/4");
    assert_eq!(phi["{1,2}"], "1");
}

#[test]
fn check_fstar() {
    let v = json(&[
        "check",
        "--env",
        path(&data("gamma0.json")),
        "--mech",
        path(&data("fstar.json")),
    ]);
    assert_eq!(v["bic"], true);
    assert_eq!(v["welfare"]["exact"], "5");
    assert_eq!(v["welfare_via_interims"]["exact"], "5");
}

#[test]
fn check_edited_fstar_near_the_limit() {
    let eps_env = data("gamma_eps.json");
    let full = json(&["check", "--env", path(&eps_env), "--mech", path(&data("fstar.json"))]);
    let text = std::fs::read_to_string(data("fstar.json")).unwrap();
    let edited = temp_file(&text.replace("\"-1,10,10\": \"1\",", ""));
    let cut = json(&["check", "--env", path(&eps_env), "--mech", path(edited.path())]);

    // Exact interims: agent 1 gets 499/500000 at -100 but 0 at -1.
    assert_eq!(cut["bic"], false);
    assert_eq!(cut["interims"][0]["by_report"]["-100"], "499/500000");
    assert_eq!(cut["interims"][0]["by_report"]["-1"], "0");
    assert!(cut["violation"].as_str().unwrap().contains("negative reports not flat"));
    assert!(cut["welfare_via_interims"].is_null());
    let w = |v: &Value| v["welfare"]["decimal"].as_str().unwrap().parse::<f64>().unwrap();
    assert!(w(&cut) < w(&full));
}

#[test]
fn non_bic_check_still_exits_0() {
    let out = binvote(&[
        "check",
        "--env",
        path(&data("gamma_eps.json")),
        "--mech",
        path(&data("fstar.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("BIC               no: agent 1"));
}

#[test]
fn qmr_and_wmr_on_gamma0() {
    let env = data("gamma0.json");
    let q = json(&["qmr", "--env", path(&env)]);
    let w: Vec<&str> = q["welfare"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["exact"].as_str().unwrap())
        .collect();
    assert_eq!(w, ["-90", "-519/8", "-69/4", "21/8", "0"]);
    assert_eq!(q["best_k"], 3);

    let v = json(&["wmr", "--env", path(&env)]);
    assert_eq!(v["mechanism"]["weights"], serde_json::json!(["110", "110", "2"]));
    assert_eq!(v["mechanism"]["quorum"], "201");
    assert_eq!(v["welfare"]["exact"], "5");
    assert_eq!(v["undefined_agents"], serde_json::json!([]));
}

#[test]
fn emitted_mechanisms_round_trip() {
    let env = data("gamma_eps.json");
    let solved = json(&["solve", "--env", path(&env)]);
    let mech = temp_file(&solved["mechanism"].to_string());
    let checked = json(&["check", "--env", path(&env), "--mech", path(mech.path())]);
    assert_eq!(checked["bic"], true);
    assert_eq!(checked["welfare"], solved["welfare"]);
    assert_eq!(checked["interims"], solved["interims"]);

    let wmr = json(&["wmr", "--env", path(&env)]);
    let mech = temp_file(&wmr["mechanism"].to_string());
    let checked = json(&["check", "--env", path(&env), "--mech", path(mech.path())]);
    assert_eq!(checked["welfare"], wmr["welfare"]);
}

#[test]
fn verify_theorem1() {
    let out = binvote(&["verify", "theorem1", "--trials", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).ends_with("theorem1: pass\n"));
}

#[test]
fn verify_example1_prints_the_table() {
    let out = binvote(&["verify", "example1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("7/12"));
}

#[test]
fn verify_theorem2_near_the_limit() {
    let out = binvote(&["verify", "theorem2", "--n", "3", "--M", "10", "--eps", "1/1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v = json(&["verify", "theorem2", "--n", "3", "--M", "10", "--eps", "1/1000"]);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_remaining_suites() {
    for suite in ["lemma3", "aux", "ratio"] {
        let out = binvote(&["verify", suite, "--trials", "20"]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", stdout(&out));
    }
    let out = binvote(&["verify", "ratio", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("21/11"), "{}", stdout(&out));
}

#[test]
fn demo_theorem2() {
    let v = json(&["demo-theorem2"]);
    assert_eq!(v["best_qmr"]["welfare"]["exact"], "21/8");
    assert_eq!(v["opt"]["exact"], "5");
    assert_eq!(v["fstar"]["exact"], "5");
    assert_eq!(v["strict_gap"], true);

    let v = json(&["demo-theorem2", "--eps", "1/1000"]);
    assert_eq!(v["best_qmr"]["welfare"]["exact"], "10491/4000");
    assert_eq!(v["strict_gap"], true);
    assert!(v["fstar"].is_null());
}
