//! End-to-end tests against the built binary: exit codes, error classes,
//! output formats, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cepshed")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../workloads").join(name)
}

/// Two types, one two-step query, no expected_matches: unit rates over a
/// window of 2 put the analytic any-match estimate at exactly 1.0.
fn pair_workload(semantics: &str, expected_matches: Option<f64>) -> Value {
    let mut query = json!({
        "name": "P",
        "pattern": ["A", "B"],
        "window": 2.0,
        "utility_weight": 1.0,
        "cpu_cost_per_match": 1.0
    });
    if let Some(n) = expected_matches {
        query["expected_matches"] = json!(n);
    }
    json!({
        "event_types": [
            { "name": "A", "arrival_rate": 1.0, "memory_cost": 1.0 },
            { "name": "B", "arrival_rate": 1.0, "memory_cost": 1.0 }
        ],
        "queries": [query],
        "budgets": { "memory": 2.0 },
        "semantics": semantics
    })
}

fn write_json(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

#[test]
fn estimate_fills_the_analytic_rate_exactly() {
    let dir = TempDir::new().unwrap();
    let wl = write_json(&dir, "wl.json", &pair_workload("any_match", None));
    let out = run(&["estimate", "--workload", wl.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["queries"][0]["expected_matches"], json!(1.0));
}

#[test]
fn estimate_leaves_a_complete_workload_unchanged() {
    let path = fixture("memory.json");
    let first = run(&["estimate", "--workload", path.to_str().unwrap()]);
    let second = run(&["estimate", "--workload", path.to_str().unwrap()]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout, "reruns must be byte-identical");
    let emitted: Value = serde_json::from_str(&stdout(&first)).unwrap();
    let original: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(emitted, original);
}

#[test]
fn estimate_samples_next_match_deterministically() {
    let dir = TempDir::new().unwrap();
    let wl = write_json(&dir, "wl.json", &pair_workload("next_match", None));
    let first = run(&["estimate", "--workload", wl.to_str().unwrap(), "--seed", "9"]);
    let second = run(&["estimate", "--workload", wl.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_str(&stdout(&first)).unwrap();
    let n = v["queries"][0]["expected_matches"].as_f64().unwrap();
    // Next-match pairs off events, so the rate lands strictly under the
    // any-match rate of 1.0 but stays positive on a long stream.
    assert!(n > 0.0 && n < 1.0, "sampled rate {n}");
}

#[test]
fn estimate_names_an_undeclared_pattern_type() {
    let dir = TempDir::new().unwrap();
    let mut wl = pair_workload("any_match", None);
    wl["queries"][0]["pattern"] = json!(["A", "Z"]);
    let path = write_json(&dir, "wl.json", &wl);
    let out = run(&["estimate", "--workload", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.starts_with("error[parse]:"), "{err}");
    assert!(err.contains("`Z`"), "{err}");
}

#[test]
fn plan_brute_recovers_the_known_memory_optimum() {
    let out = run(&[
        "plan",
        "--workload",
        fixture("memory.json").to_str().unwrap(),
        "--variant",
        "imls",
        "--algorithm",
        "brute",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for (name, kept) in [("A", true), ("B", false), ("C", true), ("D", false), ("E", true)] {
        assert_eq!(v["keep_event"][name], json!(kept), "event {name}");
    }
    assert_eq!(v["evaluation"]["expected_utility"], json!(6.0));
    assert_eq!(v["guarantee"]["kind"], json!("exact"));
}

#[test]
fn plan_defaults_to_the_variant_flagship_algorithm() {
    let out = run(&[
        "plan",
        "--workload",
        fixture("memory.json").to_str().unwrap(),
        "--variant",
        "imls",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["algorithm"], json!("bicriteria"));
    assert_eq!(v["parameters"]["tau"], json!(0.5));
    assert_eq!(v["variant"], json!("imls"));
}

#[test]
fn plan_refuses_the_fractional_dual_variant() {
    let out = run(&[
        "plan",
        "--workload",
        fixture("dual.json").to_str().unwrap(),
        "--variant",
        "fdls",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error[unsupported]:"), "{}", stderr(&out));
}

#[test]
fn plan_without_the_needed_budget_is_infeasible() {
    let out = run(&[
        "plan",
        "--workload",
        fixture("memory.json").to_str().unwrap(),
        "--variant",
        "icls",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error[infeasible]:"), "{}", stderr(&out));
}

#[test]
fn plan_demands_match_rates_up_front() {
    let dir = TempDir::new().unwrap();
    let wl = write_json(&dir, "wl.json", &pair_workload("any_match", None));
    let out = run(&["plan", "--workload", wl.to_str().unwrap(), "--variant", "imls"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("estimate it first"), "{}", stderr(&out));
}

#[test]
fn simulation_agrees_with_the_analytic_rate() {
    let dir = TempDir::new().unwrap();
    let wl = write_json(&dir, "wl.json", &pair_workload("any_match", Some(1.0)));
    let plan_path = dir.path().join("plan.json");
    let planned = run(&[
        "plan",
        "--workload",
        wl.to_str().unwrap(),
        "--variant",
        "imls",
        "--algorithm",
        "brute",
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&planned), 0, "{}", stderr(&planned));
    let out = run(&[
        "simulate",
        "--workload",
        wl.to_str().unwrap(),
        "--plan",
        plan_path.to_str().unwrap(),
        "--duration",
        "400",
        "--trials",
        "24",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mean = v["report"]["mean_utility_per_unit_time"].as_f64().unwrap();
    let se = v["report"]["utility_std_error"].as_f64().unwrap();
    assert!(
        (mean - 1.0).abs() <= 4.0 * se,
        "mean {mean} strays from the analytic 1.0 beyond 4 standard errors {se}"
    );
}

#[test]
fn simulation_reruns_are_byte_identical_and_csv_has_a_header() {
    let dir = TempDir::new().unwrap();
    let wl = write_json(&dir, "wl.json", &pair_workload("any_match", Some(1.0)));
    let plan_path = dir.path().join("plan.json");
    run(&[
        "plan",
        "--workload",
        wl.to_str().unwrap(),
        "--variant",
        "imls",
        "--algorithm",
        "brute",
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    let args = [
        "simulate",
        "--workload",
        wl.to_str().unwrap(),
        "--plan",
        plan_path.to_str().unwrap(),
        "--duration",
        "50",
        "--trials",
        "6",
        "--seed",
        "11",
        "--format",
        "csv",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.starts_with("key,value\n"), "{text}");
    assert!(text.contains("matches.P,"), "{text}");
}

#[test]
fn simulate_rejects_a_plan_for_a_different_workload() {
    let dir = TempDir::new().unwrap();
    let wl = write_json(&dir, "wl.json", &pair_workload("any_match", Some(1.0)));
    let plan_path = dir.path().join("plan.json");
    run(&[
        "plan",
        "--workload",
        wl.to_str().unwrap(),
        "--variant",
        "imls",
        "--algorithm",
        "brute",
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    let mut other = pair_workload("any_match", Some(1.0));
    other["event_types"][0]["name"] = json!("X");
    other["event_types"][1]["name"] = json!("Y");
    other["queries"][0]["pattern"] = json!(["X", "Y"]);
    let other_path = write_json(&dir, "other.json", &other);
    let out = run(&[
        "simulate",
        "--workload",
        other_path.to_str().unwrap(),
        "--plan",
        plan_path.to_str().unwrap(),
        "--duration",
        "20",
        "--trials",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error[incompatible-plan]:"), "{}", stderr(&out));
}

#[test]
fn simulate_flags_a_plan_that_overruns_its_budget() {
    let dir = TempDir::new().unwrap();
    let mut wl = pair_workload("any_match", Some(1.0));
    wl["budgets"] = json!({ "memory": 1.0 });
    let wl_path = write_json(&dir, "wl.json", &wl);
    let plan = json!({
        "variant": "imls",
        "algorithm": "brute",
        "keep_event": { "A": true, "B": true },
        "keep_query": { "P": true },
        "evaluation": {
            "expected_utility": 1.0,
            "memory_use": 2.0,
            "cpu_use": 1.0,
            "feasible_memory": false,
            "feasible_cpu": true,
            "guarantee": null,
            "rounding": null
        }
    });
    let plan_path = write_json(&dir, "plan.json", &plan);
    let out = run(&[
        "simulate",
        "--workload",
        wl_path.to_str().unwrap(),
        "--plan",
        plan_path.to_str().unwrap(),
        "--duration",
        "20",
        "--trials",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error[infeasible]:"), "{}", stderr(&out));
    // The report itself still lands on stdout before the violation fails
    // the run, so the numbers stay inspectable.
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["report"]["trials_run"].is_number());
}

#[test]
fn hand_written_fractional_dual_plans_replay() {
    let dir = TempDir::new().unwrap();
    let mut wl = pair_workload("any_match", Some(1.0));
    wl["budgets"] = json!({ "memory": 2.0, "cpu": 1.0 });
    let wl_path = write_json(&dir, "wl.json", &wl);
    let plan = json!({
        "variant": "fdls-eval",
        "algorithm": "by-hand",
        "sample_event": { "A": 0.5, "B": 1.0 },
        "sample_query": { "P": 0.5 },
        "evaluation": {
            "expected_utility": 0.5,
            "memory_use": 1.5,
            "cpu_use": 0.5,
            "feasible_memory": true,
            "feasible_cpu": true,
            "guarantee": null,
            "rounding": null
        }
    });
    let plan_path = write_json(&dir, "plan.json", &plan);
    let out = run(&[
        "simulate",
        "--workload",
        wl_path.to_str().unwrap(),
        "--plan",
        plan_path.to_str().unwrap(),
        "--duration",
        "60",
        "--trials",
        "4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["plan_variant"], json!("fdls-eval"));
}

#[test]
fn verify_reports_the_known_optima_on_the_demo_workloads() {
    let out = run(&["verify", "--workload", fixture("dual.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("optimum imls (brute): 6"), "{text}");
    assert!(text.contains("optimum icls (brute): 10"), "{text}");
    assert!(text.contains("optimum idls (brute): 6"), "{text}");
    assert!(text.contains("overall: pass"), "{text}");

    for (name, line) in
        [("memory.json", "optimum imls (brute): 6"), ("cpu.json", "optimum icls (brute): 10")]
    {
        let out = run(&["verify", "--workload", fixture(name).to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).contains(line), "{}", stdout(&out));
    }
}

#[test]
fn verify_sweeps_random_instances_clean() {
    let out = run(&[
        "verify",
        "--random",
        "200",
        "--max-types",
        "8",
        "--seed",
        "0",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("overall: pass"), "{}", stdout(&out));
}

#[test]
fn verify_passes_vacuously_without_queries() {
    let dir = TempDir::new().unwrap();
    let mut wl = pair_workload("any_match", None);
    wl["queries"] = json!([]);
    let path = write_json(&dir, "wl.json", &wl);
    let out = run(&["verify", "--workload", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("vacuously pass"), "{}", stdout(&out));
}

#[test]
fn verify_emits_csv_when_asked() {
    let out = run(&[
        "verify",
        "--workload",
        fixture("memory.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("check,runs,worst_margin,status\n"), "{}", stdout(&out));
}

#[test]
fn unknown_workload_fields_are_rejected_by_name() {
    let dir = TempDir::new().unwrap();
    let mut wl = pair_workload("any_match", Some(1.0));
    wl["wind0w"] = json!(1.0);
    let path = write_json(&dir, "wl.json", &wl);
    let out = run(&["estimate", "--workload", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.starts_with("error[parse]:"), "{err}");
    assert!(err.contains("wind0w"), "{err}");
}

#[test]
fn usage_errors_are_single_lines() {
    let bogus = run(&[
        "plan",
        "--workload",
        fixture("memory.json").to_str().unwrap(),
        "--variant",
        "zorp",
    ]);
    assert_eq!(code(&bogus), 1);
    let err = stderr(&bogus);
    assert!(err.starts_with("error[usage]:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");

    let bare = run(&[]);
    assert_eq!(code(&bare), 1);
    assert!(stderr(&bare).starts_with("error[usage]:"), "{}", stderr(&bare));

    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("Usage"), "{}", stdout(&help));
}

#[test]
fn verify_requires_exactly_one_input_mode() {
    let both = run(&[
        "verify",
        "--workload",
        fixture("memory.json").to_str().unwrap(),
        "--random",
        "5",
    ]);
    assert_eq!(code(&both), 1);
    assert!(stderr(&both).starts_with("error[usage]:"), "{}", stderr(&both));

    let neither = run(&["verify"]);
    assert_eq!(code(&neither), 1);
    assert!(stderr(&neither).starts_with("error[usage]:"), "{}", stderr(&neither));
}
