use std::path::PathBuf;
use std::process::{Command, Output};

use preempt::{analyze, parse_scenario, MomentReport, SimulationEstimate};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"))
}

fn preempt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preempt"))
        .args(args)
        .env_remove("PREEMPT_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn analyze_prints_closed_form_mean() {
    let path = scenario("exp_det_detdown");
    let out = preempt(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("E[R]   = 1.5\n"), "{}", stdout(&out));
}

#[test]
fn analyze_json_round_trips() {
    for name in ["exp_det_detdown", "gamma_uniform_uniformdown", "q_zero"] {
        let path = scenario(name);
        let out = preempt(&["analyze", path.to_str().unwrap(), "--json"]);
        assert_eq!(out.status.code(), Some(0));
        let parsed: MomentReport = serde_json::from_str(&stdout(&out)).unwrap();
        let file = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let direct = analyze(&file.environment()).unwrap();
        assert_eq!(parsed, direct, "{name}");
    }
}

#[test]
fn json_uses_report_field_names() {
    let path = scenario("q_zero");
    let out = preempt(&["analyze", path.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in [
        "q",
        "e_r",
        "e_r2",
        "var_r",
        "cm",
        "method_notes",
        "warnings",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["q", "a", "b", "c", "d", "method", "est_abs_error"] {
        assert!(v["cm"].get(key).is_some(), "missing cm.{key}");
    }
    assert!(v["cm"]["b"].is_null());
    assert_eq!(v["cm"]["method"], "closed_form");
}

#[test]
fn q_one_exits_three() {
    let path = scenario("q_one");
    let out = preempt(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("job never completes (q=1)"));
    let out = preempt(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = preempt(&["simulate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr(&out).contains("1000 of 1000 paths exceeded"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn malformed_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(
        &bad_json,
        "{\n  \"name\": \"x\",\n  \"uptime\": {\"family\": \"exponential\"\n",
    )
    .unwrap();
    let out = preempt(&["analyze", bad_json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.json:"), "{}", stderr(&out));

    let bad_param = dir.path().join("param.json");
    std::fs::write(
        &bad_param,
        "{\"name\": \"x\",\n\"uptime\": {\"family\": \"uniform\", \"lo\": 2.0, \"hi\": 1.0},\n\
         \"downtime\": {\"family\": \"deterministic\", \"value\": 0.5},\n\
         \"proc\": {\"family\": \"deterministic\", \"value\": 1.0}}",
    )
    .unwrap();
    let out = preempt(&["analyze", bad_param.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("param.json:2:"), "{}", stderr(&out));

    let out = preempt(&["analyze", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let path = scenario("gamma_uniform_uniformdown");
    let args = [
        "simulate",
        path.to_str().unwrap(),
        "--json",
        "--n",
        "50000",
        "--seed",
        "4",
    ];
    let a = preempt(&args);
    let b = preempt(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let est: SimulationEstimate = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!((est.n, est.seed), (50_000, 4));
}

#[test]
fn simulate_reports_two_attempts_at_q_half() {
    let path = scenario("q_half");
    let out = preempt(&[
        "simulate",
        path.to_str().unwrap(),
        "--json",
        "--n",
        "200000",
    ]);
    let est: SimulationEstimate = serde_json::from_str(&stdout(&out)).unwrap();
    // N is geometric with success 1/2: Var[N] = 2
    let se = (2.0f64 / 200_000.0).sqrt();
    assert!(
        (est.mean_attempts - 2.0).abs() <= 5.0 * se,
        "{}",
        est.mean_attempts
    );
    let text = preempt(&["simulate", path.to_str().unwrap(), "--n", "1000"]);
    assert!(stdout(&text).contains("mean attempts = "));
}

#[test]
fn simulate_rejects_single_sample() {
    let path = scenario("q_half");
    let out = preempt(&["simulate", path.to_str().unwrap(), "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n must be ≥ 2"));
}

#[test]
fn validate_detects_corrupted_second_moment() {
    let path = scenario("exp_det_detdown");
    let ok = preempt(&["validate", path.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("result: PASS"));
    let bad = preempt(&[
        "validate",
        path.to_str().unwrap(),
        "--perturb-second-moment",
        "1.05",
    ]);
    assert_eq!(bad.status.code(), Some(1), "{}", stdout(&bad));
    assert!(stdout(&bad).contains("result: FAIL"));
}

#[test]
fn bad_worker_count_is_an_input_error() {
    let path = scenario("q_half");
    let out = Command::new(env!("CARGO_BIN_EXE_preempt"))
        .args(["simulate", path.to_str().unwrap(), "--n", "10"])
        .env("PREEMPT_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
