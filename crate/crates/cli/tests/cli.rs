use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_statlength"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BORN: &str = r#"{"K": 2, "gamma": {"1": 1}}"#;
const MIXED: &str = r#"{"K": 2, "gamma": {"0": 1, "1": 1}}"#;

#[test]
fn born_functional_passes_all_axioms() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "born.json", BORN);
    let o = run(&["verify-axioms", s(&f), "--json", "--frozen-time"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    let checks = v["report"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["verdict"] == "pass"));
    let steps: Vec<&str> = checks.iter().map(|c| c["step"].as_str().unwrap()).collect();
    assert_eq!(
        steps,
        [
            "step:scalability",
            "step:involution",
            "step:additivity",
            "step:device_independence"
        ]
    );
}

#[test]
fn expected_failure_profile() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "mixed.json", MIXED);
    let profile = write(&d, "profile.json", r#"{"expect": {"scalability": "fail"}}"#);
    let o = run(&["verify-axioms", s(&f), "--config", s(&profile), "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    let scal = &v["report"]["checks"][0];
    assert_eq!(scal["axiom"], "scalability");
    assert_eq!(scal["verdict"], "fail");
    assert!(scal["max_residual"].as_f64().unwrap() > 1e-2);

    // Without a profile every check must pass, so the same functional mismatches.
    assert_eq!(code(&run(&["verify-axioms", s(&f)])), 1);
    // A profile expecting the Born functional to fail also mismatches.
    let born = write(&d, "born.json", BORN);
    assert_eq!(code(&run(&["verify-axioms", s(&born), "--config", s(&profile)])), 1);
}

#[test]
fn malformed_inputs_exit_2() {
    let d = TempDir::new().unwrap();
    let truncated = write(&d, "t.json", r#"{"K": 2, "gamma""#);
    assert_eq!(code(&run(&["verify-axioms", s(&truncated)])), 2);
    let zero = write(&d, "z.json", r#"{"K": 2, "gamma": {"1": 0}}"#);
    assert_eq!(code(&run(&["verify-axioms", s(&zero)])), 2);
    let born = write(&d, "born.json", BORN);
    let bad_cfg = write(&d, "c.json", r#"{"axioms": {"tol_pas": 1e-9}}"#);
    assert_eq!(code(&run(&["verify-axioms", s(&born), "--config", s(&bad_cfg)])), 2);
    assert_eq!(code(&run(&["verify-axioms", "/nonexistent/f.json"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
}

#[test]
fn sweep_finds_only_the_quadratic_rule() {
    let o = run(&["sweep", "--p-min", "1", "--p-max", "3", "--dim", "2", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["report"]["admissible"], serde_json::json!([1]));
    assert_eq!(v["report"]["step"], "step:uniqueness");
    let results = v["report"]["results"].as_array().unwrap();
    assert_eq!(results[0]["verdict"], "preserver_found");
    assert!(results[0]["unitarity_defect"].as_f64().unwrap() <= 1e-6);
    for r in &results[1..] {
        assert_eq!(r["verdict"], "no_preserver");
        assert_eq!(r["certificate"]["routes_agree"], true);
    }

    let o = run(&["sweep", "--p-min", "2", "--p-max", "2", "--dim", "2", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["report"]["admissible"], serde_json::json!([]));
}

#[test]
fn sweep_rejects_bad_ranges() {
    assert_eq!(code(&run(&["sweep", "--p-min", "0", "--p-max", "1", "--dim", "2"])), 2);
    assert_eq!(code(&run(&["sweep", "--p-min", "3", "--p-max", "2"])), 2);
    assert_eq!(code(&run(&["sweep", "--p-min", "1", "--p-max", "7"])), 2);
    assert_eq!(code(&run(&["sweep", "--dim", "1"])), 2);
    assert_eq!(code(&run(&["sweep", "--dim", "9"])), 2);
}

#[test]
fn cross_term_certificates() {
    let d = TempDir::new().unwrap();
    let h = write(&d, "h.json", "[[1, 1], [1, -1]]");
    let o = run(&["cross-terms", "--p", "2", s(&h), "--json"]);
    assert_eq!(code(&o), 0);
    let c = &json_out(&o)["report"]["certificate"];
    assert_eq!(c["closed_form"], "8");
    assert_eq!(c["brute_force"], "8");

    let o = run(&["cross-terms", "--p", "3", s(&h), "--json"]);
    assert_eq!(json_out(&o)["report"]["certificate"]["closed_form"], "18");

    let diag = write(&d, "d.json", "[[3, 0], [0, 5]]");
    let o = run(&["cross-terms", "--p", "2", s(&diag), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_out(&o)["report"]["certificate"]["brute_force"], "0");

    assert_eq!(code(&run(&["cross-terms", "--p", "1", s(&h)])), 2);
    let big = write(&d, "b.json", "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]");
    assert_eq!(code(&run(&["cross-terms", "--p", "2", s(&big)])), 2);
    let singular = write(&d, "s.json", "[[1, 1], [1, 1]]");
    assert_eq!(code(&run(&["cross-terms", "--p", "2", s(&singular)])), 2);
}

fn rep_json(amps: &[(f64, f64)]) -> String {
    let entries: Vec<Value> = amps
        .iter()
        .enumerate()
        .map(|(i, (re, im))| serde_json::json!({"label": i.to_string(), "re": re, "im": im}))
        .collect();
    serde_json::json!({"basis": "A", "entries": entries}).to_string()
}

#[test]
fn simulate_writes_artifacts() {
    let d = TempDir::new().unwrap();
    let rep = write(&d, "rep.json", &rep_json(&[(1.0, 0.0), (0.0, 2.0)]));
    let out = d.path().join("out");
    let o = run(&[
        "simulate",
        s(&rep),
        "--n",
        "1000000",
        "--trials",
        "10",
        "--seed",
        "4",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let freqs = std::fs::read_to_string(out.join("frequencies.csv")).unwrap();
    let mut lines = freqs.lines();
    assert_eq!(lines.next(), Some("label,estimated,expected"));
    for (line, target) in lines.zip([0.2, 0.8]) {
        let est: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((est - target).abs() <= 0.005, "{line}");
    }
    let ensemble = std::fs::read_to_string(out.join("ensemble.csv")).unwrap();
    assert!(ensemble.starts_with("label,count\n"));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out.join("ensemble.json")).unwrap()).unwrap();
    assert_eq!(meta, serde_json::json!({"n": 1000000, "seed": 4, "basis": "A"}));
    let curve = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 5);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["step"], "step:frequency_rule");
    assert!(report["report"]["disclaimer"]
        .as_str()
        .unwrap()
        .contains("not an independent confirmation"));
    assert_eq!(report["manifest"]["seed"], 4);
}

#[test]
fn simulate_certain_outcome() {
    let d = TempDir::new().unwrap();
    let rep = write(&d, "rep.json", &rep_json(&[(1.0, 0.0), (0.0, 0.0)]));
    let out = d.path().join("out");
    assert_eq!(
        code(&run(&[
            "simulate",
            s(&rep),
            "--n",
            "5000",
            "--trials",
            "3",
            "--out",
            s(&out)
        ])),
        0
    );
    let counts = std::fs::read_to_string(out.join("ensemble.csv")).unwrap();
    assert_eq!(counts, "label,count\n0,5000\n1,0\n");
}

#[test]
fn simulate_input_errors() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("out");
    assert_eq!(code(&run(&["simulate", "/nonexistent/rep.json", "--out", s(&out)])), 2);
    let degenerate = write(&d, "z.json", &rep_json(&[(0.0, 0.0)]));
    assert_eq!(
        code(&run(&["simulate", s(&degenerate), "--n", "10", "--out", s(&out)])),
        2
    );
    let rep = write(&d, "rep.json", &rep_json(&[(1.0, 0.0)]));
    assert_eq!(code(&run(&["simulate", s(&rep), "--n", "10"])), 2);
    assert_eq!(code(&run(&["simulate", s(&rep), "--n", "0", "--out", s(&out)])), 2);
}

fn report_bytes(args: &[&str], out: &Path) -> Vec<u8> {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--frozen-time", "--out", s(out)]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out.join("report.json")).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let born = write(&d, "born.json", BORN);
    let h = write(&d, "h.json", "[[1, 1], [1, -1]]");
    let rep = write(&d, "rep.json", &rep_json(&[(1.0, 0.0), (1.0, 1.0), (0.0, -0.5)]));
    let runs: [Vec<&str>; 4] = [
        vec!["verify-axioms", s(&born), "--seed", "9"],
        vec!["sweep", "--p-min", "1", "--p-max", "2", "--seed", "9"],
        vec!["cross-terms", "--p", "4", s(&h)],
        vec!["simulate", s(&rep), "--n", "20000", "--trials", "8", "--seed", "9"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = report_bytes(args, &d.path().join(format!("a{i}")));
        let b = report_bytes(args, &d.path().join(format!("b{i}")));
        assert_eq!(a, b, "{args:?}");
    }
    let a = std::fs::read(d.path().join("a3/ensemble.csv")).unwrap();
    let b = std::fs::read(d.path().join("b3/ensemble.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn manifest_digest_tracks_parameters() {
    let d = TempDir::new().unwrap();
    let born = write(&d, "born.json", BORN);
    let digest = |seed: &str| {
        let o = run(&["verify-axioms", s(&born), "--seed", seed, "--json"]);
        json_out(&o)["manifest"]["config_digest"].as_str().unwrap().to_owned()
    };
    assert_eq!(digest("1"), digest("1"));
    assert_ne!(digest("1"), digest("2"));
    let o = run(&["verify-axioms", s(&born), "--json"]);
    let m = &json_out(&o)["manifest"];
    assert_eq!(m["command"], "verify-axioms");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert!(m["timestamp"].as_str().unwrap().ends_with('Z'));
}
