use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vrasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vrasp")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = vrasp(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn instance(dir: &TempDir, n: usize, seed: u64) -> PathBuf {
    let path = dir.path().join(format!("inst_{n}_{seed}.json"));
    ok(&["gen", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", p(&path)]);
    path
}

const FAST: [&str; 4] = ["--tau", "20", "--tabu-iters", "50"];

#[test]
fn gen_rejects_zero_clients() {
    let dir = TempDir::new().unwrap();
    let out = vrasp(&["gen", "--n", "0", "--out", p(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["gen", "--n", "7", "--seed", "3", "--out", p(&a)]);
    ok(&["gen", "--n", "7", "--seed", "3", "--out", p(&b)]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn solve_single_client() {
    let dir = TempDir::new().unwrap();
    let inst = instance(&dir, 1, 0);
    let sol = dir.path().join("sol.json");
    let stdout = ok(&[&["solve", "--instance", p(&inst), "--model", "det", "--out", p(&sol)][..], &FAST].concat());
    let summary: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["model"], "det");
    let solution: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    let visits: Vec<&Value> = solution["routes"].as_array().unwrap().iter().flat_map(|r| r["visits"].as_array().unwrap()).collect();
    assert_eq!(visits.len(), 1);
    assert!(dir.path().join("sol.log.csv").exists());
}

#[test]
fn saa_with_one_scenario_matches_det() {
    let dir = TempDir::new().unwrap();
    let inst = instance(&dir, 6, 2);
    let cost = |model: &str| {
        let sol = dir.path().join(format!("{model}.json"));
        let stdout =
            ok(&[&["solve", "--instance", p(&inst), "--model", model, "--m", "1", "--seed", "5", "--out", p(&sol)][..], &FAST].concat());
        serde_json::from_str::<Value>(&stdout).unwrap()["cost"]["total"].as_f64().unwrap()
    };
    assert!((cost("det") - cost("saa")).abs() < 1e-9);
}

#[test]
fn solve_reports_missing_and_malformed_inputs() {
    let dir = TempDir::new().unwrap();
    let sol = dir.path().join("sol.json");
    let missing = vrasp(&["solve", "--instance", p(&dir.path().join("nope.json")), "--out", p(&sol)]);
    assert_eq!(missing.status.code(), Some(4));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let malformed = vrasp(&["solve", "--instance", p(&bad), "--out", p(&sol)]);
    assert_eq!(malformed.status.code(), Some(3));
}

#[test]
fn evaluate_reproduces_solve_cost() {
    let dir = TempDir::new().unwrap();
    let inst = instance(&dir, 6, 4);
    let sol = dir.path().join("sol.json");
    let sampling = ["--m", "10", "--seed", "9"];
    let solved: Value = serde_json::from_str(&ok(&[
        &["solve", "--instance", p(&inst), "--model", "saa", "--out", p(&sol)][..],
        &sampling,
        &FAST,
    ]
    .concat()))
    .unwrap();
    let evaluated: Value =
        serde_json::from_str(&ok(&[&["evaluate", "--instance", p(&inst), "--solution", p(&sol)][..], &sampling].concat())).unwrap();
    let a = solved["cost"]["total"].as_f64().unwrap();
    let b = evaluated["total"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");

    let tardy: Value = serde_json::from_str(&ok(&[
        &["evaluate", "--instance", p(&inst), "--solution", p(&sol), "--penalty-mode", "tardiness"][..],
        &sampling,
    ]
    .concat()))
    .unwrap();
    assert_ne!(tardy["wait_penalty"], evaluated["wait_penalty"]);
}

#[test]
fn saa_report_shape_and_determinism() {
    let dir = TempDir::new().unwrap();
    let inst = instance(&dir, 5, 6);
    let run = |q: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&[&["saa", "--instance", p(&inst), "--q", q, "--m", "5", "--m-eval", "40", "--seed", "2", "--out", p(&out)][..], &FAST].concat());
        fs::read_to_string(out).unwrap()
    };
    let a = run("3", "a.json");
    assert_eq!(a, run("3", "b.json"));
    let report: Value = serde_json::from_str(&a).unwrap();
    for key in ["replications", "lb_mean", "lb_variance", "selected", "ub", "ub_variance", "gap", "gap_variance"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["replications"].as_array().unwrap().len(), 3);

    let single: Value = serde_json::from_str(&run("1", "c.json")).unwrap();
    assert_eq!(single["lb_variance"].as_f64(), Some(0.0));
}

#[test]
fn export_lp_models() {
    let dir = TempDir::new().unwrap();
    let inst = instance(&dir, 3, 1);
    let out = dir.path().join("m.lp");
    let bad = vrasp(&["export-lp", "--instance", p(&inst), "--model", "p2", "--out", p(&out)]);
    assert_eq!(bad.status.code(), Some(2));

    ok(&["export-lp", "--instance", p(&inst), "--model", "p1", "--m", "2", "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains(" a_1_1 ") && text.contains(" a_1_2 "));
    assert!(text.contains("\nBinaries\n") && text.trim_end().ends_with("End"));
}

#[test]
fn bench_writes_and_resumes() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bench.json");
    let results = dir.path().join("results");
    let body = serde_json::json!({
        "sizes": [4, 5],
        "instances_per_size": 2,
        "sample_sizes": [5],
        "m_eval": 30,
        "seed": 1,
        "output_dir": results,
        "exact": true,
        "solver": { "max_iters": 10, "tabu_iters": 30, "seed": 0 }
    });
    fs::write(&config, body.to_string()).unwrap();
    ok(&["bench", "--config", p(&config)]);
    let first: Vec<String> = ["bench_n4.csv", "bench_n5.csv"].iter().map(|f| fs::read_to_string(results.join(f)).unwrap()).collect();
    for text in &first {
        assert!(text.starts_with("instance_id,"));
        // two instances, each with P0, P1, oracle and vns rows
        assert_eq!(text.lines().count(), 1 + 2 * 4);
    }
    ok(&["bench", "--config", p(&config)]);
    let second: Vec<String> = ["bench_n4.csv", "bench_n5.csv"].iter().map(|f| fs::read_to_string(results.join(f)).unwrap()).collect();
    assert_eq!(first, second);

    // Drop one instance's rows; a rerun fills in only what is missing.
    let partial: String = first[0].lines().take(5).map(|l| format!("{l}\n")).collect();
    fs::write(results.join("bench_n4.csv"), &partial).unwrap();
    ok(&["bench", "--config", p(&config)]);
    let resumed = fs::read_to_string(results.join("bench_n4.csv")).unwrap();
    assert!(resumed.starts_with(&partial));
    assert_eq!(resumed.lines().count(), 9);
    assert_eq!(resumed.lines().filter(|l| l.starts_with("instance_id")).count(), 1);

    fs::write(&config, r#"{"sizes": [4], "output_dir": "x", "bogus": 1}"#).unwrap();
    assert_eq!(vrasp(&["bench", "--config", p(&config)]).status.code(), Some(3));
}
