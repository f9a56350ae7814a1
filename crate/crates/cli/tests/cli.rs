use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subquad"))
}

fn write_graph(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn k3() -> PathBuf {
    write_graph("k3.txt", "3\n0 1\n1 2\n0 2\n")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn count_k3_hardcore() {
    let g = k3();
    let out = run(&["count", "--model", "hardcore", "--lambda", "1.0", "--graph", g.to_str().unwrap(), "--eps", "0.1", "--mode", "aggregate", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    let z = v["z_hat"].as_f64().unwrap();
    assert!((z.ln() - 4f64.ln()).abs() <= 0.1, "z_hat {z}");
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn count_is_deterministic() {
    let g = k3();
    let args = ["count", "--model", "hardcore", "--lambda", "0.8", "--graph", g.to_str().unwrap(), "--mode", "saw", "--seed", "11"];
    assert_eq!(json(&run(&args)), json(&run(&args)));
    let single = bin().args(args).env("SUBQUAD_THREADS", "1").output().unwrap();
    assert_eq!(json(&run(&args)), json(&single));
}

#[test]
fn sample_is_deterministic_and_sums() {
    let g = k3();
    let args = ["sample", "--model", "hardcore", "--lambda", "0.5", "--graph", g.to_str().unwrap(), "--trials", "500", "--batch", "--pin", "2=0"];
    let a = json(&run(&args));
    assert_eq!(a, json(&run(&args)));
    let c: Vec<u64> = a["counts"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(c.iter().sum::<u64>(), 500);
}

#[test]
fn missing_graph_exits_2() {
    let out = run(&["count", "--model", "hardcore", "--lambda", "1", "--graph", "/nonexistent/graph.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_parameter_exits_2() {
    let g = k3();
    let out = run(&["count", "--model", "ising", "--graph", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn regime_violation_exits_3() {
    // Δ = 2 admits λ ≤ 1 for the aggregate hardcore sampler
    let g = k3();
    let args = ["count", "--model", "hardcore", "--lambda", "1.5", "--graph", g.to_str().unwrap(), "--mode", "aggregate"];
    assert_eq!(run(&args).status.code(), Some(3));
    let mut forced = args.to_vec();
    forced.push("--override");
    assert!(run(&forced).status.success());
}

#[test]
fn verify_filters_suites() {
    let out = run(&["verify", "--suite", "saw"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["suite"] == "saw"));
}

#[test]
fn injected_coin_bias_fails_verification() {
    let out = run(&["verify", "--suite", "marginals", "--inject-coin-skew", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["failed"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_suite_exits_2() {
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn bench_is_deterministic_apart_from_wall_time() {
    let strip = |o: Output| -> Vec<String> {
        String::from_utf8(o.stdout).unwrap().lines().map(|l| l.rsplitn(2, ',').last().unwrap().to_string()).collect()
    };
    let args = ["bench", "--what", "aggregate-aj", "--sizes", "10,12,14"];
    assert_eq!(strip(run(&args)), strip(run(&args)));
}
