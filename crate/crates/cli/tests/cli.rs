//! End-to-end checks of the binary: exit codes, JSON output, determinism,
//! env-var overrides, and the cache behavior.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_epochtest"));
    // keep the user cache out of the picture unless a test opts in
    cmd.env_remove("EPOCHSPEC_CACHE").env("HOME", scratch_dir());
    cmd
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("epochtest-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let mut args = vec![
        "simulate",
        "--kind",
        "whitenoise",
        "--n",
        "600",
        "--seed",
        "11",
        "--out",
    ];
    let path_str = path.to_str().unwrap();
    args.push(path_str);
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success());
}

#[test]
fn missing_input_file_exits_2() {
    let out = run(&["test", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_config_exits_3() {
    let data = scratch_dir().join("cfg.csv");
    simulate_to(&data, &[]);
    let out = run(&[
        "test",
        data.to_str().unwrap(),
        "--s",
        "6",
        "--block-length",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn farima_d_in_integrated_range_exits_3_with_hint() {
    let out = run(&["simulate", "--kind", "farima", "--d", "0.6", "--n", "100"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("integrated"), "stderr: {stderr}");
}

#[test]
fn test_on_white_noise_declares_stationary() {
    let data = scratch_dir().join("wn.csv");
    simulate_to(&data, &[]);
    let doc = stdout_json(&run(&["test", data.to_str().unwrap()]));
    assert_eq!(doc["command"], "test");
    assert_eq!(doc["outcome"]["decision"], "stationary");
    assert!(doc["outcome"]["p_value"].as_f64().unwrap() < 0.05);
    assert_eq!(doc["outcome"]["config"]["ell"], 10);
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    // round-trips through the schema
    let text = serde_json::to_string(&doc).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc, back);
}

#[test]
fn simulate_is_deterministic() {
    let a = scratch_dir().join("det_a.csv");
    let b = scratch_dir().join("det_b.csv");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let out = run(&[
            "simulate",
            "--kind",
            "farima",
            "--d",
            "0.3",
            "--n",
            "500",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn ar1_zero_phi_equals_white_noise() {
    let ar = scratch_dir().join("ar.csv");
    let wn = scratch_dir().join("wn_eq.csv");
    let out = run(&[
        "simulate",
        "--kind",
        "ar1",
        "--phi",
        "0.0",
        "--n",
        "400",
        "--seed",
        "7",
        "--out",
        ar.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "simulate",
        "--kind",
        "whitenoise",
        "--n",
        "400",
        "--seed",
        "7",
        "--out",
        wn.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let strip = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&ar), strip(&wn));
}

#[test]
fn limit_reports_weights_and_uses_cache() {
    let cache = scratch_dir().join("weights-cache.json");
    let args = [
        "limit",
        "--d",
        "0.5",
        "--s",
        "2",
        "--quantile",
        "0.05",
        "--cache-file",
        cache.to_str().unwrap(),
    ];
    let first = stdout_json(&run(&args));
    assert_eq!(first["outcome"]["cache_hit"], false);
    let weights = first["outcome"]["weights"].as_array().unwrap();
    assert_eq!(weights.len(), 4);
    let sum = first["outcome"]["weights_sum"].as_f64().unwrap();
    assert!((sum - 2.0).abs() < 1e-8);

    let second = stdout_json(&run(&args));
    assert_eq!(second["outcome"]["cache_hit"], true);
    assert_eq!(first["outcome"]["weights"], second["outcome"]["weights"]);
    assert_eq!(
        first["outcome"]["quantiles"],
        second["outcome"]["quantiles"]
    );

    // s = 1: two weights summing to 1
    let one = stdout_json(&run(&[
        "limit",
        "--d",
        "0.5",
        "--s",
        "1",
        "--cache-file",
        cache.to_str().unwrap(),
    ]));
    assert_eq!(one["outcome"]["weights"].as_array().unwrap().len(), 2);
    assert!((one["outcome"]["weights_sum"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn negative_values_accepted_with_space_syntax() {
    let data = scratch_dir().join("neg.csv");
    let out = run(&[
        "simulate", "--kind", "integrated", "--d-increment", "-0.5", "--n", "400", "--seed",
        "2", "--out", data.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&run(&[
        "limit", "--d", "-0.3", "--s", "1", "--cache-file",
        scratch_dir().join("neg-cache.json").to_str().unwrap(),
    ]));
    assert!((doc["outcome"]["weights_sum"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn invalid_d_exits_3() {
    let out = run(&["limit", "--d", "1.5", "--s", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn env_overrides_apply_and_flags_win() {
    let data = scratch_dir().join("env.csv");
    simulate_to(&data, &[]);
    // env sets an invalid configuration; the command must fail with 3
    let out = bin()
        .args(["test", data.to_str().unwrap()])
        .env("EPOCHSPEC_S", "6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // explicit flag overrides the bad env value
    let out = bin()
        .args(["test", data.to_str().unwrap(), "--s", "2"])
        .env("EPOCHSPEC_S", "6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn experiment_runs_plan_and_is_thread_invariant() {
    let dir = scratch_dir().join("exp");
    let plan_path = dir.join("plan.json");
    std::fs::create_dir_all(&dir).unwrap();
    let plan = serde_json::json!({
        "schema": "epochtest-plan/1",
        "name": "cli_smoke",
        "kind": "size_power",
        "config": {
            "s": 2, "alpha": 0.05, "ell": 10, "d_null": 0.5,
            "quadrature_tol": 1e-6, "mc_fallback_draws": 1000000
        },
        "replications": 120,
        "master_seed": 5,
        "grid": [
            { "label": "wn", "dgp": { "kind": "white_noise", "n": 300 } },
            { "label": "rw", "dgp": { "kind": "integrated_farima", "d_increment": 0.0, "n": 300 } }
        ]
    });
    std::fs::write(&plan_path, serde_json::to_string_pretty(&plan).unwrap()).unwrap();

    let out1 = dir.join("t1");
    let out8 = dir.join("t8");
    for (out_dir, threads) in [(&out1, "1"), (&out8, "8")] {
        let doc = stdout_json(&run(&[
            "experiment",
            "--plan",
            plan_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]));
        assert_eq!(doc["command"], "experiment");
        assert_eq!(doc["seed"], 5);
    }
    let csv1 = std::fs::read(out1.join("cli_smoke_rejection.csv")).unwrap();
    let csv8 = std::fs::read(out8.join("cli_smoke_rejection.csv")).unwrap();
    assert_eq!(csv1, csv8);
    assert!(out1.join("manifest.json").exists());
}

#[test]
fn simulated_file_round_trips_through_test() {
    // integrated series should not be rejected
    let data = scratch_dir().join("rw_roundtrip.csv");
    let out = run(&[
        "simulate",
        "--kind",
        "integrated",
        "--d-increment",
        "0.0",
        "--n",
        "2000",
        "--seed",
        "3",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&run(&["test", data.to_str().unwrap()]));
    assert_eq!(doc["outcome"]["decision"], "not-rejected");
}
