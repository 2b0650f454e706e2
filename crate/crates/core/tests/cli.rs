use std::fs;
use std::process::{Command, Output};

use bco_core::harness::emit::{RunSummary, CSV_HEADER};
use bco_core::harness::sweep::SweepResult;

fn bco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bco")).args(args).output().expect("spawn bco")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("nested/run.csv");
    let out =
        bco(&["run", "--env", "switching", "--S", "2", "--T", "500", "--seed", "3", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 500);
    let summary = RunSummary::from_json(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary.config.horizon, 500);
    assert_eq!(summary.config_hash.len(), 64);
    assert_eq!(summary.meta.interval_len, Some(250));
    assert!(summary.final_regret_dyn.is_finite());
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let args = ["run", "--env", "drift", "--Delta", "1.5", "--T", "800", "--d", "3", "--sigma", "0.3", "--out", "-"];
    let (a, b) = (bco(&args), bco(&args));
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let other = bco(&[
        "run", "--env", "drift", "--Delta", "1.5", "--T", "800", "--d", "3", "--sigma", "0.3", "--seed", "1", "--out",
        "-",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let args =
        ["sweep", "--env", "switching", "--S", "2", "--sigma", "0.1", "--horizons", "128,256,512", "--seeds", "5"];
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = Command::new(env!("CARGO_BIN_EXE_bco")).args(args).env("BCO_THREADS", threads).output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    let res: SweepResult = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(res.cells.len(), 15);
    assert_eq!(res.per_horizon.len(), 3);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# a path run\nT = 400\nenv = path\nenv.P = 1.0\nalgo.P = 1.0\nsigma = 0\n").unwrap();
    let csv = dir.path().join("r.csv");
    let out = bco(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--T",
        "300",
        "--set",
        "seed=9",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = RunSummary::from_json(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!((summary.config.horizon, summary.config.seed, summary.config.sigma), (300, 9, 0.0));

    fs::write(&cfg, "T = 400\nbogus = 1\n").unwrap();
    let out = bco(&["run", "--config", cfg.to_str().unwrap(), "--out", "-"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn invalid_configurations_exit_with_code_two() {
    for args in [
        vec!["run", "--env", "switching", "--out", "-"],
        vec!["run", "--env", "switching", "--S", "2", "--B", "16", "--out", "-"],
        vec!["run", "--env", "path", "--P", "1", "--S", "2", "--out", "-"],
        vec!["run", "--env", "hard", "--S", "2", "--domain", "cube", "--out", "-"],
        vec!["run", "--algo", "bob-tewa", "--env", "switching", "--S", "2", "--B", "8", "--out", "-"],
    ] {
        let out = bco(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn gc_check_reports_no_violations() {
    let out = bco(&["check", "gc", "--max-t", "5000", "--partition-max", "200"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let audit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(audit["rounds_checked"], 5000);
    assert_eq!(audit["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn exported_environment_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.json");
    let path = env.to_str().unwrap();
    let out = bco(&["env", "export", path, "--env", "hard", "--S", "4", "--T", "600", "--d", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = bco(&["env", "import", path]);
    assert!(report.status.success(), "{}", stderr(&report));
    let report: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(report["kind"], "hard");
    assert!(report["realized"]["switches"].as_u64().unwrap() <= 4);

    let from_file =
        bco(&["run", "--set", &format!("env.file={path}"), "--S", "4", "--T", "600", "--d", "2", "--out", "-"]);
    let direct = bco(&["run", "--env", "hard", "--S", "4", "--T", "600", "--d", "2", "--out", "-"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, direct.stdout);
}
