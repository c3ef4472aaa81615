use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn remdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_remdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn small_config(dir: &Path, grid: &str) -> PathBuf {
    let path = dir.join("small.toml");
    let text = format!(
        "experiment = \"aging_sweep\"\nn = 10\neps = 0.5\nalpha_target = 0.6\n\
         paths = 20\ndisorders = 5\nseed = 3\nrho = 0.5\n{grid}"
    );
    std::fs::write(&path, text).unwrap();
    path
}

const GRID: &str = "[[grid]]\nt = 1.0\ns = 1.0\n\n[[grid]]\nt = 1.0\ns = 3.0\n";

#[test]
fn scales_reports_identities() {
    let v = json(&remdyn(&[
        "scales", "--n", "20", "--eps", "0.5", "--alpha", "0.6",
    ]));
    let text = v.to_string();
    assert!(text.contains("a_n"), "{text}");
    assert!(text.contains("c_n"), "{text}");
}

#[test]
fn invalid_parameters_exit_with_two() {
    let out = remdyn(&["scales", "--n", "20", "--eps", "1.5", "--beta", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn shallow_cascade_exits_with_three() {
    let out = remdyn(&[
        "limits",
        "levy",
        "--alpha",
        "0.5",
        "--u",
        "1e-6",
        "--extreme",
        "--depth",
        "10",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn empty_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = remdyn(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), &format!("bogus = 1\n{GRID}"));
    let out = remdyn(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), GRID);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let res = remdyn(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(
        text.starts_with("kind,n,eps,beta,theta,t,s,rho,mean"),
        "{text}"
    );
    // two observables at two grid points plus the header
    assert_eq!(text.lines().count(), 5);
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn json_run_carries_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), GRID);
    let v = json(&remdyn(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]));
    assert_eq!(v["manifest"]["experiment"], "aging_sweep");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn correlation_subcommand_overrides_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), GRID);
    let out = remdyn(&[
        "correlation",
        "--config",
        cfg.to_str().unwrap(),
        "--kind",
        "nojump_cond",
        "--t",
        "1",
        "--s",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("nojump_cond,"));
}

#[test]
fn asl_matches_closed_value() {
    // I_{1/2}(1/2, 1/2) = 1/2
    let v = json(&remdyn(&["limits", "asl", "--alpha", "0.5", "--u", "0.5"]));
    let value = v["asl"].as_f64().unwrap();
    assert!((value - 0.5).abs() < 1e-12);
}

#[test]
fn oracle_return_probability() {
    // two-step return on the hypercube is 1/n
    let v = json(&remdyn(&["oracle", "return-prob", "--n", "8", "--l", "2"]));
    let p = v["return_probability"].as_f64().unwrap();
    assert!((p - 0.125).abs() < 1e-15);
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let v = json(&remdyn(&[
        "simulate",
        "--n",
        "10",
        "--eps",
        "0.5",
        "--alpha",
        "0.6",
        "--steps",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["steps"], 100);
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 102);
}
