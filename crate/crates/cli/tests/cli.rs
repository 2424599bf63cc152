//! Black-box tests of the `ropex` binary: exit codes, artifacts, and the
//! config-echo round trip.

use std::path::{Path, PathBuf};
use std::process::Command;

fn ropex() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ropex"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ropex-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_produces_artifacts_and_a_summary() {
    let dir = scratch("run");
    let cfg = write_config(
        &dir,
        "exp.cfg",
        "problem = nash\npolicy = monotone-fixed\nk = 128\nreps = 2\nseed = 1\n",
    );
    let out = dir.join("out");
    let result = ropex()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("final dist_inner mean"));
    for name in [
        "run_k128_rep0.csv",
        "run_k128_rep1.csv",
        "aggregate_k128.csv",
        "schedule_k128.csv",
        "sweep.csv",
        "summary.txt",
        "config.echo",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn rerunning_from_the_echo_reproduces_identical_artifacts() {
    let dir = scratch("echo");
    let cfg = write_config(
        &dir,
        "exp.cfg",
        "problem = nash\npolicy = monotone-fixed\nk = 128,256\nreps = 2\nseed = 5\n",
    );
    let out1 = dir.join("first");
    assert!(ropex()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    // strip the embedded out path so the echo can be redirected
    let echo = std::fs::read_to_string(out1.join("config.echo")).unwrap();
    let echo: String = echo
        .lines()
        .filter(|l| !l.starts_with("out ="))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg2 = write_config(&dir, "echoed.cfg", &echo);
    let out2 = dir.join("second");
    assert!(ropex()
        .args(["run", "--config"])
        .arg(&cfg2)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    for k in [128, 256] {
        for name in [
            format!("run_k{k}_rep0.csv"),
            format!("run_k{k}_rep1.csv"),
            format!("aggregate_k{k}.csv"),
        ] {
            let a = std::fs::read(out1.join(&name)).unwrap();
            let b = std::fs::read(out2.join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs after the echo round trip");
        }
    }
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn invalid_config_exits_2() {
    let dir = scratch("bad-config");
    let cfg = write_config(
        &dir,
        "bad.cfg",
        "problem = nash\npolicy = monotone-fixed\nk = 256,128\n",
    );
    let result = ropex()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn incompatible_policy_exits_2_with_a_diagnostic() {
    let dir = scratch("incompatible");
    let cfg = write_config(
        &dir,
        "exp.cfg",
        "problem = nash\npolicy = strongly-monotone\nk = 64\n",
    );
    let result = ropex()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(
        stderr.contains("mu_h"),
        "diagnostic should name the requirement: {stderr}"
    );
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn validate_schedule_reports_every_condition() {
    let result = ropex()
        .args([
            "validate-schedule",
            "--policy",
            "adaptive-k-free",
            "--k",
            "100",
            "--problem",
            "nash",
        ])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("telescope equality"));
    assert!(stdout.contains("schedule ok"));
}

#[test]
fn bounds_prints_the_certificates() {
    let result = ropex()
        .args([
            "bounds",
            "--policy",
            "monotone-fixed",
            "--k",
            "1024",
            "--problem",
            "nash",
        ])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("optimality_upper"));
    assert!(stdout.contains("feasibility_upper"));
    assert!(stdout.contains("optimality_lower"));
}

#[test]
fn unknown_policy_exits_2() {
    let result = ropex()
        .args([
            "bounds",
            "--policy",
            "nonexistent",
            "--k",
            "16",
            "--problem",
            "nash",
        ])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn out_dir_env_var_is_the_default() {
    let dir = scratch("env-out");
    let cfg = write_config(
        &dir,
        "exp.cfg",
        "problem = nash\npolicy = monotone-fixed\nk = 64\n",
    );
    let out = dir.join("from-env");
    let result = ropex()
        .args(["run", "--config"])
        .arg(&cfg)
        .env("ROPEX_OUT", &out)
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(out.join("summary.txt").exists());
    let _ = std::fs::remove_dir_all(dir);
}
