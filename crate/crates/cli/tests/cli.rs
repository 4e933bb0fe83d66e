use std::process::Command;

use siegel_core::experiments::ExperimentReport;

fn siegel(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_siegel")).args(args).output().unwrap()
}

#[test]
fn volume_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("volume.json");
    let run = siegel(&["volume", "--g", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: ExperimentReport = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(report.passed);
    assert_eq!(report.experiment, "volume");
    let csv = std::fs::read_to_string(dir.path().join("volume.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("y,value,error,fit-residual"));
    assert_eq!(csv.lines().count(), report.series.len() + 1);
}

#[test]
fn report_goes_to_stdout_without_out() {
    let run = siegel(&["decompose", "--g", "3", "--seed", "4"]);
    assert_eq!(run.status.code(), Some(0));
    let report: ExperimentReport = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report.config["genus"], 3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(siegel(&["volume", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(siegel(&["volume", "--bogus"]).status.code(), Some(2));
    assert_eq!(siegel(&["zagier", "--y-min", "0.01", "--y-max", "0.1"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let run = siegel(&["eisenstein", "--g", "1", "--s", "3", "--radius", "1.5"]);
    assert_eq!(run.status.code(), Some(1));
    let report: ExperimentReport = serde_json::from_slice(&run.stdout).unwrap();
    assert!(!report.passed);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "genus = 1\nseed = 9\n").unwrap();
    let run = siegel(&["measure-check", "--config", cfg.to_str().unwrap(), "--g", "2"]);
    assert_eq!(run.status.code(), Some(0));
    let report: ExperimentReport = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report.config["genus"], 2);
    assert_eq!(report.config["seed"], 9);
}
