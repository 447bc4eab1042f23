use std::path::Path;
use std::process::{Command, Output};

use regimevol_cli::simulate::simulate;

fn regimevol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regimevol")).args(args).output().expect("binary runs")
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    simulate("pipeline-fixture", None, dir.path()).unwrap();
    dir
}

#[test]
fn bad_config_exits_one_without_artifacts() {
    let dir = fixture();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "output_dir = \"out\"\n[data]\nreturns = \"price.csv\"\nstart = \"2010-01-01\"\nend = \"2009-01-01\"\n\
         [garch_midas]\nk = 0\ncovariate1 = \"x1.csv\"\ncovariate2 = \"missing.csv\"\n[regressors]\nr1 = \"r1.csv\"\n",
    )
    .unwrap();
    let out = regimevol(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["garch_midas.k", "data.end", "garch_midas.covariate2"] {
        assert!(err.contains(needle), "{needle} missing from:\n{err}");
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_stage_and_scenario_are_usage_errors() {
    let dir = fixture();
    let cfg = dir.path().join("pipeline.toml");
    let out = regimevol(&["run", "--config", cfg.to_str().unwrap(), "--stage", "ols"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("output").exists());
    let out = regimevol(&["simulate", "--scenario", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pipeline-fixture"));
    assert_eq!(regimevol(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(regimevol(&["--help"]).status.code(), Some(0));
}

#[test]
fn input_with_wrong_frequency_exits_one() {
    let dir = fixture();
    let text = std::fs::read_to_string(dir.path().join("pipeline.toml")).unwrap().replace("covariate1 = \"x1.csv\"", "covariate1 = \"r1.csv\"");
    std::fs::write(dir.path().join("swapped.toml"), text).unwrap();
    let out = regimevol(&["run", "--config", dir.path().join("swapped.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("monthly"));
    assert!(!dir.path().join("output").exists());
}

#[test]
fn single_stage_writes_only_its_own_outputs() {
    let dir = fixture();
    let out_dir = dir.path().join("diag");
    let out = regimevol(&[
        "run",
        "--config",
        dir.path().join("pipeline.toml").to_str().unwrap(),
        "--stage",
        "diagnostics",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let written = files(&out_dir);
    assert!(written.iter().all(|f| f.starts_with("diagnostics_") || f == "manifest.toml"), "{written:?}");
    assert!(written.contains(&"diagnostics_report.txt".to_string()));
    let breaks = std::fs::read_to_string(out_dir.join("diagnostics_breaks.csv")).unwrap();
    assert!(breaks.contains("skipped"));
}

#[test]
fn later_stage_without_volatilities_fails_with_marker() {
    let dir = fixture();
    let out_dir = dir.path().join("msr_only");
    let out = regimevol(&[
        "run",
        "--config",
        dir.path().join("pipeline.toml").to_str().unwrap(),
        "--stage",
        "msr",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let marker = std::fs::read_to_string(out_dir.join("FAILED")).unwrap();
    assert!(marker.contains("msr"));
    assert!(!out_dir.join("manifest.toml").exists());
}

#[test]
fn estimation_failure_exits_two() {
    let dir = fixture();
    let prices = std::fs::read_to_string(dir.path().join("price.csv")).unwrap();
    let flat: String = prices
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { format!("{l}\n") } else { format!("{},100\n", l.split(',').next().unwrap()) })
        .collect();
    std::fs::write(dir.path().join("price.csv"), flat).unwrap();
    let out = regimevol(&["run", "--config", dir.path().join("pipeline.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("output").join("FAILED").exists());
}

#[test]
fn simulate_writes_series_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = regimevol(&["simulate", "--scenario", "msr", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(files(dir.path()), ["regime.csv", "truth.csv", "x1.csv", "y.csv"]);
    let truth = std::fs::read_to_string(dir.path().join("truth.csv")).unwrap();
    assert!(truth.contains("sigma_1,2.000000"));
    let first = std::fs::read(dir.path().join("y.csv")).unwrap();
    regimevol(&["simulate", "--scenario", "msr", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(first, std::fs::read(dir.path().join("y.csv")).unwrap());
    let list = regimevol(&["simulate", "--list"]);
    assert!(String::from_utf8_lossy(&list.stdout).contains("location-scale"));
}

#[test]
fn oracle_self_check_passes() {
    let out = regimevol(&["test-oracle", "--instances", "100", "--reps", "10000"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{stdout}");
}
