use std::path::Path;
use std::process::{Command, Output};

use cheeger_core::harness::{read_report, ExperimentId, Status};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheeger-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn riccati_eval_prints_json() {
    let o = lab(&[
        "riccati", "eval", "--n", "2", "--K", "1", "--H", "-2", "--t", "0.25", "--oracle",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["psi"].as_f64().unwrap() - (-3.440_238_619_835_94)).abs() < 1e-10);
    assert!((v["T"].as_f64().unwrap() - 0.5_f64.atanh()).abs() < 1e-12);
    assert_eq!(v["envelope_nonpositive_rho"].as_f64(), Some(2.0));
    assert!(v["oracle"]["abs_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn riccati_eval_past_blow_up_has_no_value() {
    let o = lab(&["riccati", "eval", "--n", "2", "--K", "0", "--H", "-1", "--t", "2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["psi"].is_null());
    assert_eq!(v["T"].as_f64(), Some(1.0));
}

#[test]
fn riccati_eval_infinite_existence_time() {
    let o = lab(&["riccati", "eval", "--n", "3", "--K", "0", "--H", "2", "--t", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["T"].is_null());
    assert_eq!(v["T_infinite"].as_bool(), Some(true));
    assert!((v["psi"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn invalid_parameters_exit_with_config_code() {
    assert_eq!(
        code(&lab(&[
            "riccati", "eval", "--n", "1", "--K", "0", "--H", "0", "--t", "1"
        ])),
        2
    );
    assert_eq!(
        code(&lab(&[
            "riccati", "eval", "--n", "2", "--K", "-1", "--H", "0", "--t", "1"
        ])),
        2
    );
    assert_eq!(code(&lab(&["suite", "--format", "xml"])), 2);
    assert_eq!(code(&lab(&["no-such-command"])), 2);
}

#[test]
fn bad_config_files_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[tube]\nbins = 1\n").unwrap();
    assert_eq!(code(&lab(&["suite", "--config", path(&cfg)])), 2);
    std::fs::write(&cfg, "[tube]\nno_such_key = 3\n").unwrap();
    assert_eq!(code(&lab(&["suite", "--config", path(&cfg)])), 2);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&lab(&["suite", "--config", path(&missing)])), 2);
    let mesh = dir.path().join("missing.off");
    assert_eq!(
        code(&lab(&[
            "spectral",
            "--mesh",
            path(&mesh),
            "--out-dir",
            path(dir.path())
        ])),
        2
    );
}

#[test]
fn empty_suite_writes_an_empty_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "experiments = []\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(&["suite", "--config", path(&cfg), "--out-dir", path(&out)]);
    assert_eq!(code(&o), 0);
    let report = read_report(out.join("report.json")).unwrap();
    assert!(report.pass && report.experiments.is_empty());
    assert!(out.join("timings.json").exists());
}

#[test]
fn cheeger_subcommand_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["cheeger", "--seed", "7", "--out-dir", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_report(dir.path().join("report.json")).unwrap();
    assert_eq!(report.seed, 7);
    assert_eq!(report.experiments.len(), 1);
    let e = report.experiment(ExperimentId::CheegerBound).unwrap();
    assert_eq!(e.status, Status::Pass);
}

#[test]
fn tube_subcommand_writes_csv_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["tube", "--format", "csv", "--svg", "--out-dir", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    for name in [
        "metrics.csv",
        "checks.csv",
        "tube_sphere.csv",
        "tube_torus.csv",
        "tube_profiles.svg",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(dir.path().join("tube_sphere.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("a,f,V0a"));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn shipped_config_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let cfg = cheeger_core::harness::ExperimentConfig::load(path).unwrap();
    assert_eq!(cfg, cheeger_core::harness::ExperimentConfig::default());
}
