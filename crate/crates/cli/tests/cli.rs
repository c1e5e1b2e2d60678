use std::path::Path;
use std::process::{Command, Output};

fn alpmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alpmp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lists_every_builtin() {
    let o = alpmp(&["list-scenarios"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in [
        "so3-bang-bang",
        "so3-singular",
        "so3-shoot",
        "classical-tm-lq",
        "wong-so3",
        "wong-flat",
    ] {
        assert!(out.contains(name), "{name} missing from\n{out}");
    }
}

#[test]
fn run_writes_artifacts_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = alpmp(&["run", "classical-tm-lq", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
    for f in ["trajectory.csv", "costate.csv", "audit.json", "report.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn singular_scenario_exits_with_audit_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = alpmp(&["run", "so3-singular", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  not_permanently_singular"));
}

#[test]
fn audit_accepts_the_artifacts_of_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = alpmp(&["run", "wong-so3", "--out", path(&run)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let audited = dir.path().join("audit");
    let o = alpmp(&[
        "audit",
        "wong-so3",
        "--traj",
        path(&run.join("trajectory.csv")),
        "--costate",
        path(&run.join("costate.csv")),
        "--out",
        path(&audited),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(audited.join("audit.json").is_file());
}

#[test]
fn validate_prints_axiom_reports() {
    let o = alpmp(&["validate", "so3-bang-bang"]);
    assert!(o.status.success());
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(reports.as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "scenario": "so3-bang-bang", "x0": [1.0]}"#,
    )
    .unwrap();
    let o = alpmp(&["run", path(&cfg), "--out", path(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`x0`"));

    std::fs::write(&cfg, r#"{"schema_version": 1, "horizon": {"t0": 0, "t1": "late"}}"#).unwrap();
    let o = alpmp(&["validate", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizon.t1"));

    let o = alpmp(&["run", "no-such-scenario"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn abnormal_multiplier_is_noted() {
    let dir = tempfile::tempdir().unwrap();
    let o = alpmp(&["run", "so3-monotone", "--z0", "abnormal", "--out", path(dir.path())]);
    assert!(o.status.code().is_some_and(|c| c <= 1));
    assert!(stdout(&o).contains("abnormal multiplier"));

    let o = alpmp(&["run", "wong-flat", "--z0", "abnormal", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`z0`"));
}

#[test]
fn overrides_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = alpmp(&[
        "run",
        "wong-flat",
        "--step",
        "0.005",
        "--tol",
        "1e-4",
        "--seed",
        "3",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["step"], 0.005);
    assert_eq!(report["tolerance"], 1e-4);
    assert_eq!(report["seed"], 3);
}
