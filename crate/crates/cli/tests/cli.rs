use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn mpf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpf")).args(args).output().expect("binary runs")
}

fn run_planar(out: &Path, estimators: &str, extra: &[&str]) -> Output {
    let scenario = scenario("planar_2dof.toml");
    let mut args = vec![
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--estimators",
        estimators,
        "--trials",
        "2",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    mpf(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_estimator_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_planar(dir.path(), "cpf,kalman", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown estimator \"kalman\""), "{}", stderr(&out));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn reruns_without_timing_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_planar(a.path(), "cpf,mpf-ball", &["--no-timing", "--workers", "1"]).status.success());
    assert!(run_planar(b.path(), "cpf,mpf-ball", &["--no-timing", "--workers", "1"]).status.success());
    for file in ["experiment.csv", "timing.txt", "manifest.json", "traces/trial_0000.csv", "traces/trial_0001.csv"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(!x.is_empty(), "{file} is empty");
        assert_eq!(x, y, "{file} differs between reruns");
    }
}

#[test]
fn timing_table_has_one_row_per_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_planar(dir.path(), "cpf,mpf-uniform,mpf-particle,mpf-ball", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("timing.txt")).unwrap();
    for label in ["CPF", "MPF-Uniform", "MPF-Particle", "MPF-Ball"] {
        assert_eq!(table.lines().filter(|l| l.starts_with(label)).count(), 1, "{label} in\n{table}");
    }
}

#[test]
fn manifest_records_the_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_planar(dir.path(), "mpf-particle,cpf,cpf", &["--workers", "2"]).status.success());
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["seed"], 3);
    assert_eq!(m["trials"], 2);
    assert_eq!(m["workers"], 2);
    assert_eq!(m["timing"], true);
    assert_eq!(m["estimators"], serde_json::json!(["mpf-particle", "cpf"]));
    let sha = m["config_sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);
    assert!(sha.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(m["scenario_name"], "planar-2dof-point");
    let mut keys: Vec<&str> = m.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    let expected =
        ["config_sha256", "estimators", "scenario", "scenario_name", "seed", "timing", "trials", "versions", "workers"];
    assert_eq!(keys, expected);

    let csv = fs::read_to_string(dir.path().join("experiment.csv")).unwrap();
    let steps = csv.lines().count() - 1;
    assert_eq!(steps % 2, 0, "two estimators per timestep");
}

#[test]
fn sdf_slice_writes_a_rectangular_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slice.csv");
    let scenario = scenario("planar_2dof.toml");
    let out = mpf(&[
        "sdf-slice",
        "--scenario",
        scenario.to_str().unwrap(),
        "--axis",
        "z",
        "--index",
        "0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows: Vec<Vec<f64>> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 1);
    assert!(rows.iter().all(|r| r.len() == rows[0].len()));
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    assert!(values.iter().any(|v| *v < 0.0), "the obstacle shows up inside");
    assert!(values.iter().any(|v| *v > 0.0));
}

#[test]
fn sdf_slice_rejects_bad_axis_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slice.csv");
    let scenario = scenario("planar_2dof.toml");
    let s = scenario.to_str().unwrap();
    let p = path.to_str().unwrap();
    let bad_index = mpf(&["sdf-slice", "--scenario", s, "--axis", "z", "--index", "1", "--out", p]);
    assert_eq!(bad_index.status.code(), Some(2));
    assert!(stderr(&bad_index).contains("out of range"));
    let bad_axis = mpf(&["sdf-slice", "--scenario", s, "--axis", "w", "--index", "0", "--out", p]);
    assert_eq!(bad_axis.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn validate_accepts_every_shipped_scenario() {
    for name in ["planar_2dof.toml", "planar_3dof.toml", "spatial_7dof.toml"] {
        let path = scenario(name);
        let out = mpf(&["validate", "--scenario", path.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        assert!(String::from_utf8_lossy(&out.stdout).trim_end().ends_with("valid"));
    }
}

#[test]
fn validate_reports_bad_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "name = \"broken\"\ndimension = 5\n").unwrap();
    let out = mpf(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));

    let missing = dir.path().join("missing.toml");
    let out = mpf(&["validate", "--scenario", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
