use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critprobe")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn gap_of_single_qubit_equals_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "gap.toml", "command = \"gap\"\nlambda = 0.1\n");
    let o = run(dir.path(), &["gap", "--config", &cfg, "--out", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/gap.csv"));
    assert_eq!(rows[0], ["lambda[omega0]", "gap[omega0]", "null_modes", "modes"]);
    let gap: f64 = rows[1][1].parse().unwrap();
    assert!((gap - 0.1).abs() < 1e-9);
    assert_eq!(rows[1][2], "1");
}

#[test]
fn sse_check_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sse.json", r#"{"command": "sse-check", "n_traj": 50, "samples": 3}"#);
    for out in ["a", "b"] {
        let o = run(dir.path(), &["sse-check", "--config", &cfg, "--out", out, "--threads", "1"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a/sse-check.csv")).unwrap();
    let b = fs::read(dir.path().join("b/sse-check.csv")).unwrap();
    assert_eq!(a, b);

    let o = run(dir.path(), &["sse-check", "--config", &cfg, "--out", "c", "--seed", "8"]);
    assert!(o.status.success());
    assert_ne!(a, fs::read(dir.path().join("c/sse-check.csv")).unwrap());
}

#[test]
fn sidecar_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tq.toml", "command = \"two-qubit-qfi\"\ngrid = { min = 0.1, max = 0.3, points = 3 }\n");
    let o = run(dir.path(), &["two-qubit-qfi", "--config", &cfg, "--out", "first"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("first/two-qubit-qfi.json")).unwrap()).unwrap();
    assert_eq!(sidecar["schema_version"], 1);
    assert_eq!(sidecar["config"]["g"], 0.2);
    assert!(sidecar["defaults_applied"].as_array().unwrap().iter().any(|d| d.as_str().unwrap().starts_with("g =")));

    let o = run(dir.path(), &["two-qubit-qfi", "--config", "first/two-qubit-qfi.json", "--out", "second"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("first/two-qubit-qfi.csv")).unwrap(),
        fs::read(dir.path().join("second/two-qubit-qfi.csv")).unwrap()
    );
}

#[test]
fn out_of_range_theta_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "command = \"single-qubit-dynamics\"\nlambda = 0.1\ntheta = 4\n");
    let o = run(dir.path(), &["single-qubit-dynamics", "--config", &cfg, "--out", "out"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[validation]:") && err.contains("theta"), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn empty_config_names_the_missing_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "");
    let o = run(dir.path(), &["gap", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`command`"));
}

#[test]
fn all_violations_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "command = \"h-scan\"\nN = 9\nbogus = 1\n");
    let o = run(dir.path(), &["h-scan", "--config", &cfg]);
    let err = stderr(&o);
    assert!(err.contains("lambda") && err.contains("`N`") && err.contains("bogus"), "{err}");
}

#[test]
fn probe_dephasing_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", "command = \"ising-scan\"\nN = 2\ndissipator_sites = [1, 2, 3]\n");
    let o = run(dir.path(), &["ising-scan", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("probe"));
}

#[test]
fn mismatched_command_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", "command = \"gap\"\n");
    let o = run(dir.path(), &["sse-check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`gap`"));
}

#[test]
fn unknown_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]:"));
}

#[test]
fn single_qubit_dynamics_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.toml",
        "command = \"single-qubit-dynamics\"\nlambda = 0.3\ntheta = 1.0\nphi = 0.5\nt_max = 10\nsamples = 11\n",
    );
    let o = run(dir.path(), &["single-qubit-dynamics", "--config", &cfg, "--out", "."]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("single-qubit-dynamics.csv"));
    assert_eq!(rows.len(), 12);
    for row in &rows[1..] {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        for c in 1..4 {
            assert!((v[c] - v[c + 3]).abs() < 1e-8, "{row:?}");
        }
    }
}

#[test]
fn exceptional_point_has_no_closed_form_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", "command = \"single-qubit-dynamics\"\nlambda = 1.0\nsamples = 3\n");
    let o = run(dir.path(), &["single-qubit-dynamics", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("single-qubit-dynamics.csv"));
    assert!(rows[1..].iter().all(|r| r[4] == "NA"));
}

#[test]
fn delta_g_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", "command = \"delta-g\"\nN = 2\nt = 20\ngrid = { min = 1e-3, max = 1e-2, points = 2 }\n");
    let o = run(dir.path(), &["delta-g", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("delta-g.csv"));
    assert_eq!(rows[0], ["lambda[J]", "G_corr[1/J^2]", "G_uncorr[1/J^2]", "delta_G"]);
    for r in &rows[1..] {
        let v: Vec<f64> = r.iter().map(|c| c.parse().unwrap()).collect();
        assert!((v[3] - (v[1] - v[2]) / v[1]).abs() < 1e-9);
    }
}
