use std::path::Path;
use std::process::{Command, Output};

fn cvqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqkd")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "schema_version = 1\nn_symbols = 16384\nseeds = [5, 6]\n";

#[test]
fn run_writes_report_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", SMALL);
    let out = tmp.path().join("out");
    let o = cvqkd(&["--workers", "1", "run", "--scenario", &scenario, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    assert_eq!(report["summary"]["runs"], 2);
    let csv = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn missing_scenario_is_a_schema_error_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = cvqkd(&["run", "--scenario", "/nonexistent/s.toml", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_and_presets_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", "schema_version = 1\n[rx]\nbandwith_quantum = 1e9\n");
    let out = tmp.path().join("out");
    assert_eq!(cvqkd(&["run", "--scenario", &scenario, "--out", out.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cvqkd(&["run", "--preset", "no-such-preset", "--out", out.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cvqkd(&["run", "--out", out.to_str().unwrap()]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_sweep_parameter_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", SMALL);
    let out = tmp.path().join("out");
    let o = cvqkd(&[
        "sweep",
        "--scenario",
        &scenario,
        "--parameter",
        "bogus",
        "--values",
        "1,2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b_fil"));
    assert!(!out.exists());
}

#[test]
fn pipeline_failure_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", &format!("{SMALL}[tx]\nmean_photons = 1e9\n"));
    let out = tmp.path().join("out");
    let o = cvqkd(&["run", "--scenario", &scenario, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("transmit") && err.contains("seed 5"), "{err}");
    assert!(!out.exists());
}

#[test]
fn sweep_rows_cover_values_and_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", SMALL);
    let out = tmp.path().join("out");
    let o = cvqkd(&[
        "--workers",
        "2",
        "sweep",
        "--scenario",
        &scenario,
        "--parameter",
        "length_km",
        "--values",
        "5,13.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}

#[test]
fn plan_and_calibrate_produce_json() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", SMALL);
    let out = tmp.path().join("out");
    let dir = out.to_str().unwrap();
    assert!(cvqkd(&["plan", "--scenario", &scenario, "--out", dir]).status.success());
    let plan: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("plan.json")).unwrap()).unwrap();
    let demand = plan["plan"]["aggregate_demand"].as_f64().unwrap();
    assert!((demand - 3.0e6).abs() < 1.0);
    assert!(cvqkd(&["calibrate", "--scenario", &scenario, "--seed-override", "9", "--out", dir]).status.success());
    let cal: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("calibration.json")).unwrap()).unwrap();
    let records = cal["calibrations"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["seed"], 9);
}

#[test]
fn exported_capture_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write(tmp.path(), "s.toml", SMALL);
    let out = tmp.path().join("out");
    let o = cvqkd(&["export-waveform", "--scenario", &scenario, "--stage", "capture", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(out.join("capture.cvqw")).unwrap();
    let cap = cvqkd_core::Capture::read(&mut bytes.as_slice(), 250e6).unwrap();
    assert_eq!(cap.len(), 16384 * 16);
    let saved = std::fs::read_to_string(out.join("scenario.toml")).unwrap();
    let back = cvqkd::scenario::Scenario::from_toml_str(&saved).unwrap();
    assert_eq!(back.n_symbols, 16384);
}
