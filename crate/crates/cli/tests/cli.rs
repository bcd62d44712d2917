use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twinbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinbeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn visibility_sweep_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = twinbeam(&[
        "visibility-sweep",
        "--out",
        out_dir(tmp.path()),
        "--points",
        "11",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("visibility_sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("detuning_hz,visibility"));
    assert_eq!(csv.lines().count(), 12);
    let manifest = fs::read_to_string(tmp.path().join("visibility_sweep.manifest.toml")).unwrap();
    assert!(manifest.contains("points = 11"));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["summary"]["rows"], 11);
}

#[test]
fn config_file_and_seed_flags_are_applied() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "[nopo]\nexcess_phase_noise = 0.051\n[oracle]\nn_samples = 65536\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let out = twinbeam(&[
        "correlation-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir(&dir),
        "--seed",
        "9",
        "--oracle",
        "--points",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("correlation_sweep.csv")).unwrap();
    assert!(csv
        .starts_with("detuning_hz,vx_minus_db,vy_plus_db,duan_value,entangled,vx_minus_oracle_db"));
    assert_eq!(csv.lines().count(), 4);
    let manifest = fs::read_to_string(dir.join("correlation_sweep.manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 9"));
    assert!(manifest.contains("excess_phase_noise = 0.051"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let out = twinbeam(&["coexistence-report", "--out", out_dir(&dir)]);
        assert!(out.status.success());
        let out = twinbeam(&[
            "correlation-sweep",
            "--out",
            out_dir(&dir),
            "--points",
            "25",
        ]);
        assert!(out.status.success());
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        fs::remove_dir_all(&dir).unwrap();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0].len(), 4);
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn errors_are_json_on_stderr_with_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[nopo]\nzeta = 1.2\n").unwrap();
    let out = twinbeam(&["visibility-sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "invalid_parameter");
    assert!(err["error"].as_str().unwrap().contains("nopo.zeta"));

    let out = twinbeam(&[
        "visibility-sweep",
        "--points",
        "1",
        "--out",
        out_dir(tmp.path()),
    ]);
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("sweep.points"));
}

#[test]
fn oracle_check_and_qnl_calibration_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(&cfg, "[oracle]\nn_samples = 262144\n").unwrap();
    let out = twinbeam(&[
        "oracle-check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir(tmp.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("oracle_check.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("quantity,analytic_db,oracle_db,difference_db")
    );
    assert_eq!(csv.lines().count(), 4);

    let out = twinbeam(&[
        "qnl-calibrate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir(tmp.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["summary"]["qnl_db"].as_f64().unwrap().abs() < 0.05);
    let spectrum = fs::read_to_string(tmp.path().join("qnl_calibration.csv")).unwrap();
    assert_eq!(
        spectrum.lines().next(),
        Some("freq_hz,variance,variance_db")
    );
}
