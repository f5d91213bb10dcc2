//! Smoke tests for the `floodml` binary: generate -> run -> compare.

use std::fs;
use std::path::Path;
use std::process::Command;

fn floodml() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floodml"))
}

fn write_config(dir: &Path, data_dir: &Path, out_dir: &Path, seed: u64) -> std::path::PathBuf {
    let config_path = dir.join(format!("run_{seed}.toml"));
    let config = format!(
        "rainfall_csv = {:?}\nflood_csv = {:?}\noutput_dir = {:?}\nseed = {seed}\n",
        data_dir.join("rainfall.csv").to_string_lossy(),
        data_dir.join("flood.csv").to_string_lossy(),
        out_dir.to_string_lossy(),
    );
    fs::write(&config_path, config).unwrap();
    config_path
}

#[test]
fn generate_run_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");

    let status = floodml()
        .args(["generate", "--seed", "3", "--out"])
        .arg(&data_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(data_dir.join("rainfall.csv").is_file());
    assert!(data_dir.join("flood.csv").is_file());

    let out_a = dir.path().join("out_a");
    let out_b = dir.path().join("out_b");
    for (out, seed) in [(&out_a, 1u64), (&out_b, 2u64)] {
        let config_path = write_config(dir.path(), &data_dir, out, seed);
        let output = floodml().args(["run", "--config"]).arg(&config_path).output().unwrap();
        assert!(
            output.status.success(),
            "run failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("Model,Accuracy,Precision,Recall"));
        assert!(out.join("summary.csv").is_file());
        assert!(out.join("provenance.txt").is_file());
    }

    let output = floodml().arg("compare").arg(&out_a).arg(&out_b).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("Binary Logistic Regression"));
    assert!(stdout.contains("Accuracy"));
}

#[test]
fn run_with_missing_config_exits_nonzero() {
    let output = floodml().args(["run", "--config", "does-not-exist.toml"]).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error"), "stderr: {stderr}");
}

#[test]
fn run_failure_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    fs::write(
        &config_path,
        "rainfall_csv = \"missing.csv\"\nflood_csv = \"missing.csv\"\n",
    )
    .unwrap();
    let output = floodml().args(["run", "--config"]).arg(&config_path).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("stage ingest"), "stderr: {stderr}");
}

#[test]
fn generate_honors_a_custom_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.toml");
    fs::write(&spec_path, "stations = 2\nstart_year = 2019\nend_year = 2020\n").unwrap();
    let out = dir.path().join("data");
    let status = floodml()
        .args(["generate", "--spec"])
        .arg(&spec_path)
        .args(["--seed", "9", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rainfall = fs::read_to_string(out.join("rainfall.csv")).unwrap();
    assert_eq!(rainfall.lines().count(), 1 + 2 * 2 * 12);
}
