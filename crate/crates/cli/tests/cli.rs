use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_su11");

const SMALL: &str = r#"
[physics]
pump_waist = "70um"
crystal_length = "3mm"

[lattice]
points = 32
theta_max = "60mrad"

[calibration]
slope = 142.0
couplings = [0.005, 0.01, 0.02, 0.04]

[gains]
first = 1.0
second = 4.0

[single_crystal]
gain = 1.0
modes = [0]
overlap_size = 8

[interferometer]
air_gap = "optimize"
search_min = "0um"
search_max = "1mm"
search_samples = 5
resolution = "100um"
truncation = 12

[squeezing]
modes = 4
truncation = 12

[asymmetry]
gain = 6.0
overlap_size = 8
"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn su11(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg("1")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_pump_width_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physics]\ncrystal_length = \"3mm\"\n");
    let out = su11(&["calibrate"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn unitless_length_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physics]\nsigma = \"49.5\"\n");
    assert_eq!(su11(&["calibrate"], &cfg, &dir.path().join("out")).status.code(), Some(1));
}

#[test]
fn unknown_subcommand_and_missing_config_exit_one() {
    let out = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(BIN).arg("calibrate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn failed_propagation_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[propagator]\nmax_steps = 2\n");
    let cfg = write_config(dir.path(), &body);
    assert_eq!(su11(&["single-crystal"], &cfg, &dir.path().join("out")).status.code(), Some(2));
}

#[test]
fn failed_fit_exits_with_fit_code() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("couplings = [0.005, 0.01, 0.02, 0.04]", "couplings = [0.01, 0.01]");
    let cfg = write_config(dir.path(), &body);
    assert_eq!(su11(&["calibrate"], &cfg, &dir.path().join("out")).status.code(), Some(3));
}

#[test]
fn toy_calibration_recovers_crystal_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[physics]\nmodel = \"diagonal-toy\"\nsigma = \"50um\"\ncrystal_length = \"3mm\"\n[lattice]\npoints = 8\n\
         [calibration]\ncouplings = [50.0, 200.0, 400.0, 700.0, 1000.0]\n",
    );
    let out = dir.path().join("out");
    assert!(su11(&["calibrate"], &cfg, &out).status.success());
    let fit = read_json(&out.join("fit.json"));
    let slope = fit["slope"].as_f64().unwrap();
    assert!((slope / 3e-3 - 1.0).abs() < 1e-6, "slope {slope}");
    assert!((fit["amplitude"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn empty_mode_list_writes_lambdas_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("modes = [0]\noverlap", "modes = []\noverlap"));
    let out = dir.path().join("out");
    assert!(su11(&["single-crystal"], &cfg, &out).status.success());
    assert!(out.join("lambdas.csv").exists());
    assert!(!out.join("modes.csv").exists());
}

#[test]
fn balanced_run_has_full_visibility_at_zero_gap() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL
        .replace("second = 4.0", "second = 1.0")
        .replace("air_gap = \"optimize\"\nsearch_min = \"0um\"\nsearch_max = \"1mm\"\nsearch_samples = 5\nresolution = \"100um\"", "air_gap = \"0um\"");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let run = su11(&["interferometer"], &cfg, &out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let f = read_json(&out.join("fringe.json"));
    assert!((f["visibility"].as_f64().unwrap() - 100.0).abs() < 1e-6);
    assert!(f["fringe_offset"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(f["air_gap"].as_f64().unwrap(), 0.0);
}

#[test]
fn sweep_excluding_the_optimum_warns_about_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("truncation = 12\n\n[squeezing]", "truncation = 12\nsweep = { from = \"0um\", to = \"200um\", samples = 3 }\n\n[squeezing]");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let run = su11(&["sweep-deltaz"], &cfg, &out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("boundary"));
    let f = read_json(&out.join("fringe.json"));
    assert_eq!(f["air_gap_on_boundary"], Value::Bool(true));
    assert!(!read_json(&out.join("manifest.json"))["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_alias_requires_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(su11(&["sweep-deltaz"], &cfg, &dir.path().join("out")).status.code(), Some(1));
}

#[test]
fn zero_gain_squeezing_report_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("first = 1.0\nsecond = 4.0", "first = 0.0\nsecond = 0.0");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let run = su11(&["squeezing"], &cfg, &out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out.join("squeezing.json"));
    for row in report["rows"].as_array().unwrap() {
        for method in ["direct", "exact"] {
            for key in ["squeezing", "anti_squeezing"] {
                let v = row[method][key].as_f64().unwrap();
                assert!(v.abs() < 1e-9, "{method} {key} = {v}");
            }
        }
    }
}

#[test]
fn manifest_echoes_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let run = Command::new(BIN)
        .args(["asymmetry", "--seed", "7", "--workers", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(run.status.success());
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "asymmetry");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config"]["physics"]["lattice_points"], 32);
    assert_eq!(m["slope"]["value"], 142.0);
}
