use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dirac_weyl::cli::{RunReport, ScenarioConfig};
use tempfile::TempDir;

fn run(dir: &TempDir, subcommand: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.path().join(format!("{subcommand}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join(format!(
        "out-{subcommand}-{}",
        extra.join("").replace('-', "")
    ));
    let output = Command::new(env!("CARGO_BIN_EXE_dirac-weyl"))
        .arg(subcommand)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (output, out)
}

fn report(out: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const FREE: &str = r#"{"schema_version": 1, "scenario": "free_dirac_p1"}"#;

#[test]
fn weyl_on_free_dirac_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(&dir, "weyl", FREE, &[]);
    assert_eq!(
        output.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let csv = fs::read_to_string(out.join("msamples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "re_lambda,im_lambda,re_m_00,im_m_00,norm_residual,eq339,eq340,schur_norm,converged,l_used"
    );
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let re: f64 = fields[2].parse().unwrap();
        let im: f64 = fields[3].parse().unwrap();
        assert!(re.abs() < 1e-8 && (im - 1.0).abs() < 1e-8, "{line}");
        assert_eq!(fields[8], "true");
    }
    assert_eq!(report(&out).exit_code, 0);
}

#[test]
fn unsupported_schema_version_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run(
        &dir,
        "weyl",
        r#"{"schema_version": 7, "scenario": "free_dirac_p1"}"#,
        &[],
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run(
        &dir,
        "classify",
        r#"{"schema_version": 1, "scenario": "free_dirac_p1", "colour": "blue"}"#,
        &[],
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run(
        &dir,
        "classify",
        r#"{"schema_version": 1, "scenario": "nope"}"#,
        &[],
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("free_dirac_p1"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let output = Command::new(env!("CARGO_BIN_EXE_dirac-weyl"))
        .args(["weyl", "--config", "/nonexistent/dirac.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("free.json");
    fs::write(&cfg, FREE).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_dirac-weyl"))
        .args(["classify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

const STRIP: &str = r#"{"schema_version": 1, "scenario": "almost_fsa_canonical",
    "lambda_grid": {"kind": "list", "points": [[0.0, 0.5], [0.0, 2.0]]}}"#;

#[test]
fn strip_lambda_is_refused_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(&dir, "weyl", STRIP, &[]);
    assert_eq!(output.status.code(), Some(3));
    let r = report(&out);
    assert!(r.samples[0].m.is_none());
    assert!(r.samples[1].m.is_some());
}

#[test]
fn forced_strip_lambda_is_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = run(&dir, "weyl", STRIP, &["--force"]);
    let r = report(&out);
    assert!(r.force);
    assert_eq!(r.samples[0].label.as_deref(), Some("unwarranted regime"));
}

#[test]
fn sweep_skips_strip_points() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(&dir, "sweep", STRIP, &[]);
    assert_eq!(output.status.code(), Some(0));
    let r = report(&out);
    assert!(r.samples[0].m.is_none());
}

#[test]
fn verify_passes_on_a_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(&dir, "verify", FREE, &[]);
    assert_eq!(
        output.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&output.stdout)
    );
    let r = report(&out);
    assert!(!r.verdicts.is_empty());
    assert!(out.join("defects.csv").exists());
}

#[test]
fn loose_integration_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "scenario": "exp_decay_p1",
        "tolerances": {"rtol": 1e-3, "atol": 1e-3, "output_step": 0.2}}"#;
    let (output, _) = run(&dir, "verify", cfg, &[]);
    assert_eq!(
        output.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&output.stdout)
    );
}

#[test]
fn sweep_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "scenario": "exp_decay_p1",
        "lambda_grid": {"kind": "rectangle", "re": [-1.0, 1.0], "im": [1.0, 2.0], "counts": [3, 3]}}"#;
    let (a, out_a) = run(&dir, "sweep", cfg, &["--threads", "1"]);
    let (b, out_b) = run(&dir, "sweep", cfg, &["--threads", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let csv_a = fs::read(out_a.join("msamples.csv")).unwrap();
    let csv_b = fs::read(out_b.join("msamples.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 10);
    assert_eq!(
        report(&out_a).cauchy_riemann.len(),
        report(&out_b).cauchy_riemann.len()
    );
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = run(
        &dir,
        "weyl",
        r#"{"schema_version": 1, "scenario": "constant_nonhermitian"}"#,
        &[],
    );
    let first = fs::read(out.join("msamples.csv")).unwrap();
    let echoed = serde_json::to_string(&report(&out).config).unwrap();
    assert!(ScenarioConfig::from_json(&echoed)
        .unwrap()
        .scenario
        .is_some());
    let (output, again) = run(&dir, "weyl", &echoed, &["--threads", "2"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(fs::read(again.join("msamples.csv")).unwrap(), first);
}

#[test]
fn defect_on_finite_interval_writes_the_finite_table() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(
        &dir,
        "defect",
        r#"{"schema_version": 1, "scenario": "hermitian_finite"}"#,
        &[],
    );
    assert_eq!(output.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("defects.csv")).unwrap();
    assert!(csv.starts_with("re_lambda,im_lambda,length,n,kernel_dim"));
    assert!(csv.lines().nth(1).unwrap().ends_with(",PASS"));
}

#[test]
fn json_format_writes_only_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(&dir, "weyl", FREE, &["--format", "json"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(out.join("report.json").exists());
    assert!(!out.join("msamples.csv").exists());
}
