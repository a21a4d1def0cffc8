use std::fs;
use std::path::Path;
use std::process::Command;

use vdlab_cli::{main_with_args, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK};

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn run(config: &str, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["vdlab", "run", "--config", config, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    main_with_args(args)
}

#[test]
fn too_few_points_exits_with_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"identity-suite\"\n[grid]\npoints_per_axis = 3\n");
    assert_eq!(run(&cfg, &tmp.path().join("out"), &[]), EXIT_ERROR);
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_key_and_unknown_experiment_exit_with_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[numerics]\nstencil = 2\n");
    assert_eq!(run(&cfg, &tmp.path().join("a"), &[]), EXIT_ERROR);
    let cfg = write_config(tmp.path(), "");
    assert_eq!(run(&cfg, &tmp.path().join("b"), &["--experiment", "nope"]), EXIT_ERROR);
    assert_eq!(run(&cfg, &tmp.path().join("c"), &["--set", "physics.masses=[1.0, 2.0, 3.0]"]), EXIT_ERROR);
}

#[test]
fn zero_anchor_gives_zero_extrapolated_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"neutrino-limit\"\n[physics]\nlambda0 = 0.0\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), EXIT_OK);
    let mut reader = csv::Reader::from_path(out.join("neutrino.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "kind");
    assert_eq!(&header[2], "M2_probe1");
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let last = rows.last().unwrap();
    assert_eq!(&last[0], "extrapolated");
    for v in last.iter().skip(1) {
        assert_eq!(v.parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn failing_check_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"dispersion-scan\"\n[tolerances]\ndispersion = 1e-300\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), EXIT_CHECK_FAILED);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let failed = report["checks"].as_array().unwrap().iter().find(|c| c["id"] == "dirac.dispersion").unwrap();
    assert_eq!(failed["passed"], false);
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"identity-suite\"\n");
    let out = tmp.path().join("out");
    let code = run(&cfg, &out, &["--experiment", "dispersion-scan", "--seed", "7", "--refine-levels", "4"]);
    assert_eq!(code, EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let m = &report["manifest"];
    assert_eq!(m["experiment"], "dispersion-scan");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["numerics"]["refine_levels"], 4);
    assert_eq!(m["signature"], "(+-)");
    assert_eq!(m["include_conformal"], true);
    let levels = fs::read_to_string(out.join("dispersion-grid.csv")).unwrap();
    assert_eq!(levels.lines().count(), 1 + 2 * 4);
}

#[test]
fn csv_floats_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"dispersion-scan\"\n[physics]\nk_points = 7\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&cfg, &out, &[]), EXIT_OK);
    let mut reader = csv::Reader::from_path(out.join("dispersion.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["case", "m", "M", "k", "E_numeric", "E_closed", "abs_err"]
    );
    let ks: Vec<f64> = reader.records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(ks.len(), 14);
    assert_eq!(ks[0], -5.0);
    assert_eq!(ks[6], 5.0);
    assert_eq!(ks[1], -5.0 + 10.0 / 6.0);
}

#[test]
fn validate_reports_without_running() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"lambda-profile\"\n");
    assert_eq!(main_with_args(["vdlab", "validate", "--config", &cfg]), EXIT_OK);
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"lambda-profile\"\n[physics]\nsigma = -1.0\n");
    assert_eq!(main_with_args(["vdlab", "validate", "--config", &cfg]), EXIT_ERROR);
}

#[test]
fn environment_output_dir_wins_over_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"mass-landscape\"\n");
    let env_out = tmp.path().join("from-env");
    let flag_out = tmp.path().join("from-flag");
    let status = Command::new(env!("CARGO_BIN_EXE_vdlab"))
        .args(["run", "--config", &cfg, "--out", flag_out.to_str().unwrap()])
        .env("VDLAB_OUT", &env_out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert!(env_out.join("report.json").exists());
    assert!(env_out.join("mass-landscape.csv").exists());
    assert!(!flag_out.exists());
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS vacuum.mass_identity")), "{stdout}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[run]\nexperiment = \"lambda-profile\"\nseed = 11\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a, &[]), EXIT_OK);
    assert_eq!(run(&cfg, &b, &[]), EXIT_OK);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}
