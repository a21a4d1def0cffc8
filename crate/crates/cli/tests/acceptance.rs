//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use vdlab_cli::{execute, Report, RunConfig};

/// Non-unit constants so no factor of the identities cancels exactly.
const SKEWED: [&str; 2] = ["physics.mass=1.3", "physics.hbar=0.8"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(experiment: &str, overrides: &[&str]) -> Result<Report, String> {
    let mut set: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    set.push(format!("run.experiment=\"{experiment}\""));
    let config = RunConfig::from_toml("", &set).map_err(|e| e.to_string())?;
    execute(&config).map_err(|e| e.to_string())
}

/// Every named check must appear in at least one report and pass wherever it
/// appears; the detail lists the measured values.
fn require(reports: &[(&str, Report)], ids: &[&str]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for id in ids {
        let mut seen = false;
        for (label, r) in reports {
            if let Some(c) = r.check_named(id) {
                seen = true;
                passed &= c.passed;
                parts.push(format!("{label}:{id}={:.3e}", c.measured.0));
            }
        }
        if !seen {
            passed = false;
            parts.push(format!("{id} missing"));
        }
    }
    Outcome {
        passed,
        detail: parts.join(" "),
    }
}

fn run_criteria() -> Result<Vec<(&'static str, Outcome)>, String> {
    let identity = report("identity-suite", &[])?;
    let identity_skewed = report("identity-suite", &SKEWED)?;
    let convergence = report("convergence-suite", &[])?;
    let convergence_skewed = report("convergence-suite", &SKEWED)?;
    let lambda = report("lambda-profile", &[])?;
    let lambda_heavy = report("lambda-profile", &["physics.mass=2.0", "physics.x0=0.8"])?;
    let landscape = report("mass-landscape", &SKEWED)?;
    let action = report("action-gradient", &[])?;
    let action_skewed = report("action-gradient", &["physics.mass=1.4", "physics.hbar=0.9"])?;
    let dispersion = report("dispersion-scan", &[])?;
    let dispersion_alt = report("dispersion-scan", &["physics.mass=1.0", "physics.vacuum_mass=0.7"])?;

    let corpus = identity.manifest.config["numerics"]["corpus_size"].as_u64().unwrap_or(0);
    let mut out = Vec::new();

    let mut shift = require(
        &[
            ("analytic", identity.clone()),
            ("analytic-skewed", identity_skewed.clone()),
            ("stencil", convergence.clone()),
            ("stencil-skewed", convergence_skewed.clone()),
        ],
        &["kgops.shift_theorem"],
    );
    shift.passed &= corpus >= 10;
    shift.detail.push_str(&format!(" corpus={corpus}"));
    out.push(("shift theorem", shift));

    out.push((
        "phase-gradient identity",
        require(
            &[
                ("analytic", identity.clone()),
                ("analytic-skewed", identity_skewed.clone()),
                ("stencil", convergence.clone()),
                ("stencil-skewed", convergence_skewed.clone()),
            ],
            &["fields.phase_identity"],
        ),
    ));

    out.push((
        "plane-wave reduction",
        require(
            &[("default", identity.clone()), ("skewed", identity_skewed.clone())],
            &["kgops.plane_wave"],
        ),
    ));

    out.push((
        "action stationarity",
        require(
            &[("default", action), ("skewed", action_skewed)],
            &[
                "kgops.action_gradient.S",
                "kgops.action_gradient.rho",
                "kgops.action_gradient.lambda",
                "kgops.action_plane_wave",
            ],
        ),
    ));

    out.push((
        "lambda solver",
        require(
            &[("default", lambda), ("heavy", lambda_heavy)],
            &[
                "vacuum.rk4_order",
                "vacuum.forward_backward",
                "vacuum.homogeneity",
                "vacuum.lambda_closed_form",
            ],
        ),
    ));

    out.push((
        "vacuum-mass identity",
        require(
            &[
                ("corpus", identity.clone()),
                ("corpus-skewed", identity_skewed.clone()),
                ("landscape", landscape),
            ],
            &["vacuum.mass_identity", "vacuum.zero_lambda"],
        ),
    ));

    out.push((
        "clifford and squaring",
        require(
            &[
                ("identity", identity.clone()),
                ("identity-skewed", identity_skewed),
                ("convergence", convergence),
            ],
            &["dirac.clifford", "dirac.slash_square", "dirac.square"],
        ),
    ));

    let k_points = dispersion.manifest.config["physics"]["k_points"].as_u64().unwrap_or(0);
    let mut disp = require(
        &[("default", dispersion), ("vacuum-0.7", dispersion_alt)],
        &["dirac.dispersion"],
    );
    disp.passed &= k_points == 50;
    disp.detail.push_str(&format!(" k_points={k_points}"));
    out.push(("dispersion with vacuum mass", disp));

    out.push(("determinism", determinism()?));
    Ok(out)
}

/// Two binary runs per experiment with the same config and seed; every output file must match byte for byte.
fn determinism() -> Result<Outcome, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for exp in ["identity-suite", "neutrino-limit", "action-gradient"] {
        let config = tmp.path().join(format!("{exp}.toml"));
        fs::write(&config, format!("[run]\nexperiment = \"{exp}\"\nseed = 42\n")).map_err(|e| e.to_string())?;
        let dirs = [tmp.path().join(format!("{exp}-a")), tmp.path().join(format!("{exp}-b"))];
        for d in &dirs {
            let status = Command::new(env!("CARGO_BIN_EXE_vdlab"))
                .args(["run", "--config", config.to_str().unwrap(), "--out", d.to_str().unwrap()])
                .env_remove("VDLAB_OUT")
                .output()
                .map_err(|e| e.to_string())?;
            if status.status.code() != Some(0) {
                return Ok(Outcome {
                    passed: false,
                    detail: format!("{exp} exited with {:?}", status.status.code()),
                });
            }
        }
        compared += compare_dirs(&dirs[0], &dirs[1], &mut mismatches)?;
    }
    Ok(Outcome {
        passed: mismatches.is_empty() && compared > 0,
        detail: if mismatches.is_empty() {
            format!("{compared} files identical across repeated runs")
        } else {
            format!("differs: {}", mismatches.join(", "))
        },
    })
}

fn compare_dirs(a: &Path, b: &Path, mismatches: &mut Vec<String>) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    names.sort();
    if !names.iter().any(|n| n == "report.json") {
        mismatches.push(format!("{}: no report.json", a.display()));
    }
    for n in &names {
        let (x, y) = (fs::read(a.join(n)), fs::read(b.join(n)));
        match (x, y) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => mismatches.push(n.to_string_lossy().into_owned()),
        }
    }
    Ok(names.len())
}

fn main() -> ExitCode {
    let criteria = match run_criteria() {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL acceptance: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut failed = 0;
    for (name, o) in &criteria {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} [{name}] {}", o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
