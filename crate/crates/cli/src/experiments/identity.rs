use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vdlab_core::dirac::{build_gamma, eikonal_identity_check, GammaDim};
use vdlab_core::fields::phase_identity_residual;
use vdlab_core::kgops::{
    box_d, general_kg_residual, kg_residual_polar, kg_residual_wave, mass_substituted_residual, shift_residual,
    wave_form_identity,
};
use vdlab_core::vacuum::{vacuum_mass, MassBranch, VacuumField};

use super::{one_sided, Ctx};
use crate::error::CliResult;
use crate::report::{Cell, Check, Report, Table};

struct SeedResult {
    seed: u64,
    shift: f64,
    phase: f64,
    wave_form: f64,
    mass_identity: f64,
    closed_gap: f64,
    zero_lambda: bool,
    eikonal: f64,
}

pub(super) fn run(ctx: &Ctx) -> CliResult<Report> {
    let cfg = ctx.cfg;
    let mode = cfg.derivative_mode();
    let mut report = ctx.report(mode.label())?;
    let grid = ctx.grid()?;
    let rep = build_gamma(ctx.core(GammaDim::for_spacetime(grid.dim()))?);

    let per_seed: Vec<SeedResult> = cfg
        .corpus()
        .par_iter()
        .map(|&seed| -> CliResult<SeedResult> {
            let m = ctx.manufactured(&grid, seed);
            let pack = ctx.pack(&m, &grid, mode)?;
            let shift = shift_residual(&pack).relative();
            let phase_scale = pack.grad_action.iter().flatten().fold(0.0_f64, |a, s| a.max(s.abs())) / pack.hbar();
            let phase = ctx.core(phase_identity_residual(&pack))? / phase_scale.max(1.0);
            let wave_form = wave_form_identity(&pack).relative();

            let v = ctx.lambda_field(&grid, seed)?;
            let vm = ctx.core(vacuum_mass(&v, &pack, true, cfg.branch()))?;
            let sub = ctx.core(mass_substituted_residual(&pack, vm.m2.values()))?;
            let closed = ctx.core(mass_substituted_residual(&pack, &vm.m2_closed))?;
            let gen = ctx.core(general_kg_residual(&pack, &v.lambda))?;
            let scale = gen.residual.scale.max(sub.residual.scale).max(f64::MIN_POSITIVE);
            let gap = |f: &[num_complex::Complex64]| {
                pack.interior().iter().map(|&i| (f[i] - gen.field[i]).norm()).fold(0.0, f64::max) / scale
            };

            let zero = VacuumField::zero(grid.clone());
            let zero_lambda = [true, false].iter().all(|&inc| {
                vacuum_mass(&zero, &pack, inc, MassBranch::Plus)
                    .map(|z| z.m2.values().iter().all(|&x| x == 0.0))
                    .unwrap_or(false)
            });

            let e = ctx.core(eikonal_identity_check(&rep, &pack))?;
            Ok(SeedResult {
                seed,
                shift,
                phase,
                wave_form,
                mass_identity: gap(&sub.field),
                closed_gap: gap(&closed.field),
                zero_lambda,
                eikonal: e.clifford / e.mass_shell.scale.max(f64::MIN_POSITIVE),
            })
        })
        .collect::<CliResult<_>>()?;

    let mut table = Table::new("identity-suite", &["check", "seed", "relative_residual"]);
    let tol = &cfg.tolerances;
    let worst = |f: fn(&SeedResult) -> f64| per_seed.iter().map(f).fold(0.0, f64::max);
    let n = per_seed.len();
    for r in &per_seed {
        for (id, v) in [
            ("kgops.shift_theorem", r.shift),
            ("fields.phase_identity", r.phase),
            ("kgops.wave_form_identity", r.wave_form),
            ("vacuum.mass_identity", r.mass_identity),
            ("vacuum.closed_form_gap", r.closed_gap),
            ("dirac.eikonal_clifford", r.eikonal),
        ] {
            table.push(vec![Cell::from(id), r.seed.into(), v.into()]);
        }
    }
    report.check(Check::at_most(
        "kgops.shift_theorem",
        worst(|r| r.shift),
        tol.identity,
        format!("max over {n} seeds of |Qtilde phi - D.D phi| and |exp(iS/hbar) grad sqrt(rho) - D phi|, relative"),
    ));
    report.check(Check::at_most(
        "fields.phase_identity",
        worst(|r| r.phase),
        tol.identity,
        format!("max over {n} seeds of |(grad phi/phi - c.c.)/2 - (i/hbar) grad S|"),
    ));
    report.check(Check::at_most(
        "kgops.wave_form_identity",
        worst(|r| r.wave_form),
        tol.identity,
        "wave operator minus D.D phi against the expanded phase terms, relative",
    ));
    report.check(Check::at_most(
        "vacuum.mass_identity",
        worst(|r| r.mass_identity),
        tol.vacuum_identity,
        "D.D phi + (M^2/hbar^2) phi with the conformal M^2 against the general residual",
    ));
    report.check(Check::holds(
        "vacuum.zero_lambda",
        per_seed.iter().all(|r| r.zero_lambda),
        "lambda = 0 gives M^2 = 0 bitwise in both forms",
    ));
    report.check(Check::at_most(
        "dirac.eikonal_clifford",
        worst(|r| r.eikonal),
        tol.identity,
        "(gamma.grad S)^2 - (grad S.grad S) I on the corpus",
    ));
    report.metric("vacuum.closed_form_gap", worst(|r| r.closed_gap));

    // Plane-wave anchor on a one-sided copy of the grid.
    let pw_grid = one_sided(&cfg.grid_spec()).build()?;
    let pw = ctx.pack(&ctx.plane_wave(pw_grid.dim()), &pw_grid, mode)?;
    let polar = ctx.core(kg_residual_polar(&pw, None))?;
    let wave = ctx.core(kg_residual_wave(&pw))?;
    let bd = box_d(&pw);
    let bd_max = pw.interior().iter().map(|&i| bd[i].norm()).fold(0.0, f64::max);
    let pw_max = polar
        .motion
        .max_abs
        .max(polar.continuity.max_abs)
        .max(wave.quantum_force.max_abs)
        .max(wave.log_derivative.max_abs)
        .max(bd_max);
    for (id, v) in [
        ("kgops.plane_wave.motion", polar.motion.max_abs),
        ("kgops.plane_wave.continuity", polar.continuity.max_abs),
        ("kgops.plane_wave.wave", wave.quantum_force.max_abs),
        ("kgops.plane_wave.box_d", bd_max),
    ] {
        table.push(vec![Cell::from(id), Cell::from(""), v.into()]);
    }
    report.check(Check::at_most(
        "kgops.plane_wave",
        pw_max,
        tol.plane_wave,
        "constant rho, S = E t - p x: polar, wave and D.D residuals",
    ));

    // Gamma algebra.
    let mut clifford = 0.0_f64;
    let mut hermiticity = 0.0_f64;
    let mut slash_ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    for dim in [GammaDim::Two, GammaDim::Four] {
        let r = build_gamma(dim);
        clifford = clifford.max(r.clifford_defect());
        hermiticity = hermiticity.max(r.hermiticity_defect());
        for _ in 0..100 {
            // Dyadic entries keep every product exact.
            let a: Vec<f64> = (0..dim.spacetime_dim())
                .map(|_| rng.random_range(-128_i32..=128) as f64 / 8.0)
                .collect();
            let norm: f64 = a.iter().zip(r.metric()).map(|(x, g)| x * x / g).sum();
            let s = r.slash(&a);
            slash_ok &= &s * &s == r.identity() * num_complex::Complex64::new(norm, 0.0);
        }
    }
    report.check(Check::holds(
        "dirac.clifford",
        clifford == 0.0 && hermiticity == 0.0,
        "anticommutators equal 2 eta I and the hermiticity pattern holds, both representations",
    ));
    report.check(Check::holds(
        "dirac.slash_square",
        slash_ok,
        "(gamma.a)^2 = (a.a) I bitwise on 100 dyadic covectors per representation",
    ));

    // Squaring the Dirac operator: stencil convergence on the corpus.
    let square = super::convergence::square_study(ctx, &ctx.cfg.grid_spec())?;
    report.check(square.check);
    report.tables.push(table);
    report.tables.extend(square.tables);
    Ok(report)
}
