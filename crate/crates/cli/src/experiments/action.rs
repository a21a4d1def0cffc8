use rayon::prelude::*;
use vdlab_core::fields::quantum_potential;
use vdlab_core::grid::Field;
use vdlab_core::kgops::{action_gradient_check, ActionGradientCheck, ActionParams, ActionVariable};
use vdlab_core::PolarDecomposition;

use super::{one_sided, Ctx};
use crate::error::CliResult;
use crate::report::{Check, Report, Table};

const VARIABLES: [ActionVariable; 3] = [ActionVariable::Action, ActionVariable::Density, ActionVariable::Lambda];

pub(super) fn run(ctx: &Ctx) -> CliResult<Report> {
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let order = cfg.stencil_order();
    let eps = cfg.numerics.gradient_epsilon;
    let params = ActionParams::flat(p.kappa, p.hbar, p.mass);
    let mut report = ctx.report(vdlab_core::DerivativeMode::Stencil.label())?;
    let grid = ctx.grid()?;

    let checks: Vec<(u64, ActionGradientCheck)> = cfg
        .corpus()
        .par_iter()
        .map(|&seed| -> CliResult<_> {
            let polar = ctx.core(ctx.manufactured(&grid, seed).polar(&grid))?;
            let q = ctx.core(quantum_potential(&polar, order))?;
            // Off the constraint surface so the lambda gradient does not vanish.
            let tilt = ctx.lambda_field(&grid, seed.wrapping_add(1))?;
            let omega2 = ctx.core(q.omega2.zip_map(&tilt.lambda, |w, t| w * (0.2 * (t - 0.5)).exp()))?;
            let lambda = ctx.lambda_field(&grid, seed)?;
            let c = action_gradient_check(&polar, &omega2, &lambda.lambda, &params, order, eps);
            Ok((seed, ctx.core(c)?))
        })
        .collect::<CliResult<_>>()?;

    let mut table = Table::new(
        "action-gradient",
        &["variable", "seed", "point", "finite_difference", "euler_lagrange"],
    );
    for (seed, c) in &checks {
        for cmp in &c.comparisons {
            for ((&j, &fd), &el) in cmp.points.iter().zip(&cmp.finite_difference).zip(&cmp.euler_lagrange) {
                table.push(vec![cmp.variable.label().into(), (*seed).into(), j.into(), fd.into(), el.into()]);
            }
        }
    }
    for v in VARIABLES {
        let dev = checks.iter().map(|(_, c)| c.get(v).relative_deviation).fold(0.0, f64::max);
        let magnitude = checks
            .iter()
            .map(|(_, c)| c.get(v).relative_magnitude())
            .fold(f64::INFINITY, f64::min);
        let corr = checks.iter().map(|(_, c)| c.get(v).correlation).fold(f64::INFINITY, f64::min);
        report.metric(&format!("action_gradient.{}.min_relative_magnitude", v.label()), magnitude);
        report.metric(&format!("action_gradient.{}.min_correlation", v.label()), corr);
        report.check(Check::at_most(
            &format!("kgops.action_gradient.{}", v.label()),
            dev,
            cfg.tolerances.action,
            format!(
                "finite-difference gradient (eps = {eps}) against the discrete Euler-Lagrange field, {} seeds",
                checks.len()
            ),
        ));
    }

    // Exact plane wave: every gradient vanishes.
    let pw_grid = one_sided(&cfg.grid_spec()).build()?;
    let pw = ctx.plane_wave(pw_grid.dim());
    let polar: PolarDecomposition = ctx.core(pw.polar(&pw_grid))?;
    let omega2 = Field::constant(pw_grid.clone(), 1.0);
    let lambda = Field::constant(pw_grid.clone(), 0.0);
    let c = ctx.core(action_gradient_check(&polar, &omega2, &lambda, &params, order, eps))?;
    let vanish = c.comparisons.iter().map(|x| x.relative_magnitude()).fold(0.0, f64::max);
    report.check(Check::at_most(
        "kgops.action_plane_wave",
        vanish,
        cfg.tolerances.action_vanish,
        "largest gradient at an exact plane wave, relative to m rho_max",
    ));
    report.tables.push(table);
    Ok(report)
}
