use std::sync::Arc;

use rayon::prelude::*;
use vdlab_core::grid::SpacetimeGrid;
use vdlab_core::kgops::{general_kg_residual, mass_substituted_residual};
use vdlab_core::manufactured::{ManufacturedPolar, Profile, Term};
use vdlab_core::vacuum::{
    assemble_study, branch_mass, lambda_residual, mass_constancy_residual, neutrino_row, solve_lambda_static_1d,
    vacuum_mass, LambdaProtocol, LambdaSolverConfig, LimitClass, NeutrinoStudyConfig, StaticLambdaOde, VacuumField,
};
use vdlab_core::DerivativeMode;

use super::{ratios, Ctx};
use crate::error::CliResult;
use crate::report::{Cell, Check, Report, Table};

impl Ctx<'_> {
    fn density(&self) -> Profile {
        Profile::gaussian_log_density(self.cfg.physics.sigma, self.cfg.physics.rho0)
    }

    fn spatial_sign(&self) -> f64 {
        1.0 / self.cfg.grid_spec().metric[1]
    }

    fn solver_config(&self) -> LambdaSolverConfig {
        let n = &self.cfg.numerics;
        LambdaSolverConfig {
            steps_per_cell: n.steps_per_cell,
            delta_u: n.delta_u,
            delta_q: n.delta_q,
        }
    }

    fn solve(&self, grid: &Arc<SpacetimeGrid>, lambda0: f64) -> CliResult<VacuumField> {
        let p = &self.cfg.physics;
        let v = solve_lambda_static_1d(grid, &self.density(), p.mass, p.hbar, lambda0, p.x0, self.solver_config());
        self.core(v)
    }

    /// Static Gaussian density with `S = 0`, lifted onto the 1+1 grid.
    fn static_pack(&self, grid: &Arc<SpacetimeGrid>) -> CliResult<vdlab_core::DerivativePack> {
        let p = &self.cfg.physics;
        let m = ManufacturedPolar {
            ln_rho: self.density().lift(grid.dim(), 1),
            action: Profile::zero(grid.dim()),
            hbar: p.hbar,
            mass: p.mass,
        };
        self.pack(&m, grid, self.cfg.derivative_mode())
    }

    fn require_1d(&self) -> CliResult<()> {
        if self.cfg.grid_spec().origin.len() != 2 {
            return Err(crate::error::CliError::config(
                "grid.dim",
                format!("{} runs on a 1+1 grid", self.exp.name()),
            ));
        }
        Ok(())
    }
}

/// `lambda(x) = c |x|^a exp(x^2 / (2 sigma^2))` with `a = -s m^2 sigma^2 / hbar^2 - 2`,
/// the closed-form solution for a Gaussian density, normalised to `lambda(x0) = lambda0`.
fn closed_form(ctx: &Ctx, lambda0: f64, x: f64) -> f64 {
    let p = &ctx.cfg.physics;
    let a = -ctx.spatial_sign() * (p.mass * p.sigma / p.hbar).powi(2) - 2.0;
    let shape = |x: f64| x.abs().powf(a) * (x * x / (2.0 * p.sigma * p.sigma)).exp();
    lambda0 * shape(x) / shape(p.x0)
}

pub(super) fn lambda_profile(ctx: &Ctx) -> CliResult<Report> {
    ctx.require_1d()?;
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let tol = &cfg.tolerances;
    let mut report = ctx.report(cfg.derivative_mode().label())?;
    let grid = ctx.grid()?;
    let v = ctx.solve(&grid, p.lambda0)?;

    let axis = grid.axis(1).clone();
    let mut table = Table::new("lambda-profile", &["x", "lambda", "lambda_exact", "abs_err"]);
    let mut closed = 0.0_f64;
    for k in 0..axis.points {
        let x = axis.coord(k);
        let got = v.lambda.values()[grid.ravel(&[0, k])];
        let exact = closed_form(ctx, p.lambda0, x);
        let err = (got - exact).abs();
        closed = closed.max(if exact == 0.0 { err } else { err / exact.abs() });
        table.push(vec![x.into(), got.into(), exact.into(), err.into()]);
    }
    report.check(Check::at_most(
        "vacuum.lambda_closed_form",
        closed,
        tol.closure,
        "solver nodes against c |x|^a exp(x^2/(2 sigma^2)), relative",
    ));

    // Step halving of a single integration across the domain.
    let density = ctx.density();
    let ode = ctx.core(StaticLambdaOde::new(&density, p.mass, p.hbar, ctx.spatial_sign()))?;
    let ode = ode.with_thresholds(cfg.numerics.delta_u, cfg.numerics.delta_q);
    let (lo, hi) = (axis.origin, axis.origin + axis.extent);
    let far = if (p.x0 - lo).abs() > (hi - p.x0).abs() { lo } else { hi };
    // A zero anchor makes every error zero; use a unit anchor for the order checks.
    let anchor = if p.lambda0 == 0.0 { 1.0 } else { p.lambda0 };
    let exact = closed_form(ctx, anchor, far);
    let steps: Vec<usize> = (0..=cfg.numerics.refine_levels).map(|k| 10 << k).collect();
    let mut errors = Vec::new();
    let mut rk4 = Table::new("lambda-rk4", &["steps", "lambda", "abs_err", "ratio"]);
    for &n in &steps {
        let got = ctx.core(ode.integrate(p.x0, anchor, far, n))?;
        errors.push((got - exact).abs());
        let r = if errors.len() < 2 { f64::NAN } else { errors[errors.len() - 2] / errors[errors.len() - 1] };
        rk4.push(vec![n.into(), got.into(), (got - exact).abs().into(), r.into()]);
    }
    report.check(Check::within(
        "vacuum.rk4_order",
        &ratios(&errors),
        tol.rk4_ratio_min,
        tol.rk4_ratio_max,
        format!("error ratio per step halving from x0 = {} to {far}, steps {steps:?}", p.x0),
    ));

    let n = ((far - p.x0).abs() * cfg.numerics.steps_per_unit as f64).ceil().max(1.0) as usize;
    let there = ctx.core(ode.integrate(p.x0, anchor, far, n))?;
    let back = ctx.core(ode.integrate(far, there, p.x0, n))?;
    report.check(Check::at_most(
        "vacuum.forward_backward",
        (back - anchor).abs() / anchor.abs(),
        tol.closure,
        format!("x0 -> {far} -> x0 with {n} steps each way, relative"),
    ));

    let base = ctx.solve(&grid, anchor)?;
    let doubled = ctx.solve(&grid, 2.0 * anchor)?;
    let tripled = ctx.solve(&grid, 3.0 * anchor)?;
    let exact_double = doubled.lambda == base.scaled(2.0).lambda;
    let triple_dev = tripled
        .lambda
        .values()
        .iter()
        .zip(base.lambda.values())
        .map(|(a, b)| if *a == 0.0 { (a - 3.0 * b).abs() } else { (a - 3.0 * b).abs() / a.abs() })
        .fold(0.0, f64::max);
    let mut homogeneity = Check::at_most(
        "vacuum.homogeneity",
        triple_dev,
        tol.homogeneity,
        "lambda(3 lambda0) / 3 lambda(lambda0) - 1; lambda(2 lambda0) = 2 lambda(lambda0) bitwise",
    );
    homogeneity.passed &= exact_double;
    report.check(homogeneity);

    // Grid constraint: the solved field fed back through stencils.
    let levels = ctx.levels(&cfg.grid_spec())?;
    let residuals: Vec<f64> = levels
        .par_iter()
        .map(|g| -> CliResult<f64> {
            let v = ctx.solve(g, p.lambda0)?;
            let pack = ctx.static_pack(g)?;
            Ok(ctx.core(lambda_residual(&v, &pack, cfg.numerics.delta_q))?.max_abs)
        })
        .collect::<CliResult<_>>()?;
    let constraint = if residuals.iter().all(|&r| r == 0.0) {
        Check::holds("vacuum.constraint", true, "lambda = 0 satisfies the grid constraint exactly")
    } else {
        let (lo, hi) = (tol.ratio_min, tol.ratio_max);
        Check::within(
            "vacuum.constraint",
            &ratios(&residuals),
            lo,
            hi,
            "grid residual of the lambda constraint under refinement",
        )
    };
    report.check(constraint);
    let mut conv = Table::new("lambda-constraint", &["level", "h", "residual", "ratio"]);
    let r = ratios(&residuals);
    for (l, g) in levels.iter().enumerate() {
        let ratio = if l == 0 { f64::NAN } else { r[l - 1] };
        conv.push(vec![l.into(), g.spacing(1).into(), residuals[l].into(), ratio.into()]);
    }

    report.tables.extend([table, rk4, conv]);
    Ok(report)
}

pub(super) fn mass_landscape(ctx: &Ctx) -> CliResult<Report> {
    ctx.require_1d()?;
    let cfg = ctx.cfg;
    let mut report = ctx.report(cfg.derivative_mode().label())?;
    let grid = ctx.grid()?;
    let v = ctx.solve(&grid, cfg.physics.lambda0)?;
    let pack = ctx.static_pack(&grid)?;
    let vm = ctx.core(vacuum_mass(&v, &pack, cfg.numerics.include_conformal, cfg.branch()))?;

    let sub = ctx.core(mass_substituted_residual(&pack, &vm.m2_conformal))?;
    let gen = ctx.core(general_kg_residual(&pack, &v.lambda))?;
    let scale = gen.residual.scale.max(sub.residual.scale);
    let gap = pack.interior().iter().map(|&i| (sub.field[i] - gen.field[i]).norm()).fold(0.0, f64::max);
    let relative = if scale > 0.0 { gap / scale } else { gap };
    report.check(Check::at_most(
        "vacuum.mass_identity",
        relative,
        cfg.tolerances.vacuum_identity,
        "D.D phi + (M^2/hbar^2) phi with the conformal M^2 against the general residual",
    ));
    let zero = VacuumField::zero(grid.clone());
    let zero_ok = [true, false].iter().all(|&inc| {
        vacuum_mass(&zero, &pack, inc, cfg.branch())
            .map(|z| z.m2.values().iter().all(|&x| x == 0.0))
            .unwrap_or(false)
    });
    report.check(Check::holds("vacuum.zero_lambda", zero_ok, "lambda = 0 gives M^2 = 0 bitwise in both forms"));

    let constancy = mass_constancy_residual(&vm, cfg.stencil_order());
    report.metric("complex_count", vm.complex_count() as f64);
    report.metric("max_abs_discrepancy", vm.discrepancy.iter().fold(0.0, |a, d| a.max(d.abs())));
    report.metric("mass_gradient_max", constancy.max_gradient);
    report.metric("mass_gradient_real_points", constancy.real_points as f64);
    report.metric("mass_gradient_excluded_points", constancy.excluded_points as f64);

    let t_mid = grid.axis(0).points / 2;
    let mut table = Table::new(
        "mass-landscape",
        &["x", "lambda", "m2_closed", "m2_conformal", "discrepancy", "mass_re", "mass_im", "complex"],
    );
    for k in 0..grid.axis(1).points {
        let i = grid.ravel(&[t_mid, k]);
        let m = vm.mass(i);
        table.push(vec![
            grid.axis(1).coord(k).into(),
            v.lambda.values()[i].into(),
            vm.m2_closed[i].into(),
            vm.m2_conformal[i].into(),
            vm.discrepancy[i].into(),
            m.re.into(),
            m.im.into(),
            vm.complex_flag[i].into(),
        ]);
    }
    report.tables.push(table);
    Ok(report)
}

pub(super) fn neutrino_limit(ctx: &Ctx) -> CliResult<Report> {
    ctx.require_1d()?;
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let mut report = ctx.report(DerivativeMode::Analytic.label())?;
    let protocol = match p.protocol {
        crate::config::ProtocolName::Resolved => LambdaProtocol::Resolved {
            lambda0: p.lambda0,
            x0: p.x0,
        },
        crate::config::ProtocolName::Constant => LambdaProtocol::Fixed(Profile::zero(1).with(Term::Constant(p.lambda0))),
    };
    let study_cfg = NeutrinoStudyConfig {
        ln_rho: ctx.density(),
        hbar: p.hbar,
        spatial_sign: ctx.spatial_sign(),
        masses: p.masses.clone(),
        probes: p.probes.clone(),
        protocol,
        include_conformal: cfg.numerics.include_conformal,
        steps_per_unit: cfg.numerics.steps_per_unit,
        delta_u: cfg.numerics.delta_u,
        delta_q: cfg.numerics.delta_q,
    };
    let rows = p.masses.par_iter().map(|&m| neutrino_row(&study_cfg, m)).collect();
    let study = assemble_study(&study_cfg, rows);

    let branch = cfg.branch();
    let mut header = vec!["kind".to_string(), "m".to_string()];
    for k in 1..=p.probes.len() {
        header.push(format!("M2_probe{k}"));
    }
    for k in 1..=p.probes.len() {
        header.push(format!("M_probe{k}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("neutrino", &header);
    let real_mass = |m2: f64| {
        let m = branch_mass(m2, branch);
        if m.im == 0.0 { m.re } else { f64::NAN }
    };
    for row in &study.rows {
        let kind = if row.failure.is_some() { "failed" } else { "data" };
        let mut cells: Vec<Cell> = vec![kind.into(), row.mass.into()];
        cells.extend(row.m2.iter().map(|&v| Cell::from(v)));
        cells.extend(row.m2.iter().map(|&v| Cell::from(real_mass(v))));
        table.push(cells);
    }
    let mut cells: Vec<Cell> = vec!["extrapolated".into(), 0.0.into()];
    cells.extend(study.limits.iter().map(|l| Cell::from(l.m2_limit)));
    cells.extend(study.limits.iter().map(|l| Cell::from(real_mass(l.m2_limit))));
    table.push(cells);

    let mut limits = Table::new(
        "neutrino-limits",
        &["probe", "m2_limit", "order", "uncertainty", "monotone", "class"],
    );
    for l in &study.limits {
        limits.push(vec![
            l.probe.into(),
            l.m2_limit.into(),
            l.order.into(),
            l.uncertainty.into(),
            l.monotone.into(),
            l.class.label().into(),
        ]);
        report.metric(&format!("m2_limit_x{}", l.probe), l.m2_limit);
    }

    let failures: Vec<String> = study
        .rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("m = {}: {f}", r.mass)))
        .collect();
    report.check(Check::holds(
        "vacuum.neutrino_rows",
        failures.is_empty(),
        if failures.is_empty() {
            format!("M^2 evaluated at {} probes for {} masses", p.probes.len(), p.masses.len())
        } else {
            failures.join("; ")
        },
    ));
    let classes: Vec<&str> = study.limits.iter().map(|l| l.class.label()).collect();
    report.check(Check::holds(
        "vacuum.neutrino_limits",
        study.limits.iter().all(|l| l.class != LimitClass::Undetermined),
        format!("m -> 0 classification per probe: {}", classes.join(", ")),
    ));
    report.tables.extend([table, limits]);
    Ok(report)
}
