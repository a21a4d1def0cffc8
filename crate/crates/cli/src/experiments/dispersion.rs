use std::sync::Arc;

use rayon::prelude::*;
use vdlab_core::dirac::{
    build_gamma, dirac_residual, momentum_spectrum, plane_wave_dispersion, plane_wave_spinor, DiracContext, DiracMode,
    DiracVariant, GammaDim, ParticleSign, SpinorDerivatives, VacuumSign,
};
use vdlab_core::grid::SpacetimeGrid;
use vdlab_core::manufactured::{ManufacturedPolar, Profile};
use vdlab_core::vacuum::{MassBranch, VacuumMass};
use vdlab_core::DerivativeMode;

use super::{max_spacing, one_sided, ratios, Ctx};
use crate::error::CliResult;
use crate::report::{Check, Report, Table};

/// Assigned-mode particle residual of the exact plane wave with total mass `m + M`.
fn grid_residual(ctx: &Ctx, grid: &Arc<SpacetimeGrid>, m: f64, big_m: f64) -> CliResult<f64> {
    let p = &ctx.cfg.physics;
    let (_, psi) = ctx.core(plane_wave_spinor(grid, p.momentum, m + big_m, p.hbar))?;
    let d = SpinorDerivatives::from_stencils(&psi, ctx.cfg.stencil_order());
    // S = 0: only hbar and the grid are read from the pack.
    let pack = ctx.core(
        ManufacturedPolar {
            ln_rho: Profile::zero(2),
            action: Profile::zero(2),
            hbar: p.hbar,
            mass: m.max(1.0),
        }
        .pack(grid, ctx.cfg.stencil_order()),
    )?;
    let branch = if big_m < 0.0 { MassBranch::Minus } else { MassBranch::Plus };
    let vm = VacuumMass::constant(grid.clone(), big_m * big_m, branch);
    let mut dctx = DiracContext::from_pack(&pack).with_vacuum(&vm);
    dctx.mass = m;
    let variant = DiracVariant {
        particle: ParticleSign::Particle,
        vacuum: VacuumSign::Minus,
    };
    Ok(ctx.core(dirac_residual(&psi, &d, &dctx, variant, DiracMode::Assigned))?.residual.max_abs)
}

pub(super) fn run(ctx: &Ctx) -> CliResult<Report> {
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let tol = &cfg.tolerances;
    let mut report = ctx.report(DerivativeMode::Stencil.label())?;

    let cases = [("configured", p.mass, p.vacuum_mass), ("massless", 0.0, p.vacuum_mass)];
    let ks: Vec<f64> = (0..p.k_points)
        .map(|j| p.k_min + (p.k_max - p.k_min) * j as f64 / (p.k_points - 1) as f64)
        .collect();
    let mut table = Table::new("dispersion", &["case", "m", "M", "k", "E_numeric", "E_closed", "abs_err"]);
    let mut worst = 0.0_f64;
    for (name, m, big_m) in cases {
        for &k in &ks {
            let e = ctx.core(plane_wave_dispersion(k, m, big_m))?;
            let exact = (k * k + (m + big_m) * (m + big_m)).sqrt();
            let err = (e - exact).abs();
            worst = worst.max(err);
            table.push(vec![name.into(), m.into(), big_m.into(), k.into(), e.into(), exact.into(), err.into()]);
        }
    }
    report.check(Check::at_most(
        "dirac.dispersion",
        worst,
        tol.dispersion,
        format!(
            "positive eigenvalue against sqrt(k^2 + (m + M)^2) on {} k values, (m, M) = ({}, {}) and (0, {})",
            ks.len(),
            p.mass,
            p.vacuum_mass,
            p.vacuum_mass
        ),
    ));

    // 3+1 spectrum: +-E, each twice.
    let rep = build_gamma(GammaDim::Four);
    let k3 = [p.momentum, 0.5 * p.momentum, -0.25 * p.momentum];
    let total = p.mass + p.vacuum_mass;
    let (values, _) = ctx.core(momentum_spectrum(&rep, &k3, total))?;
    let e = (k3.iter().map(|x| x * x).sum::<f64>() + total * total).sqrt();
    let spectrum_err = values.iter().zip([-e, -e, e, e]).map(|(v, x)| (v - x).abs()).fold(0.0, f64::max);
    report.check(Check::at_most(
        "dirac.spectrum_4d",
        spectrum_err,
        tol.dispersion,
        "3+1 Hamiltonian eigenvalues against (-E, -E, E, E)",
    ));

    // The plane wave solves the gridded equation to stencil order.
    let spec = one_sided(&cfg.grid_spec());
    if spec.origin.len() == 2 {
        let levels = ctx.levels(&spec)?;
        let mut conv = Table::new("dispersion-grid", &["case", "level", "h", "residual", "ratio"]);
        let mut all = Vec::new();
        for (name, m, big_m) in cases {
            let res: Vec<f64> = levels
                .par_iter()
                .map(|g| grid_residual(ctx, g, m, big_m))
                .collect::<CliResult<_>>()?;
            let r = ratios(&res);
            for (l, g) in levels.iter().enumerate() {
                let ratio = if l == 0 { f64::NAN } else { r[l - 1] };
                conv.push(vec![name.into(), l.into(), max_spacing(g).into(), res[l].into(), ratio.into()]);
            }
            all.extend(r);
        }
        let (lo, hi) = match cfg.stencil_order() {
            vdlab_core::StencilOrder::Second => (tol.ratio_min, tol.ratio_max),
            vdlab_core::StencilOrder::Fourth => (tol.rk4_ratio_min, tol.rk4_ratio_max),
        };
        report.check(Check::within(
            "dirac.grid_dispersion",
            &all,
            lo,
            hi,
            "plane wave with constant vacuum mass in the gridded equation, refinement ratios",
        ));
        report.tables.push(conv);
    }
    report.tables.insert(0, table);
    Ok(report)
}
