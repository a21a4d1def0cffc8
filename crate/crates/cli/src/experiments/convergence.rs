use std::sync::Arc;

use rayon::prelude::*;
use vdlab_core::dirac::{build_gamma, square_dirac_check, GammaDim, SpinorDerivatives, SpinorField};
use vdlab_core::fields::phase_identity_residual;
use vdlab_core::grid::{SpacetimeGrid, StencilOrder};
use vdlab_core::kgops::{box_d, box_d_nested, kg_residual_wave, shift_residual};
use vdlab_core::{DerivativeMode, DerivativePack};

use super::{max_spacing, one_sided, ratios, spinor_direction, Ctx};
use crate::config::GridSpec;
use crate::error::CliResult;
use crate::report::{Check, Report, Table};

pub(super) struct Study {
    pub check: Check,
    pub tables: Vec<Table>,
}

/// Window for refinement ratios at the configured stencil order.
fn window(ctx: &Ctx) -> (f64, f64) {
    let t = &ctx.cfg.tolerances;
    match ctx.cfg.stencil_order() {
        StencilOrder::Second => (t.ratio_min, t.ratio_max),
        StencilOrder::Fourth => (t.rk4_ratio_min, t.rk4_ratio_max),
    }
}

/// Runs `residual(seed, grid)` on every refinement level for every seed and
/// checks every successive ratio against the order window.
fn study<F>(ctx: &Ctx, id: &str, what: &str, spec: &GridSpec, seeds: &[u64], residual: F) -> CliResult<Study>
where
    F: Fn(u64, &Arc<SpacetimeGrid>) -> CliResult<f64> + Sync,
{
    let levels = ctx.levels(spec)?;
    let jobs: Vec<(u64, usize)> = seeds
        .iter()
        .flat_map(|&s| (0..levels.len()).map(move |l| (s, l)))
        .collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, l)| residual(s, &levels[l]))
        .collect::<CliResult<_>>()?;

    let stem = format!("convergence-{}", id.replace('.', "-"));
    let mut per_seed = Table::new(format!("{stem}-seeds"), &["seed", "level", "h", "residual", "ratio"]);
    let mut all_ratios = Vec::new();
    for (k, &seed) in seeds.iter().enumerate() {
        let res = &values[k * levels.len()..(k + 1) * levels.len()];
        let r = ratios(res);
        for (l, g) in levels.iter().enumerate() {
            let ratio = if l == 0 { f64::NAN } else { r[l - 1] };
            per_seed.push(vec![seed.into(), l.into(), max_spacing(g).into(), res[l].into(), ratio.into()]);
        }
        all_ratios.extend(r);
    }

    let worst: Vec<f64> = (0..levels.len())
        .map(|l| (0..seeds.len()).map(|k| values[k * levels.len() + l]).fold(0.0, f64::max))
        .collect();
    let mut summary = Table::new(stem, &["level", "h", "residual", "ratio"]);
    let worst_ratios = ratios(&worst);
    for (l, g) in levels.iter().enumerate() {
        let ratio = if l == 0 { f64::NAN } else { worst_ratios[l - 1] };
        summary.push(vec![l.into(), max_spacing(g).into(), worst[l].into(), ratio.into()]);
    }

    let (lo, hi) = window(ctx);
    let sizes: Vec<String> = levels.iter().map(|g| g.axis(g.dim() - 1).points.to_string()).collect();
    let check = Check::within(
        id,
        &all_ratios,
        lo,
        hi,
        format!("{what}: refinement ratios over {} seeds, levels {}", seeds.len(), sizes.join("/")),
    );
    Ok(Study {
        check,
        tables: vec![summary, per_seed],
    })
}

fn stencil_pack(ctx: &Ctx, seed: u64, grid: &Arc<SpacetimeGrid>) -> CliResult<DerivativePack> {
    let m = ctx.manufactured(grid, seed);
    ctx.pack(&m, grid, DerivativeMode::Stencil)
}

/// `(i hbar gamma D)^2 Psi` against `-hbar^2 D.D Psi` for `Psi = chi phi`.
pub(super) fn square_study(ctx: &Ctx, spec: &GridSpec) -> CliResult<Study> {
    let dim = ctx.core(GammaDim::for_spacetime(spec.origin.len()))?;
    study(
        ctx,
        "dirac.square",
        "squared Dirac operator minus scalar D.D on chi phi",
        spec,
        &ctx.cfg.corpus(),
        |seed, grid| {
            let pack = stencil_pack(ctx, seed, grid)?;
            let chi = spinor_direction(dim.spinor_size());
            let psi = ctx.core(SpinorField::from_scalar(&pack, build_gamma(dim), &chi))?;
            let d = SpinorDerivatives::from_stencils(&psi, ctx.cfg.stencil_order());
            Ok(ctx.core(square_dirac_check(&psi, &d, &pack))?.max_abs)
        },
    )
}

pub(super) fn run(ctx: &Ctx) -> CliResult<Report> {
    let mut report = ctx.report(DerivativeMode::Stencil.label())?;
    let spec = ctx.cfg.grid_spec();
    let seeds = ctx.cfg.corpus();

    let shift = study(
        ctx,
        "kgops.shift_theorem",
        "max |Qtilde phi - D.D phi|",
        &spec,
        &seeds,
        |seed, g| Ok(shift_residual(&stencil_pack(ctx, seed, g)?).dalembertian.max_abs),
    )?;
    let phase = study(
        ctx,
        "fields.phase_identity",
        "max |(grad phi/phi - c.c.)/2 - (i/hbar) grad S|",
        &spec,
        &seeds,
        |seed, g| ctx.core(phase_identity_residual(&stencil_pack(ctx, seed, g)?)),
    )?;
    let nested = study(
        ctx,
        "kgops.nested_box_d",
        "nested D_mu(D^mu phi) against the expanded D.D phi",
        &spec,
        &seeds,
        |seed, g| {
            let pack = stencil_pack(ctx, seed, g)?;
            let (a, b) = (box_d(&pack), box_d_nested(&pack));
            Ok(pack.interior().iter().map(|&i| (a[i] - b[i]).norm()).fold(0.0, f64::max))
        },
    )?;
    let plane = study(
        ctx,
        "kgops.plane_wave",
        "plane-wave wave-form residual with stencil derivatives",
        &one_sided(&spec),
        &[ctx.cfg.run.seed],
        |_, g| {
            let pack = ctx.pack(&ctx.plane_wave(g.dim()), g, DerivativeMode::Stencil)?;
            Ok(ctx.core(kg_residual_wave(&pack))?.quantum_force.max_abs)
        },
    )?;
    let square = square_study(ctx, &spec)?;

    for s in [shift, phase, nested, plane, square] {
        report.check(s.check);
        report.tables.extend(s.tables);
    }
    Ok(report)
}
