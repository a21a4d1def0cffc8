//! The seven experiments. Each returns a [`Report`] and never writes files itself.

mod action;
mod convergence;
mod dispersion;
mod identity;
mod vacuum;

use std::sync::Arc;

use num_complex::Complex64;
use vdlab_core::grid::{Field, SpacetimeGrid};
use vdlab_core::manufactured::{random_manufactured, ManufacturedPolar, Profile, Term};
use vdlab_core::vacuum::VacuumField;
use vdlab_core::{DerivativeMode, DerivativePack, PolarDecomposition};

use crate::config::{BoundaryName, Experiment, GridSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{Manifest, Report};

pub fn run_experiment(config: &RunConfig) -> CliResult<Report> {
    let exp = config.experiment();
    let ctx = Ctx { cfg: config, exp };
    match exp {
        Experiment::IdentitySuite => identity::run(&ctx),
        Experiment::ConvergenceSuite => convergence::run(&ctx),
        Experiment::LambdaProfile => vacuum::lambda_profile(&ctx),
        Experiment::MassLandscape => vacuum::mass_landscape(&ctx),
        Experiment::NeutrinoLimit => vacuum::neutrino_limit(&ctx),
        Experiment::DispersionScan => dispersion::run(&ctx),
        Experiment::ActionGradient => action::run(&ctx),
    }
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub exp: Experiment,
}

impl Ctx<'_> {
    pub fn core<T>(&self, r: vdlab_core::Result<T>) -> CliResult<T> {
        r.map_err(|source| CliError::Core {
            experiment: self.exp.name(),
            source,
        })
    }

    pub fn report(&self, derivatives_used: &str) -> CliResult<Report> {
        Ok(Report::new(Manifest::new(self.cfg, derivatives_used)?))
    }

    pub fn grid(&self) -> CliResult<Arc<SpacetimeGrid>> {
        self.cfg.grid_spec().build()
    }

    /// The configured grid followed by `refine_levels - 1` refinements.
    pub fn levels(&self, spec: &GridSpec) -> CliResult<Vec<Arc<SpacetimeGrid>>> {
        let mut out = vec![spec.build()?];
        while out.len() < self.cfg.numerics.refine_levels {
            let next = out.last().expect("non-empty").refined();
            out.push(Arc::new(next));
        }
        Ok(out)
    }

    pub fn manufactured(&self, grid: &SpacetimeGrid, seed: u64) -> ManufacturedPolar {
        let p = &self.cfg.physics;
        random_manufactured(seed, grid, p.smoothness, p.hbar, p.mass)
    }

    pub fn polar(&self, m: &ManufacturedPolar, grid: &Arc<SpacetimeGrid>) -> CliResult<PolarDecomposition> {
        let rho = m.ln_rho.sample(grid).map(f64::exp);
        let action = m.action.sample(grid);
        self.core(PolarDecomposition::with_floor(
            rho,
            action,
            m.hbar,
            m.mass,
            self.cfg.numerics.density_floor,
        ))
    }

    pub fn pack(&self, m: &ManufacturedPolar, grid: &Arc<SpacetimeGrid>, mode: DerivativeMode) -> CliResult<DerivativePack> {
        let order = self.cfg.stencil_order();
        match mode {
            DerivativeMode::Analytic => self.core(m.pack(grid, order)),
            DerivativeMode::Stencil => {
                let p = self.polar(m, grid)?;
                self.core(DerivativePack::from_stencils(&p, order))
            }
        }
    }

    /// A smooth seeded `lambda` drawn from the same factory as the corpus.
    pub fn lambda_field(&self, grid: &Arc<SpacetimeGrid>, seed: u64) -> CliResult<VacuumField> {
        let m = random_manufactured(seed ^ 0x5DEE_CE66_D1CE_5EED, grid, self.cfg.physics.smoothness.max(1), 1.0, 1.0);
        let values = Field::from_fn(grid.clone(), |x| m.ln_rho.value(x) + 0.5);
        self.core(VacuumField::new(values))
    }

    /// Plane wave `rho = const`, `S = E t - p x` on the mass shell.
    pub fn plane_wave(&self, dim: usize) -> ManufacturedPolar {
        let p = &self.cfg.physics;
        let e = (p.mass * p.mass + p.momentum * p.momentum).sqrt();
        let mut k = vec![0.0; dim];
        k[0] = e;
        k[1] = -p.momentum;
        ManufacturedPolar {
            ln_rho: Profile::zero(dim).with(Term::Constant(0.25)),
            action: Profile::zero(dim).with(Term::Linear(k)),
            hbar: p.hbar,
            mass: p.mass,
        }
    }
}

/// The configured grid with every axis made one-sided; linear phases are not periodic.
pub(crate) fn one_sided(spec: &GridSpec) -> GridSpec {
    GridSpec {
        boundary: vec![BoundaryName::OneSided; spec.boundary.len()],
        ..spec.clone()
    }
}

pub(crate) fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[0] / w[1]).collect()
}

pub(crate) fn max_spacing(grid: &SpacetimeGrid) -> f64 {
    (0..grid.dim()).map(|a| grid.spacing(a)).fold(0.0, f64::max)
}

/// Fixed constant spinor multiplying the scalar corpus field.
pub(crate) fn spinor_direction(size: usize) -> Vec<Complex64> {
    let base = [
        Complex64::new(0.6, 0.2),
        Complex64::new(-0.3, 0.7),
        Complex64::new(0.1, -0.4),
        Complex64::new(0.5, 0.5),
    ];
    base[..size].to_vec()
}
