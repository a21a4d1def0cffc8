//! The derivative pack shared by every residual evaluator.
//!
//! A pack carries `phi`, `sqrt(rho)`, `S`, `Q` and `Omega^2` together with their
//! gradients and d'Alembertians, obtained either from stencils on sampled
//! fields or in closed form from a manufactured solution. Evaluators consume
//! packs only, so the same code measures discretization error (stencil mode)
//! and identity error (analytic mode).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::fields::{from_polar, quantum_potential, ConformalState, PolarDecomposition};
use crate::grid::{dalembertian_values, gradient_values, SpacetimeGrid, StencilOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Stencil,
    Analytic,
}

impl DerivativeMode {
    pub fn label(self) -> &'static str {
        match self {
            DerivativeMode::Stencil => "stencil",
            DerivativeMode::Analytic => "analytic",
        }
    }
}

/// Gradients are covariant and indexed `[mu][point]`.
#[derive(Debug, Clone)]
pub struct DerivativePack {
    pub mode: DerivativeMode,
    /// Stencil order for stencil-mode pieces and for vacuum-field terms in either mode.
    pub order: StencilOrder,
    pub polar: PolarDecomposition,
    pub conformal: ConformalState,
    pub sqrt_rho: Vec<f64>,
    pub grad_sqrt_rho: Vec<Vec<f64>>,
    pub box_sqrt_rho: Vec<f64>,
    pub grad_action: Vec<Vec<f64>>,
    pub box_action: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub grad_phi: Vec<Vec<Complex64>>,
    pub box_phi: Vec<Complex64>,
    pub grad_q: Vec<Vec<f64>>,
    pub grad_omega2: Vec<Vec<f64>>,
}

impl DerivativePack {
    pub fn from_stencils(p: &PolarDecomposition, order: StencilOrder) -> Result<Self> {
        let grid = p.grid().clone();
        let conformal = quantum_potential(p, order)?;
        let sqrt_rho = p.sqrt_rho().into_values();
        let phi = from_polar(p)?.into_values();
        let s = p.action().values();
        let grad_sqrt_rho = gradient_values(&grid, &sqrt_rho, order);
        let box_sqrt_rho = dalembertian_values(&grid, &sqrt_rho, order);
        let grad_action = gradient_values(&grid, s, order);
        let box_action = dalembertian_values(&grid, s, order);
        let grad_phi = gradient_values(&grid, &phi, order);
        let box_phi = dalembertian_values(&grid, &phi, order);
        let grad_q = gradient_values(&grid, conformal.q.values(), order);
        let grad_omega2 = gradient_values(&grid, conformal.omega2.values(), order);
        Ok(Self {
            mode: DerivativeMode::Stencil,
            order,
            polar: p.clone(),
            conformal,
            sqrt_rho,
            grad_sqrt_rho,
            box_sqrt_rho,
            grad_action,
            box_action,
            phi,
            grad_phi,
            box_phi,
            grad_q,
            grad_omega2,
        })
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        self.polar.grid()
    }

    pub fn margin(&self) -> usize {
        self.order.interior_margin()
    }

    pub fn interior(&self) -> Vec<usize> {
        self.grid().interior(self.margin())
    }

    pub fn hbar(&self) -> f64 {
        self.polar.hbar()
    }

    pub fn mass(&self) -> f64 {
        self.polar.mass()
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.polar.rho().values()[i]
    }

    pub fn omega2(&self, i: usize) -> f64 {
        self.conformal.omega2.values()[i]
    }

    pub fn q(&self, i: usize) -> f64 {
        self.conformal.q.values()[i]
    }

    pub fn qtilde(&self, i: usize) -> f64 {
        self.conformal.qtilde.values()[i]
    }

    /// `g^{mu mu} a_mu b_mu` at point `i`.
    pub fn contract(&self, a: &[Vec<f64>], b: &[Vec<f64>], i: usize) -> f64 {
        let grid = self.grid();
        (0..grid.dim()).map(|mu| grid.inverse_metric(mu) * a[mu][i] * b[mu][i]).sum()
    }

    pub fn contract_complex(&self, a: &[Vec<f64>], b: &[Vec<Complex64>], i: usize) -> Complex64 {
        let grid = self.grid();
        (0..grid.dim())
            .map(|mu| b[mu][i] * (grid.inverse_metric(mu) * a[mu][i]))
            .sum()
    }

    /// `grad_mu S grad^mu S` at point `i`.
    pub fn action_norm(&self, i: usize) -> f64 {
        self.contract(&self.grad_action, &self.grad_action, i)
    }
}
