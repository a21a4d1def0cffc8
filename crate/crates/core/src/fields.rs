//! Polar (density/action) representation, its wavefunction dual, the
//! quantum potential and the conformal factor.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::derivatives::DerivativePack;
use crate::error::{Error, Result};
use crate::grid::{
    dalembertian, gradient, raise_index, reduce::max_norm_at, Boundary, ComplexField, Covector, Field,
    RealField, SpacetimeGrid, StencilOrder,
};

pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-12;

/// Density `rho > 0` and action `S` with the constants that tie them to `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomposition {
    rho: RealField,
    action: RealField,
    hbar: f64,
    mass: f64,
    floor: f64,
}

impl PolarDecomposition {
    pub fn new(rho: RealField, action: RealField, hbar: f64, mass: f64) -> Result<Self> {
        Self::with_floor(rho, action, hbar, mass, DEFAULT_DENSITY_FLOOR)
    }

    pub fn with_floor(rho: RealField, action: RealField, hbar: f64, mass: f64, floor: f64) -> Result<Self> {
        rho.ensure_same_grid(action.grid())?;
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                value: hbar,
                reason: "must be positive",
            });
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mass",
                value: mass,
                reason: "must be non-negative",
            });
        }
        rho.check_finite()?;
        action.check_finite()?;
        if let Some(i) = rho.values().iter().position(|&r| r < floor) {
            return Err(Error::DensityBelowFloor {
                index: rho.grid().unravel(i),
                value: rho.values()[i],
                floor,
            });
        }
        Ok(Self {
            rho,
            action,
            hbar,
            mass,
            floor,
        })
    }

    pub fn rho(&self) -> &RealField {
        &self.rho
    }

    pub fn action(&self) -> &RealField {
        &self.action
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        self.rho.grid()
    }

    pub fn sqrt_rho(&self) -> RealField {
        self.rho.map(f64::sqrt)
    }

    /// Same density and action with a different mass.
    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        Self::with_floor(self.rho.clone(), self.action.clone(), self.hbar, mass, self.floor)
    }

    /// `rho -> c rho` for a positive constant `c`.
    pub fn scaled_density(&self, c: f64) -> Result<Self> {
        Self::with_floor(self.rho.map(|r| r * c), self.action.clone(), self.hbar, self.mass, self.floor)
    }
}

/// Quantum potential `Q`, `Qtilde = box sqrt(rho) / sqrt(rho)` and `Omega^2 = exp(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalState {
    pub q: RealField,
    pub omega2: RealField,
    pub qtilde: RealField,
}

impl ConformalState {
    pub fn from_qtilde(qtilde: RealField, hbar: f64, mass: f64) -> Result<Self> {
        if mass <= 0.0 {
            return Err(Error::MassRequired);
        }
        let scale = (hbar / mass).powi(2);
        let q = qtilde.map(|v| scale * v);
        let omega2 = q.map(f64::exp);
        if omega2.values().iter().any(|w| !w.is_finite() || *w == 0.0) {
            let max_q = q.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::Overflow { max_q });
        }
        Ok(Self { q, omega2, qtilde })
    }

    /// Flat conformal factor `Omega^2 = 1`.
    pub fn trivial(grid: Arc<SpacetimeGrid>) -> Self {
        Self {
            q: Field::constant(grid.clone(), 0.0),
            omega2: Field::constant(grid.clone(), 1.0),
            qtilde: Field::constant(grid, 0.0),
        }
    }
}

/// `phi = sqrt(rho) exp(i S / hbar)`.
pub fn from_polar(p: &PolarDecomposition) -> Result<ComplexField> {
    if let Some(i) = p.rho.values().iter().position(|&r| r < p.floor) {
        return Err(Error::DensityBelowFloor {
            index: p.grid().unravel(i),
            value: p.rho.values()[i],
            floor: p.floor,
        });
    }
    p.rho
        .zip_map(&p.action, |r, s| Complex64::from_polar(r.sqrt(), s / p.hbar))
}

/// Result of [`to_polar`]: the recovered pair plus the winding number of the
/// unwrapped phase along each periodic axis (zero on one-sided axes).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarRecovery {
    pub polar: PolarDecomposition,
    pub winding: Vec<i64>,
}

/// Inverse of [`from_polar`], with phase unwrapping.
///
/// The phase is continued along axis 0 from the origin, then along axis 1
/// from every point already fixed, and so on, each step choosing the branch
/// nearest the predecessor. `S` is therefore determined up to one global
/// `2 pi hbar k`.
pub fn to_polar(phi: &ComplexField, hbar: f64, mass: f64) -> Result<PolarRecovery> {
    to_polar_with_floor(phi, hbar, mass, DEFAULT_DENSITY_FLOOR)
}

pub fn to_polar_with_floor(phi: &ComplexField, hbar: f64, mass: f64, floor: f64) -> Result<PolarRecovery> {
    phi.check_finite()?;
    let grid = phi.grid().clone();
    let values = phi.values();
    if let Some(i) = values.iter().position(|v| v.norm_sqr() < floor) {
        return Err(Error::Node {
            index: grid.unravel(i),
            value: values[i].norm_sqr(),
        });
    }
    let arg: Vec<f64> = values.iter().map(|v| v.arg()).collect();
    let mut phase = vec![0.0; grid.len()];
    phase[0] = arg[0];
    let dim = grid.dim();
    let continue_from = |prev: f64, raw: f64| raw + TAU * ((prev - raw) / TAU).round();
    for a in 0..dim {
        let stride = grid.stride(a);
        for flat in 0..grid.len() {
            let idx = grid.unravel(flat);
            if idx[a] == 0 || idx[a + 1..].iter().any(|&i| i != 0) {
                continue;
            }
            phase[flat] = continue_from(phase[flat - stride], arg[flat]);
        }
    }
    let winding = (0..dim)
        .map(|a| {
            let axis = grid.axis(a);
            if axis.boundary != Boundary::Periodic {
                return 0;
            }
            let last = (axis.points - 1) * grid.stride(a);
            let closing = continue_from(phase[last], arg[0]);
            ((closing - phase[0]) / TAU).round() as i64
        })
        .collect();
    let rho = phi.map(|v| v.norm_sqr());
    let action = Field::new(grid, phase.into_iter().map(|p| p * hbar).collect())?;
    Ok(PolarRecovery {
        polar: PolarDecomposition::with_floor(rho, action, hbar, mass, floor)?,
        winding,
    })
}

/// `Qtilde`, `Q = (hbar/m)^2 Qtilde` and `Omega^2 = exp(Q)` from stencils.
pub fn quantum_potential(p: &PolarDecomposition, order: StencilOrder) -> Result<ConformalState> {
    if p.mass <= 0.0 {
        return Err(Error::MassRequired);
    }
    let r = p.sqrt_rho();
    let box_r = dalembertian(&r, order)?;
    let qtilde = box_r.zip_map(&r, |b, r| b / r)?;
    ConformalState::from_qtilde(qtilde, p.hbar, p.mass)
}

/// `Qtilde` alone; defined for any mass.
pub fn qtilde(p: &PolarDecomposition, order: StencilOrder) -> Result<RealField> {
    let r = p.sqrt_rho();
    dalembertian(&r, order)?.zip_map(&r, |b, r| b / r)
}

/// Contravariant `u^mu = grad^mu sqrt(rho) / sqrt(rho)`.
pub fn drift_velocity(p: &PolarDecomposition, order: StencilOrder) -> Result<Covector<f64>> {
    let r = p.sqrt_rho();
    let grad = gradient(&r, order)?;
    let inv: Vec<f64> = r.values().iter().map(|v| 1.0 / v).collect();
    raise_index(&grad.scale_by(&inv))
}

/// Max over interior points of `(1/2)(grad phi/phi - grad phi*/phi*) - (i/hbar) grad S`.
pub fn phase_identity_residual(pack: &DerivativePack) -> Result<f64> {
    let grid = pack.grid();
    let hbar = pack.polar.hbar();
    let interior = grid.interior(pack.margin());
    let mut worst = 0.0_f64;
    for mu in 0..grid.dim() {
        let mut res = vec![Complex64::default(); grid.len()];
        for &i in &interior {
            let phi = pack.phi[i];
            if phi.norm_sqr() < pack.polar.floor() {
                return Err(Error::Node {
                    index: grid.unravel(i),
                    value: phi.norm_sqr(),
                });
            }
            let log_grad = pack.grad_phi[mu][i] / phi;
            let half_diff = (log_grad - log_grad.conj()) * 0.5;
            res[i] = half_diff - Complex64::new(0.0, pack.grad_action[mu][i] / hbar);
        }
        worst = worst.max(max_norm_at(&res, &interior));
    }
    Ok(worst)
}
