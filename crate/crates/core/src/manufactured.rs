//! Closed-form smooth fields with exact derivatives of any order.
//!
//! Manufactured `(ln rho, S)` pairs feed the identity suites: sampled on a grid
//! they give the stencil route, evaluated through [`ManufacturedPolar::pack`]
//! they give every derivative analytically.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derivatives::{DerivativeMode, DerivativePack};
use crate::error::{Error, Result};
use crate::fields::{ConformalState, PolarDecomposition};
use crate::grid::{Boundary, Field, RealField, SpacetimeGrid, StencilOrder};

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Constant(f64),
    /// `sum_a c_a x_a`
    Linear(Vec<f64>),
    /// `sum_a c_a (x_a - center_a)^2`
    Quadratic { coeffs: Vec<f64>, center: Vec<f64> },
    /// `amplitude * cos(k . x + phase)`
    Cosine {
        amplitude: f64,
        wavevector: Vec<f64>,
        phase: f64,
    },
}

impl Term {
    fn derivative(&self, x: &[f64], axes: &[usize]) -> f64 {
        match self {
            Term::Constant(c) => {
                if axes.is_empty() {
                    *c
                } else {
                    0.0
                }
            }
            Term::Linear(c) => match axes {
                [] => c.iter().zip(x).map(|(c, x)| c * x).sum(),
                [a] => c[*a],
                _ => 0.0,
            },
            Term::Quadratic { coeffs, center } => match axes {
                [] => coeffs
                    .iter()
                    .zip(x.iter().zip(center))
                    .map(|(c, (x, x0))| c * (x - x0) * (x - x0))
                    .sum(),
                [a] => 2.0 * coeffs[*a] * (x[*a] - center[*a]),
                [a, b] if a == b => 2.0 * coeffs[*a],
                _ => 0.0,
            },
            Term::Cosine {
                amplitude,
                wavevector,
                phase,
            } => {
                let theta: f64 = wavevector.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase;
                let factor: f64 = axes.iter().map(|&a| wavevector[a]).product();
                let shifted = match axes.len() % 4 {
                    0 => theta.cos(),
                    1 => -theta.sin(),
                    2 => -theta.cos(),
                    _ => theta.sin(),
                };
                amplitude * factor * shifted
            }
        }
    }
}

/// A smooth scalar function on R^d given as a sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    dim: usize,
    terms: Vec<Term>,
}

impl Profile {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn with(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.derivative(x, &[])
    }

    /// Mixed partial derivative along the listed axes (repeats allowed).
    pub fn derivative(&self, x: &[f64], axes: &[usize]) -> f64 {
        self.terms.iter().map(|t| t.derivative(x, axes)).sum()
    }

    pub fn sample(&self, grid: &Arc<SpacetimeGrid>) -> RealField {
        Field::from_fn(grid.clone(), |x| self.value(x))
    }

    /// `[f, f', f'', f''']` of a one-dimensional profile.
    pub fn derivs_1d(&self, x: f64) -> [f64; 4] {
        let p = [x];
        [
            self.derivative(&p, &[]),
            self.derivative(&p, &[0]),
            self.derivative(&p, &[0, 0]),
            self.derivative(&p, &[0, 0, 0]),
        ]
    }

    /// Embeds a one-dimensional profile as a function of axis `axis` in `dim` dimensions.
    pub fn lift(&self, dim: usize, axis: usize) -> Profile {
        let spread = |v: &[f64]| {
            let mut out = vec![0.0; dim];
            out[axis] = v[0];
            out
        };
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Constant(c) => Term::Constant(*c),
                Term::Linear(c) => Term::Linear(spread(c)),
                Term::Quadratic { coeffs, center } => Term::Quadratic {
                    coeffs: spread(coeffs),
                    center: spread(center),
                },
                Term::Cosine {
                    amplitude,
                    wavevector,
                    phase,
                } => Term::Cosine {
                    amplitude: *amplitude,
                    wavevector: spread(wavevector),
                    phase: *phase,
                },
            })
            .collect();
        Profile { dim, terms }
    }

    /// `ln rho = ln rho0 - x^2 / sigma^2`, i.e. `sqrt(rho)` a Gaussian of width sigma.
    pub fn gaussian_log_density(sigma: f64, rho0: f64) -> Profile {
        Profile::zero(1)
            .with(Term::Constant(rho0.ln()))
            .with(Term::Quadratic {
                coeffs: vec![-1.0 / (sigma * sigma)],
                center: vec![0.0],
            })
    }
}

/// A manufactured polar pair: `ln rho` and `S` with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedPolar {
    pub ln_rho: Profile,
    pub action: Profile,
    pub hbar: f64,
    pub mass: f64,
}

impl ManufacturedPolar {
    pub fn polar(&self, grid: &Arc<SpacetimeGrid>) -> Result<PolarDecomposition> {
        let rho = self.ln_rho.sample(grid).map(f64::exp);
        let action = self.action.sample(grid);
        PolarDecomposition::new(rho, action, self.hbar, self.mass)
    }

    /// Every derivative the evaluators need, computed in closed form.
    ///
    /// `order` is only used by the pieces that are always stencil-based (the
    /// vacuum-field terms).
    pub fn pack(&self, grid: &Arc<SpacetimeGrid>, order: StencilOrder) -> Result<DerivativePack> {
        if self.mass <= 0.0 {
            return Err(Error::MassRequired);
        }
        let polar = self.polar(grid)?;
        let dim = grid.dim();
        let n = grid.len();
        let hbar = self.hbar;
        let q_scale = (hbar / self.mass).powi(2);
        let eta: Vec<f64> = (0..dim).map(|mu| grid.inverse_metric(mu)).collect();

        let mut sqrt_rho = vec![0.0; n];
        let mut grad_sqrt_rho = vec![vec![0.0; n]; dim];
        let mut box_sqrt_rho = vec![0.0; n];
        let mut grad_action = vec![vec![0.0; n]; dim];
        let mut box_action = vec![0.0; n];
        let mut phi = vec![Complex64::default(); n];
        let mut grad_phi = vec![vec![Complex64::default(); n]; dim];
        let mut box_phi = vec![Complex64::default(); n];
        let mut qtilde = vec![0.0; n];
        let mut grad_q = vec![vec![0.0; n]; dim];

        for i in 0..n {
            let x = grid.coords(i);
            let l = self.ln_rho.value(&x);
            let s = self.action.value(&x);
            let r = (0.5 * l).exp();
            let lg: Vec<f64> = (0..dim).map(|mu| self.ln_rho.derivative(&x, &[mu])).collect();
            let sg: Vec<f64> = (0..dim).map(|mu| self.action.derivative(&x, &[mu])).collect();
            let ph = Complex64::from_polar(r, s / hbar);

            sqrt_rho[i] = r;
            phi[i] = ph;
            let mut box_r = 0.0;
            let mut box_s = 0.0;
            let mut box_ph = Complex64::default();
            for mu in 0..dim {
                let lmm = self.ln_rho.derivative(&x, &[mu, mu]);
                let smm = self.action.derivative(&x, &[mu, mu]);
                grad_sqrt_rho[mu][i] = 0.5 * r * lg[mu];
                grad_action[mu][i] = sg[mu];
                let log_grad = Complex64::new(0.5 * lg[mu], sg[mu] / hbar);
                grad_phi[mu][i] = ph * log_grad;
                box_r += eta[mu] * r * (0.5 * lmm + 0.25 * lg[mu] * lg[mu]);
                box_s += eta[mu] * smm;
                box_ph += ph * (log_grad * log_grad + Complex64::new(0.5 * lmm, smm / hbar)) * eta[mu];
            }
            box_sqrt_rho[i] = box_r;
            box_action[i] = box_s;
            box_phi[i] = box_ph;
            qtilde[i] = box_r / r;
            for nu in 0..dim {
                let mut d = 0.0;
                for mu in 0..dim {
                    let lmmn = self.ln_rho.derivative(&x, &[mu, mu, nu]);
                    let lmn = self.ln_rho.derivative(&x, &[mu, nu]);
                    d += eta[mu] * (0.5 * lmmn + 0.5 * lg[mu] * lmn);
                }
                grad_q[nu][i] = q_scale * d;
            }
        }

        let conformal = ConformalState::from_qtilde(
            Field::new(grid.clone(), qtilde)?,
            hbar,
            self.mass,
        )?;
        let grad_omega2 = grad_q
            .iter()
            .map(|c| c.iter().zip(conformal.omega2.values()).map(|(g, w)| g * w).collect())
            .collect();

        Ok(DerivativePack {
            mode: DerivativeMode::Analytic,
            order,
            polar,
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
}

/// Seeded random low-order Fourier fields for `ln rho` and `S`.
///
/// Wave vectors are integer multiples of `2 pi / extent` on every axis, so
/// the fields are smooth across periodic boundaries. On a one-sided time axis
/// the action also carries a linear `E0 t` drift. `smoothness` is the number
/// of modes per field; zero gives constant fields.
pub fn random_manufactured(
    seed: u64,
    grid: &SpacetimeGrid,
    smoothness: usize,
    hbar: f64,
    mass: f64,
) -> ManufacturedPolar {
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_n = smoothness as i64;
    let draw_modes = |amp: f64, rng: &mut ChaCha8Rng| {
        let mut p = Profile::zero(dim);
        for _ in 0..smoothness {
            let wavevector: Vec<f64> = loop {
                let n: Vec<i64> = (0..dim).map(|_| rng.random_range(-max_n..=max_n)).collect();
                if n.iter().any(|&v| v != 0) {
                    break n
                        .iter()
                        .enumerate()
                        .map(|(a, &v)| TAU * v as f64 / grid.axis(a).extent)
                        .collect();
                }
            };
            p = p.with(Term::Cosine {
                amplitude: amp * rng.random_range(-1.0..1.0),
                wavevector,
                phase: rng.random_range(0.0..TAU),
            });
        }
        p
    };
    let ln_rho = draw_modes(0.3, &mut rng);
    let mut action = draw_modes(0.6 * hbar, &mut rng);
    if smoothness > 0 && grid.axis(0).boundary == Boundary::OneSided {
        let mut drift = vec![0.0; dim];
        drift[0] = mass * rng.random_range(0.5..1.0);
        action = action.with(Term::Linear(drift));
    }
    ManufacturedPolar {
        ln_rho,
        action,
        hbar,
        mass,
    }
}

/// Sampled polar pair plus its analytic derivative pack.
pub fn generate_manufactured_fields(
    seed: u64,
    grid: &Arc<SpacetimeGrid>,
    smoothness: usize,
    hbar: f64,
    mass: f64,
) -> Result<(PolarDecomposition, DerivativePack)> {
    let m = random_manufactured(seed, grid, smoothness, hbar, mass);
    let pack = m.pack(grid, StencilOrder::Second)?;
    Ok((pack.polar.clone(), pack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gradient, reduce::max_norm_at, Axis};

    fn grid(n: usize) -> Arc<SpacetimeGrid> {
        Arc::new(
            SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, TAU, n + 1),
                Axis::periodic(0.0, TAU, n),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn cosine_derivatives_match_finite_differences() {
        let p = Profile::zero(2).with(Term::Cosine {
            amplitude: 0.7,
            wavevector: vec![1.3, -2.0],
            phase: 0.4,
        });
        let x = [0.3, 1.1];
        let h = 1e-5;
        let fd = (p.derivative(&[x[0], x[1] + h], &[0]) - p.derivative(&[x[0], x[1] - h], &[0])) / (2.0 * h);
        assert!((fd - p.derivative(&x, &[0, 1])).abs() < 1e-8);
        let fd3 = (p.derivative(&[x[0] + h, x[1]], &[1, 1]) - p.derivative(&[x[0] - h, x[1]], &[1, 1])) / (2.0 * h);
        assert!((fd3 - p.derivative(&x, &[1, 1, 0])).abs() < 1e-7);
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let g = grid(16);
        let (a, _) = generate_manufactured_fields(11, &g, 3, 1.0, 1.0).unwrap();
        let (b, _) = generate_manufactured_fields(11, &g, 3, 1.0, 1.0).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_manufactured_fields(12, &g, 3, 1.0, 1.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_smoothness_gives_constant_fields() {
        let g = grid(16);
        let (p, pack) = generate_manufactured_fields(5, &g, 0, 1.0, 1.0).unwrap();
        assert!(p.rho().values().iter().all(|&r| r == 1.0));
        assert!(p.action().values().iter().all(|&s| s == 0.0));
        assert!(pack.box_phi.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn analytic_log_density_gradient_matches_stencil() {
        let err = |n: usize| {
            let g = grid(n);
            let m = random_manufactured(3, &g, 2, 1.0, 1.0);
            let lnr = m.ln_rho.sample(&g);
            let d = gradient(&lnr, StencilOrder::Second).unwrap();
            let e: Vec<f64> = (0..g.len())
                .map(|i| d.component(1)[i] - m.ln_rho.derivative(&g.coords(i), &[1]))
                .collect();
            max_norm_at(&e, &g.interior(1))
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 5e-2);
        assert!((3.5..4.5).contains(&(e1 / e2)), "{}", e1 / e2);
    }

    #[test]
    fn lift_places_profile_on_axis() {
        let p = Profile::gaussian_log_density(2.0, 1.0).lift(2, 1);
        assert_eq!(p.value(&[5.0, 2.0]), -1.0);
        assert_eq!(p.derivative(&[5.0, 2.0], &[0]), 0.0);
        assert_eq!(p.derivative(&[5.0, 2.0], &[1, 1]), -0.5);
    }
}
