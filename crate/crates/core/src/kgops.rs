//! D-operators, Klein-Gordon residual evaluators and the discrete action.
//!
//! `D_mu = grad_mu - (i/hbar) grad_mu S` and `D+_mu = grad_mu + (i/hbar) grad_mu S`.
//! All evaluators read from a [`DerivativePack`], and every norm is a max over
//! the pack's interior points.

use num_complex::Complex64;

use crate::derivatives::DerivativePack;
use crate::error::{Error, Result};
use crate::fields::PolarDecomposition;
use crate::grid::reduce::{compensated_sum, correlation};
use crate::grid::{
    dalembertian_at, dalembertian_values, partial, partial_at, RealField, SpacetimeGrid, StencilOrder,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DOperatorSign {
    #[default]
    Minus,
    Plus,
}

impl DOperatorSign {
    fn factor(self) -> f64 {
        match self {
            DOperatorSign::Minus => -1.0,
            DOperatorSign::Plus => 1.0,
        }
    }
}

/// Max-norm of a residual field plus the magnitude of the largest single term
/// that went into it, so callers can report a relative size.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residual {
    pub max_abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_abs / self.scale
        } else {
            self.max_abs
        }
    }

    fn record(&mut self, value: f64, terms: &[f64]) {
        self.max_abs = self.max_abs.max(value);
        for t in terms {
            self.scale = self.scale.max(*t);
        }
    }
}

/// Covariant `D_mu f` (or `D+_mu f`) for a sampled `f` with known gradient.
pub fn d_of(
    f: &[Complex64],
    grad_f: &[Vec<Complex64>],
    grad_s: &[Vec<f64>],
    hbar: f64,
    sign: DOperatorSign,
) -> Vec<Vec<Complex64>> {
    let k = sign.factor() / hbar;
    grad_f
        .iter()
        .zip(grad_s)
        .map(|(gf, gs)| {
            gf.iter()
                .zip(gs)
                .zip(f)
                .map(|((d, s), v)| d + I * (k * s) * v)
                .collect()
        })
        .collect()
}

/// `D_mu phi` (or `D+_mu phi`) for the pack's wavefunction.
pub fn apply_d(pack: &DerivativePack, sign: DOperatorSign) -> Vec<Vec<Complex64>> {
    d_of(&pack.phi, &pack.grad_phi, &pack.grad_action, pack.hbar(), sign)
}

/// Expanded `D_mu D^mu f` at one point, with the largest term magnitude:
/// `box f - (2i/hbar) grad S . grad f - (i/hbar)(box S) f - (1/hbar^2)(grad S . grad S) f`.
fn box_d_point(
    pack: &DerivativePack,
    f: Complex64,
    grad_f: &[Vec<Complex64>],
    box_f: Complex64,
    i: usize,
) -> (Complex64, f64) {
    let hbar = pack.hbar();
    let cross = pack.contract_complex(&pack.grad_action, grad_f, i) * (-2.0 * I / hbar);
    let drift = -I * (pack.box_action[i] / hbar) * f;
    let shell = -f * (pack.action_norm(i) / (hbar * hbar));
    let value = box_f + cross + drift + shell;
    let scale = box_f.norm().max(cross.norm()).max(drift.norm()).max(shell.norm());
    (value, scale)
}

/// `D_mu D^mu f` in expanded form for any sampled `f` sharing the pack's `S`.
pub fn box_d_of(
    pack: &DerivativePack,
    f: &[Complex64],
    grad_f: &[Vec<Complex64>],
    box_f: &[Complex64],
) -> Vec<Complex64> {
    (0..f.len())
        .map(|i| box_d_point(pack, f[i], grad_f, box_f[i], i).0)
        .collect()
}

/// `D_mu D^mu phi` in expanded form.
pub fn box_d(pack: &DerivativePack) -> Vec<Complex64> {
    box_d_of(pack, &pack.phi, &pack.grad_phi, &pack.box_phi)
}

/// `D^mu (D_mu phi)` by applying stencils to the sampled `D_mu phi`.
///
/// Cross-check for [`box_d`]; the nested stencil is wider but of the same order.
pub fn box_d_nested(pack: &DerivativePack) -> Vec<Complex64> {
    let grid = pack.grid();
    let hbar = pack.hbar();
    let d = apply_d(pack, DOperatorSign::Minus);
    let mut out = vec![Complex64::default(); grid.len()];
    for (mu, dm) in d.iter().enumerate() {
        let g = grid.inverse_metric(mu);
        let dd = partial(grid, dm, mu, pack.order);
        for i in 0..grid.len() {
            out[i] += (dd[i] - I * (pack.grad_action[mu][i] / hbar) * dm[i]) * g;
        }
    }
    out
}

/// Both routes of the shift theorem: `f = grad` compares `exp(iS/hbar) grad sqrt(rho)`
/// with `D_mu phi`, `f = box` compares `Qtilde phi` with `D_mu D^mu phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftResidual {
    pub gradient: Residual,
    pub dalembertian: Residual,
}

impl ShiftResidual {
    pub fn relative(&self) -> f64 {
        self.gradient.relative().max(self.dalembertian.relative())
    }
}

pub fn shift_residual(pack: &DerivativePack) -> ShiftResidual {
    let hbar = pack.hbar();
    let dim = pack.grid().dim();
    let mut gradient = Residual::default();
    let mut dalembertian = Residual::default();
    for i in pack.interior() {
        let phi = pack.phi[i];
        let phase = phi / pack.sqrt_rho[i];
        for mu in 0..dim {
            let rho_route = phase * pack.grad_sqrt_rho[mu][i];
            let s_term = I * (pack.grad_action[mu][i] / hbar) * phi;
            let phi_route = pack.grad_phi[mu][i] - s_term;
            gradient.record(
                (rho_route - phi_route).norm(),
                &[rho_route.norm(), pack.grad_phi[mu][i].norm(), s_term.norm()],
            );
        }
        let qphi = phi * (pack.box_sqrt_rho[i] / pack.sqrt_rho[i]);
        let (bd, scale) = box_d_point(pack, phi, &pack.grad_phi, pack.box_phi[i], i);
        dalembertian.record((qphi - bd).norm(), &[qphi.norm(), scale]);
    }
    ShiftResidual {
        gradient,
        dalembertian,
    }
}

fn check_lambda(pack: &DerivativePack, lambda: &RealField) -> Result<()> {
    lambda.ensure_same_grid(pack.grid())?;
    lambda.check_finite()
}

/// `(hbar^2 / (2 m Omega^2 sqrt(rho))) [box(lambda / sqrt(rho)) - lambda box(sqrt(rho)) / rho]`.
fn lambda_force(pack: &DerivativePack, lambda: &[f64]) -> Vec<f64> {
    let grid = pack.grid();
    let (hbar, m) = (pack.hbar(), pack.mass());
    let ratio: Vec<f64> = lambda.iter().zip(&pack.sqrt_rho).map(|(l, r)| l / r).collect();
    let box_ratio = dalembertian_values(grid, &ratio, pack.order);
    (0..grid.len())
        .map(|i| {
            let r = pack.sqrt_rho[i];
            let bracket = box_ratio[i] - lambda[i] * pack.box_sqrt_rho[i] / (r * r);
            hbar * hbar / (2.0 * m * pack.omega2(i) * r) * bracket
        })
        .collect()
}

/// Residual fields of the polar equations of motion and continuity.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarResidual {
    /// `grad S . grad S - m^2 Omega^2 [+ lambda force]`
    pub motion: Residual,
    /// `grad_mu (rho Omega^2 grad^mu S)`
    pub continuity: Residual,
    pub motion_field: Vec<f64>,
    pub continuity_field: Vec<f64>,
}

/// Continuity field `grad_mu(rho Omega^2 grad^mu S)` and its per-point term scale.
fn continuity_field(pack: &DerivativePack) -> (Vec<f64>, Vec<f64>) {
    let grid = pack.grid();
    let n = grid.len();
    match pack.mode {
        crate::derivatives::DerivativeMode::Stencil => {
            let mut out = vec![0.0; n];
            let mut scale = vec![0.0_f64; n];
            for mu in 0..grid.dim() {
                let g = grid.inverse_metric(mu);
                let flux: Vec<f64> = (0..n)
                    .map(|i| pack.rho(i) * pack.omega2(i) * g * pack.grad_action[mu][i])
                    .collect();
                for (i, d) in partial(grid, &flux, mu, pack.order).into_iter().enumerate() {
                    out[i] += d;
                    scale[i] = scale[i].max(d.abs());
                }
            }
            (out, scale)
        }
        crate::derivatives::DerivativeMode::Analytic => {
            let mut out = vec![0.0; n];
            let mut scale = vec![0.0; n];
            for i in 0..n {
                let (rho, w) = (pack.rho(i), pack.omega2(i));
                let diag = rho * w * pack.box_action[i];
                let mut value = diag;
                let mut s = diag.abs();
                for mu in 0..grid.dim() {
                    let g = grid.inverse_metric(mu);
                    let d_rho = 2.0 * pack.sqrt_rho[i] * pack.grad_sqrt_rho[mu][i];
                    let d_weight = w * d_rho + rho * pack.grad_omega2[mu][i];
                    let t = g * d_weight * pack.grad_action[mu][i];
                    value += t;
                    s = s.max(t.abs());
                }
                out[i] = value;
                scale[i] = s;
            }
            (out, scale)
        }
    }
}

/// The real (motion) and imaginary (continuity) polar equations.
///
/// With `lambda = None` the vacuum term is not evaluated at all; passing a
/// zero field adds an exact `+0.0`, so both paths agree bitwise.
pub fn kg_residual_polar(pack: &DerivativePack, lambda: Option<&RealField>) -> Result<PolarResidual> {
    let m = pack.mass();
    let n = pack.grid().len();
    let force = match lambda {
        Some(l) => {
            check_lambda(pack, l)?;
            Some(lambda_force(pack, l.values()))
        }
        None => None,
    };
    let mut motion_field = vec![0.0; n];
    let mut motion = Residual::default();
    let (continuity_field, cont_scale) = continuity_field(pack);
    let mut continuity = Residual::default();
    for i in pack.interior() {
        let shell = pack.action_norm(i);
        let mass_term = m * m * pack.omega2(i);
        let mut r = shell - mass_term;
        let mut terms = vec![shell.abs(), mass_term];
        if let Some(f) = &force {
            r += f[i];
            terms.push(f[i].abs());
        }
        motion_field[i] = r;
        motion.record(r.abs(), &terms);
        continuity.record(continuity_field[i].abs(), &[cont_scale[i]]);
    }
    Ok(PolarResidual {
        motion,
        continuity,
        motion_field,
        continuity_field,
    })
}

/// The wave form of the conformal Klein-Gordon equation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveResidual {
    /// `box phi + (i/hbar)(grad Q . grad S) phi + (m^2/hbar^2) phi`
    pub quantum_force: Residual,
    /// Same equation with `grad Omega^2 / Omega^2` and the log-derivative
    /// difference `(grad phi/phi - grad phi*/phi*)` in place of `grad Q` and `grad S`.
    pub log_derivative: Residual,
    /// Max difference between the two forms.
    pub form_gap: f64,
    pub real_part: f64,
    pub imag_part: f64,
    /// Max of the dissipative term `|(1/hbar)(grad Q . grad S) phi|`.
    pub dissipative: f64,
    pub field: Vec<Complex64>,
}

pub fn kg_residual_wave(pack: &DerivativePack) -> Result<WaveResidual> {
    let grid = pack.grid();
    let (hbar, m) = (pack.hbar(), pack.mass());
    let k2 = m * m / (hbar * hbar);
    let mut field = vec![Complex64::default(); grid.len()];
    let mut quantum_force = Residual::default();
    let mut log_derivative = Residual::default();
    let (mut form_gap, mut real_part, mut imag_part, mut dissipative) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in pack.interior() {
        let phi = pack.phi[i];
        if phi.norm_sqr() < pack.polar.floor() {
            return Err(Error::Node {
                index: grid.unravel(i),
                value: phi.norm_sqr(),
            });
        }
        let force = I * (pack.contract(&pack.grad_q, &pack.grad_action, i) / hbar) * phi;
        let mass_term = phi * k2;
        let eq9 = pack.box_phi[i] + force + mass_term;

        let mut coupling = Complex64::default();
        for mu in 0..grid.dim() {
            let log_grad = pack.grad_phi[mu][i] / phi;
            let diff = log_grad - log_grad.conj();
            coupling += diff * (0.5 * grid.inverse_metric(mu) * pack.grad_omega2[mu][i] / pack.omega2(i));
        }
        let eq6 = pack.box_phi[i] + coupling * phi + mass_term;

        field[i] = eq9;
        let scale = [pack.box_phi[i].norm(), force.norm(), mass_term.norm()];
        quantum_force.record(eq9.norm(), &scale);
        log_derivative.record(eq6.norm(), &[scale[0], (coupling * phi).norm(), scale[2]]);
        form_gap = form_gap.max((eq9 - eq6).norm());
        real_part = real_part.max(eq9.re.abs());
        imag_part = imag_part.max(eq9.im.abs());
        dissipative = dissipative.max(force.norm());
    }
    Ok(WaveResidual {
        quantum_force,
        log_derivative,
        form_gap,
        real_part,
        imag_part,
        dissipative,
        field,
    })
}

/// The algebraic link between the wave form and `D_mu D^mu phi`:
///
/// `wave - box_D phi = (i/hbar) [grad(rho Omega^2 grad S) / (rho Omega^2)] phi
///                     + ((m^2 - grad S . grad S) / hbar^2) phi`.
///
/// Holds for any node-free fields; the returned residual is its defect. When
/// continuity and the mass shell hold, the wave form and `D_mu D^mu phi` coincide.
pub fn wave_form_identity(pack: &DerivativePack) -> Residual {
    let (hbar, m) = (pack.hbar(), pack.mass());
    let bd = box_d(pack);
    let mut res = Residual::default();
    for i in pack.interior() {
        let phi = pack.phi[i];
        let wave = pack.box_phi[i]
            + I * (pack.contract(&pack.grad_q, &pack.grad_action, i) / hbar) * phi
            + phi * (m * m / (hbar * hbar));
        let log_weight = pack.box_action[i]
            + 2.0 * pack.contract(&pack.grad_action, &pack.grad_sqrt_rho, i) / pack.sqrt_rho[i]
            + pack.contract(&pack.grad_q, &pack.grad_action, i);
        let rhs = I * (log_weight / hbar) * phi + phi * ((m * m - pack.action_norm(i)) / (hbar * hbar));
        res.record((wave - bd[i] - rhs).norm(), &[wave.norm(), bd[i].norm(), rhs.norm()]);
    }
    res
}

/// Vacuum-coupled wave equation residual field and norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralKgResidual {
    pub residual: Residual,
    pub field: Vec<Complex64>,
}

/// `D_mu D^mu phi - [(1/(2 m Omega^2 rho)) (box - 2 m^2 (1 - Q) / hbar^2) lambda] phi`.
pub fn general_kg_residual(pack: &DerivativePack, lambda: &RealField) -> Result<GeneralKgResidual> {
    check_lambda(pack, lambda)?;
    let grid = pack.grid();
    let (hbar, m) = (pack.hbar(), pack.mass());
    let l = lambda.values();
    let box_l = dalembertian_values(grid, l, pack.order);
    let bd = box_d(pack);
    let mut field = vec![Complex64::default(); grid.len()];
    let mut residual = Residual::default();
    for i in pack.interior() {
        let source = box_l[i] - 2.0 * m * m * (1.0 - pack.q(i)) / (hbar * hbar) * l[i];
        let coupling = pack.phi[i] * (source / (2.0 * m * pack.omega2(i) * pack.rho(i)));
        field[i] = bd[i] - coupling;
        residual.record(field[i].norm(), &[bd[i].norm(), coupling.norm()]);
    }
    Ok(GeneralKgResidual { residual, field })
}

/// `D_mu D^mu phi + (M^2 / hbar^2) phi` for a given vacuum-mass-squared field.
pub fn mass_substituted_residual(pack: &DerivativePack, m2: &[f64]) -> Result<GeneralKgResidual> {
    let grid = pack.grid();
    if m2.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: m2.len(),
        });
    }
    let hbar = pack.hbar();
    let bd = box_d(pack);
    let mut field = vec![Complex64::default(); grid.len()];
    let mut residual = Residual::default();
    for i in pack.interior() {
        let mass = pack.phi[i] * (m2[i] / (hbar * hbar));
        field[i] = bd[i] + mass;
        residual.record(field[i].norm(), &[bd[i].norm(), mass.norm()]);
    }
    Ok(GeneralKgResidual { residual, field })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionParams {
    pub kappa: f64,
    pub hbar: f64,
    pub mass: f64,
    /// Must be zero: only constant diagonal metrics are supported.
    pub ricci_scalar: f64,
}

impl ActionParams {
    pub fn flat(kappa: f64, hbar: f64, mass: f64) -> Self {
        Self {
            kappa,
            hbar,
            mass,
            ricci_scalar: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ricci_scalar != 0.0 {
            return Err(Error::CurvedBackground(self.ricci_scalar));
        }
        for (name, value) in [("kappa", self.kappa), ("hbar", self.hbar), ("mass", self.mass)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

/// Sampled action variables with a pointwise density, so that single-site
/// perturbations can be re-evaluated locally.
struct ActionLattice<'a> {
    grid: &'a SpacetimeGrid,
    order: StencilOrder,
    params: ActionParams,
    rho: Vec<f64>,
    sqrt_rho: Vec<f64>,
    action: Vec<f64>,
    omega: Vec<f64>,
    omega2: Vec<f64>,
    lambda: Vec<f64>,
}

impl<'a> ActionLattice<'a> {
    fn new(
        p: &'a PolarDecomposition,
        omega2: &RealField,
        lambda: &RealField,
        params: ActionParams,
        order: StencilOrder,
    ) -> Result<Self> {
        params.validate()?;
        omega2.ensure_same_grid(p.grid())?;
        lambda.ensure_same_grid(p.grid())?;
        omega2.check_finite()?;
        lambda.check_finite()?;
        if let Some(i) = omega2.values().iter().position(|w| *w <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega2",
                value: omega2.values()[i],
                reason: "conformal factor must be positive",
            });
        }
        let rho = p.rho().values().to_vec();
        Ok(Self {
            grid: p.grid(),
            order,
            params,
            sqrt_rho: rho.iter().map(|r| r.sqrt()).collect(),
            rho,
            action: p.action().values().to_vec(),
            omega: omega2.values().iter().map(|w| w.sqrt()).collect(),
            omega2: omega2.values().to_vec(),
            lambda: lambda.values().to_vec(),
        })
    }

    fn contract_at(&self, values: &[f64], i: usize) -> f64 {
        (0..self.grid.dim())
            .map(|mu| {
                let d = partial_at(self.grid, values, mu, i, self.order);
                self.grid.inverse_metric(mu) * d * d
            })
            .sum()
    }

    fn quantum_potential_at(&self, i: usize) -> f64 {
        let ActionParams { hbar, mass, .. } = self.params;
        hbar * hbar / (mass * mass) * dalembertian_at(self.grid, &self.sqrt_rho, i, self.order) / self.sqrt_rho[i]
    }

    /// Lagrangian density at `i`, without the `sqrt(-g)` and cell-volume weight.
    fn density(&self, i: usize) -> f64 {
        let ActionParams {
            kappa,
            mass,
            ricci_scalar,
            ..
        } = self.params;
        let w = self.omega2[i];
        let gravity = (ricci_scalar * w - 6.0 * self.contract_at(&self.omega, i)) / (2.0 * kappa);
        let matter = self.rho[i] / mass * w * self.contract_at(&self.action, i) - mass * self.rho[i] * w * w;
        let constraint = self.lambda[i] * (w.ln() - self.quantum_potential_at(i));
        gravity + matter + constraint
    }

    fn weight(&self) -> f64 {
        self.grid.volume_weight() * self.grid.cell_volume()
    }

    fn total(&self) -> f64 {
        compensated_sum((0..self.grid.len()).map(|i| self.density(i))) * self.weight()
    }

    /// Points whose density depends on the sample at `j`: the stencil lines through `j`.
    fn support(&self, j: usize) -> Vec<usize> {
        let mut out = vec![j];
        for a in 0..self.grid.dim() {
            let axis = self.grid.axis(a);
            let n = axis.points as isize;
            let i = self.grid.index_along(j, a) as isize;
            for off in -3..=3_isize {
                let k = match axis.boundary {
                    crate::grid::Boundary::Periodic => (i + off).rem_euclid(n),
                    crate::grid::Boundary::OneSided => i + off,
                };
                if (0..n).contains(&k) {
                    out.push((j as isize + (k - i) * self.grid.stride(a) as isize) as usize);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn local_sum(&self, support: &[usize]) -> f64 {
        compensated_sum(support.iter().map(|&i| self.density(i))) * self.weight()
    }

    /// Sets one sample and returns the action restricted to `support`.
    fn perturbed_sum(&mut self, variable: ActionVariable, j: usize, value: f64, support: &[usize]) -> f64 {
        match variable {
            ActionVariable::Action => self.action[j] = value,
            ActionVariable::Density => {
                self.rho[j] = value;
                self.sqrt_rho[j] = value.sqrt();
            }
            ActionVariable::Lambda => self.lambda[j] = value,
        }
        self.local_sum(support)
    }
}

/// Discretized action on a flat background.
///
/// `omega2` is the independent conformal-factor field; the constraint term
/// vanishes when it equals `exp(Q)` computed with the same stencils.
pub fn action_value(
    p: &PolarDecomposition,
    omega2: &RealField,
    lambda: &RealField,
    params: &ActionParams,
    order: StencilOrder,
) -> Result<f64> {
    Ok(ActionLattice::new(p, omega2, lambda, *params, order)?.total())
}

/// Which action variable a gradient comparison refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionVariable {
    Action,
    Density,
    Lambda,
}

impl ActionVariable {
    pub fn label(self) -> &'static str {
        match self {
            ActionVariable::Action => "S",
            ActionVariable::Density => "rho",
            ActionVariable::Lambda => "lambda",
        }
    }
}

/// Finite-difference functional derivative against the discrete Euler-Lagrange field.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientComparison {
    pub variable: ActionVariable,
    pub points: Vec<usize>,
    pub finite_difference: Vec<f64>,
    pub euler_lagrange: Vec<f64>,
    pub max_deviation: f64,
    /// `max|fd - el| / max(max|el|, max|fd|, m rho_max)`.
    pub relative_deviation: f64,
    pub correlation: f64,
    pub fd_max: f64,
    pub el_max: f64,
    pub scale: f64,
}

impl GradientComparison {
    fn new(variable: ActionVariable, points: Vec<usize>, fd: Vec<f64>, el: Vec<f64>, floor_scale: f64) -> Self {
        let max = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let max_deviation = fd.iter().zip(&el).fold(0.0_f64, |a, (f, e)| a.max((f - e).abs()));
        let (fd_max, el_max) = (max(&fd), max(&el));
        let scale = fd_max.max(el_max).max(floor_scale);
        Self {
            variable,
            correlation: correlation(&fd, &el),
            points,
            finite_difference: fd,
            euler_lagrange: el,
            max_deviation,
            relative_deviation: max_deviation / scale,
            fd_max,
            el_max,
            scale,
        }
    }

    /// Largest gradient relative to the action scale `m rho_max`.
    pub fn relative_magnitude(&self) -> f64 {
        self.fd_max.max(self.el_max) / self.scale.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionGradientCheck {
    pub epsilon: f64,
    pub action: f64,
    pub comparisons: Vec<GradientComparison>,
}

impl ActionGradientCheck {
    pub fn max_relative_deviation(&self) -> f64 {
        self.comparisons
            .iter()
            .map(|c| c.relative_deviation)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_deviation() <= tolerance
    }

    pub fn get(&self, variable: ActionVariable) -> &GradientComparison {
        self.comparisons
            .iter()
            .find(|c| c.variable == variable)
            .expect("all three variables are compared")
    }
}

/// Points used by the gradient check: far enough from one-sided edges that
/// every stencil row touching them is the central one.
pub fn action_check_margin(order: StencilOrder) -> usize {
    2 * order.half_width() + 2
}

/// Central finite-difference functional derivatives of [`action_value`] with
/// respect to single-site perturbations of `S`, `rho` and `lambda`, compared
/// with the discrete Euler-Lagrange fields
///
/// - `S`: `-(2/m) div(rho Omega^2 grad S)`
/// - `rho`: `(Omega^2/m) grad S . grad S - m Omega^4 - (hbar^2/(2 m^2 sqrt(rho))) [box(lambda/sqrt(rho)) - lambda box(sqrt(rho))/rho]`
/// - `lambda`: `ln Omega^2 - Q`
///
/// where every derivative is the same stencil the action uses.
pub fn action_gradient_check(
    p: &PolarDecomposition,
    omega2: &RealField,
    lambda: &RealField,
    params: &ActionParams,
    order: StencilOrder,
    epsilon: f64,
) -> Result<ActionGradientCheck> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must be positive",
        });
    }
    let mut lat = ActionLattice::new(p, omega2, lambda, *params, order)?;
    let action = lat.total();
    let grid = lat.grid;
    let n = grid.len();
    let ActionParams { hbar, mass, .. } = *params;
    let points = grid.interior(action_check_margin(order));
    let weight = lat.weight();

    // Discrete Euler-Lagrange fields.
    let mut el_s = vec![0.0; n];
    for mu in 0..grid.dim() {
        let g = grid.inverse_metric(mu);
        let ds = partial(grid, &lat.action, mu, order);
        let flux: Vec<f64> = (0..n).map(|i| lat.rho[i] * lat.omega2[i] * g * ds[i]).collect();
        for (e, d) in el_s.iter_mut().zip(partial(grid, &flux, mu, order)) {
            *e -= 2.0 / mass * d;
        }
    }
    let ratio: Vec<f64> = (0..n).map(|i| lat.lambda[i] / lat.sqrt_rho[i]).collect();
    let box_ratio = dalembertian_values(grid, &ratio, order);
    let box_r = dalembertian_values(grid, &lat.sqrt_rho, order);
    let el_rho: Vec<f64> = (0..n)
        .map(|i| {
            let w = lat.omega2[i];
            let r = lat.sqrt_rho[i];
            w / mass * lat.contract_at(&lat.action, i)
                - mass * w * w
                - hbar * hbar / (2.0 * mass * mass * r) * (box_ratio[i] - lat.lambda[i] * box_r[i] / lat.rho[i])
        })
        .collect();
    let el_lambda: Vec<f64> = (0..n)
        .map(|i| lat.omega2[i].ln() - lat.quantum_potential_at(i))
        .collect();

    let rho_max = lat.rho.iter().copied().fold(0.0, f64::max);
    let floor_scale = mass * rho_max;

    let mut comparisons = Vec::with_capacity(3);
    for (variable, el) in [
        (ActionVariable::Action, el_s),
        (ActionVariable::Density, el_rho),
        (ActionVariable::Lambda, el_lambda),
    ] {
        let mut fd = Vec::with_capacity(points.len());
        for &j in &points {
            let support = lat.support(j);
            let original = match variable {
                ActionVariable::Action => lat.action[j],
                ActionVariable::Density => lat.rho[j],
                ActionVariable::Lambda => lat.lambda[j],
            };
            let plus = lat.perturbed_sum(variable, j, original + epsilon, &support);
            let minus = lat.perturbed_sum(variable, j, original - epsilon, &support);
            lat.perturbed_sum(variable, j, original, &support);
            fd.push((plus - minus) / (2.0 * epsilon * weight));
        }
        let el_at: Vec<f64> = points.iter().map(|&j| el[j]).collect();
        comparisons.push(GradientComparison::new(variable, points.clone(), fd, el_at, floor_scale));
    }
    Ok(ActionGradientCheck {
        epsilon,
        action,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fields::quantum_potential;
    use crate::grid::{Axis, Field};
    use crate::manufactured::{random_manufactured, ManufacturedPolar, Profile, Term};

    fn plane_wave_grid(n: usize) -> Arc<SpacetimeGrid> {
        Arc::new(
            SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, 1.0, n), Axis::one_sided(0.0, 1.0, n)]).unwrap(),
        )
    }

    fn plane_wave(mass: f64, p: f64) -> ManufacturedPolar {
        let e = (mass * mass + p * p).sqrt();
        ManufacturedPolar {
            ln_rho: Profile::zero(2).with(Term::Constant(0.0)),
            action: Profile::zero(2).with(Term::Linear(vec![e, -p])),
            hbar: 0.7,
            mass,
        }
    }

    #[test]
    fn d_without_phase_is_gradient() {
        let g = plane_wave_grid(9);
        let m = ManufacturedPolar {
            ln_rho: Profile::zero(2).with(Term::Quadratic {
                coeffs: vec![0.0, -0.3],
                center: vec![0.0, 0.5],
            }),
            action: Profile::zero(2),
            hbar: 1.0,
            mass: 1.0,
        };
        let pack = m.pack(&g, StencilOrder::Second).unwrap();
        assert_eq!(apply_d(&pack, DOperatorSign::Minus), pack.grad_phi);
        assert_eq!(apply_d(&pack, DOperatorSign::Plus), pack.grad_phi);
    }

    #[test]
    fn d_kills_pure_phase_wave() {
        let g = plane_wave_grid(17);
        let pack = DerivativePack::from_stencils(&plane_wave(1.0, 0.4).polar(&g).unwrap(), StencilOrder::Second)
            .unwrap();
        let d = apply_d(&pack, DOperatorSign::Minus);
        let worst = pack
            .interior()
            .iter()
            .flat_map(|&i| d.iter().map(move |c| c[i].norm()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-2, "{worst}");
    }

    #[test]
    fn plane_wave_residuals_vanish_analytically() {
        let g = plane_wave_grid(9);
        let pack = plane_wave(1.3, 0.8).pack(&g, StencilOrder::Second).unwrap();
        let polar = kg_residual_polar(&pack, None).unwrap();
        assert!(polar.motion.max_abs < 1e-12 && polar.continuity.max_abs < 1e-12);
        assert!(kg_residual_wave(&pack).unwrap().quantum_force.max_abs < 1e-12);
        let bd = box_d(&pack);
        assert!(pack.interior().iter().all(|&i| bd[i].norm() < 1e-12));
    }

    #[test]
    fn zero_lambda_matches_absent_lambda_bitwise() {
        let g = Arc::new(
            SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 2.0, 17),
                Axis::periodic(0.0, std::f64::consts::TAU, 16),
            ])
            .unwrap(),
        );
        let m = random_manufactured(3, &g, 2, 1.0, 2.0);
        let pack = DerivativePack::from_stencils(&m.polar(&g).unwrap(), StencilOrder::Second).unwrap();
        let zero = Field::constant(g.clone(), 0.0);
        assert_eq!(
            kg_residual_polar(&pack, None).unwrap(),
            kg_residual_polar(&pack, Some(&zero)).unwrap()
        );
        let general = general_kg_residual(&pack, &zero).unwrap();
        let bd = box_d(&pack);
        for i in pack.interior() {
            assert_eq!(general.field[i], bd[i]);
        }
    }

    #[test]
    fn general_residual_is_affine_in_lambda() {
        let g = Arc::new(
            SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 2.0, 17),
                Axis::periodic(0.0, std::f64::consts::TAU, 16),
            ])
            .unwrap(),
        );
        let pack = random_manufactured(5, &g, 2, 1.0, 2.0).pack(&g, StencilOrder::Second).unwrap();
        let l1 = Field::from_fn(g.clone(), |x| 0.2 * x[1].cos() + 0.1 * x[0]);
        let r0 = general_kg_residual(&pack, &Field::constant(g.clone(), 0.0)).unwrap();
        let r1 = general_kg_residual(&pack, &l1).unwrap();
        let r2 = general_kg_residual(&pack, &l1.map(|v| 2.0 * v)).unwrap();
        for i in pack.interior() {
            let slope1 = r1.field[i] - r0.field[i];
            let slope2 = r2.field[i] - r1.field[i];
            assert!((slope1 - slope2).norm() <= 1e-12 * (1.0 + slope1.norm()));
        }
    }

    #[test]
    fn constant_fields_give_minus_m_rho_volume() {
        let g = plane_wave_grid(9);
        let rho = 2.5;
        let p = PolarDecomposition::new(Field::constant(g.clone(), rho), Field::constant(g.clone(), 0.0), 1.0, 1.5)
            .unwrap();
        let params = ActionParams::flat(1.0, 1.0, 1.5);
        let a = action_value(
            &p,
            &Field::constant(g.clone(), 1.0),
            &Field::constant(g.clone(), 0.0),
            &params,
            StencilOrder::Second,
        )
        .unwrap();
        let expected = -1.5 * rho * g.len() as f64 * g.cell_volume();
        assert!((a - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn constraint_term_vanishes_when_imposed() {
        let g = Arc::new(
            SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 2.0, 13),
                Axis::periodic(0.0, std::f64::consts::TAU, 16),
            ])
            .unwrap(),
        );
        let p = random_manufactured(9, &g, 2, 1.0, 2.0).polar(&g).unwrap();
        let c = quantum_potential(&p, StencilOrder::Second).unwrap();
        let params = ActionParams::flat(1.0, 1.0, 2.0);
        let zero = Field::constant(g.clone(), 0.0);
        let lam = Field::from_fn(g.clone(), |x| 3.0 + x[1].sin());
        let a0 = action_value(&p, &c.omega2, &zero, &params, StencilOrder::Second).unwrap();
        let a1 = action_value(&p, &c.omega2, &lam, &params, StencilOrder::Second).unwrap();
        assert!((a0 - a1).abs() < 1e-12 * a0.abs());
    }

    #[test]
    fn curved_background_rejected() {
        let g = plane_wave_grid(9);
        let p = PolarDecomposition::new(Field::constant(g.clone(), 1.0), Field::constant(g.clone(), 0.0), 1.0, 1.0)
            .unwrap();
        let mut params = ActionParams::flat(1.0, 1.0, 1.0);
        params.ricci_scalar = 0.5;
        let one = Field::constant(g.clone(), 1.0);
        assert_eq!(
            action_value(&p, &one, &one, &params, StencilOrder::Second),
            Err(Error::CurvedBackground(0.5))
        );
    }

    #[test]
    fn local_support_matches_full_action_difference() {
        let g = Arc::new(
            SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, 2.0, 11), Axis::periodic(0.0, 3.0, 10)]).unwrap(),
        );
        let p = random_manufactured(2, &g, 2, 1.0, 2.0).polar(&g).unwrap();
        let omega2 = Field::from_fn(g.clone(), |x| 1.0 + 0.1 * x[1].sin());
        let lambda = Field::from_fn(g.clone(), |x| 0.5 * x[0] + x[1].cos());
        let params = ActionParams::flat(1.0, 1.0, 2.0);
        let mut lat = ActionLattice::new(&p, &omega2, &lambda, params, StencilOrder::Second).unwrap();
        let j = g.ravel(&[1, 4]);
        let support = lat.support(j);
        let (full0, local0) = (lat.total(), lat.local_sum(&support));
        lat.rho[j] += 0.01;
        lat.sqrt_rho[j] = lat.rho[j].sqrt();
        lat.action[j] -= 0.02;
        let (full1, local1) = (lat.total(), lat.local_sum(&support));
        assert!(((full1 - full0) - (local1 - local0)).abs() < 1e-12);
    }
}
