//! Gamma matrices, spinor fields and the vacuum-corrected Dirac residuals.
//!
//! Column equations act on `Psi`; row equations act on `Psi-bar = Psi^dagger gamma^0`
//! from the right. The mass term of a residual is `rest_sign m + vacuum_sign M`,
//! where the rest term is only present in assigned mode.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::derivatives::DerivativePack;
use crate::error::{Error, Result};
use crate::grid::{dalembertian_values, partial, Field, RealField, SpacetimeGrid, StencilOrder};
use crate::kgops::{box_d_of, Residual};
use crate::vacuum::VacuumMass;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaDim {
    /// 1+1 dimensions, 2x2 matrices.
    Two,
    /// 3+1 dimensions, 4x4 Dirac representation.
    Four,
}

impl GammaDim {
    pub fn spacetime_dim(self) -> usize {
        match self {
            GammaDim::Two => 2,
            GammaDim::Four => 4,
        }
    }

    pub fn spinor_size(self) -> usize {
        self.spacetime_dim()
    }

    pub fn for_spacetime(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(GammaDim::Two),
            4 => Ok(GammaDim::Four),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }
}

/// A set of gamma matrices `gamma^mu` for the metric `(+, -, ..., -)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRepresentation {
    dim: GammaDim,
    matrices: Vec<DMatrix<Complex64>>,
    metric: Vec<f64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 1+1: `gamma^0 = diag(1, -1)`, `gamma^1 = [[0, 1], [-1, 0]]`.
/// 3+1: Dirac representation `gamma^0 = diag(I, -I)`, `gamma^k = [[0, sigma_k], [-sigma_k, 0]]`.
pub fn build_gamma(dim: GammaDim) -> GammaRepresentation {
    let matrices = match dim {
        GammaDim::Two => vec![
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]),
        ],
        GammaDim::Four => {
            let z = c(0.0, 0.0);
            let pauli = [
                [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
                [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
                [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
            ];
            let mut g0 = DMatrix::zeros(4, 4);
            for k in 0..4 {
                g0[(k, k)] = if k < 2 { c(1.0, 0.0) } else { c(-1.0, 0.0) };
            }
            let mut out = vec![g0];
            for s in &pauli {
                let mut g = DMatrix::zeros(4, 4);
                for r in 0..2 {
                    for col in 0..2 {
                        g[(r, col + 2)] = s[r][col];
                        g[(r + 2, col)] = -s[r][col];
                    }
                }
                out.push(g);
            }
            out
        }
    };
    let n = dim.spacetime_dim();
    let mut metric = vec![-1.0; n];
    metric[0] = 1.0;
    let rep = GammaRepresentation { dim, matrices, metric };
    assert_eq!(rep.clifford_defect(), 0.0, "gamma matrices violate the Clifford relation");
    rep
}

impl GammaRepresentation {
    pub fn dim(&self) -> GammaDim {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.dim.spinor_size()
    }

    pub fn metric(&self) -> &[f64] {
        &self.metric
    }

    pub fn gamma(&self, mu: usize) -> &DMatrix<Complex64> {
        &self.matrices[mu]
    }

    pub fn identity(&self) -> DMatrix<Complex64> {
        DMatrix::identity(self.size(), self.size())
    }

    /// Largest entry of `gamma^mu gamma^nu + gamma^nu gamma^mu - 2 eta^{mu nu} I` over all pairs.
    pub fn clifford_defect(&self) -> f64 {
        let n = self.matrices.len();
        let mut worst = 0.0_f64;
        for mu in 0..n {
            for nu in 0..n {
                let (a, b) = (&self.matrices[mu], &self.matrices[nu]);
                let eta = if mu == nu { 1.0 / self.metric[mu] } else { 0.0 };
                let d = a * b + b * a - self.identity() * c(2.0 * eta, 0.0);
                worst = worst.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Largest entry of `(gamma^0)^dagger - gamma^0` and `(gamma^k)^dagger + gamma^k`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.matrices
            .iter()
            .enumerate()
            .map(|(mu, g)| {
                let d = if mu == 0 { g.adjoint() - g } else { g.adjoint() + g };
                d.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `gamma^mu a_mu` for a covariant `a`.
    pub fn slash(&self, a: &[f64]) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.size(), self.size());
        for (g, &x) in self.matrices.iter().zip(a) {
            out += g * c(x, 0.0);
        }
        out
    }

    fn check_grid(&self, grid: &SpacetimeGrid) -> Result<()> {
        if grid.metric() != self.metric.as_slice() {
            return Err(Error::SpinorMismatch("grid metric differs from the gamma representation"));
        }
        Ok(())
    }
}

/// `N` complex components per grid point, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Arc<SpacetimeGrid>,
    rep: GammaRepresentation,
    components: Vec<Vec<Complex64>>,
}

impl SpinorField {
    pub fn new(grid: Arc<SpacetimeGrid>, rep: GammaRepresentation, components: Vec<Vec<Complex64>>) -> Result<Self> {
        rep.check_grid(&grid)?;
        if components.len() != rep.size() {
            return Err(Error::SpinorMismatch("component count differs from the representation size"));
        }
        for comp in &components {
            if comp.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: comp.len(),
                });
            }
            if let Some(i) = comp.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite { index: grid.unravel(i) });
            }
        }
        Ok(Self { grid, rep, components })
    }

    pub fn from_fn(
        grid: Arc<SpacetimeGrid>,
        rep: GammaRepresentation,
        f: impl Fn(&[f64]) -> Vec<Complex64>,
    ) -> Result<Self> {
        let n = rep.size();
        let mut components = vec![Vec::with_capacity(grid.len()); n];
        for i in 0..grid.len() {
            let v = f(&grid.coords(i));
            if v.len() != n {
                return Err(Error::SpinorMismatch("sample has the wrong number of components"));
            }
            for (comp, z) in components.iter_mut().zip(v) {
                comp.push(z);
            }
        }
        Self::new(grid, rep, components)
    }

    /// `chi phi` for a constant spinor `chi` and the pack's scalar wavefunction.
    pub fn from_scalar(pack: &DerivativePack, rep: GammaRepresentation, chi: &[Complex64]) -> Result<Self> {
        let components = chi.iter().map(|&a| pack.phi.iter().map(|&p| a * p).collect()).collect();
        Self::new(pack.grid().clone(), rep, components)
    }

    pub fn zeros(grid: Arc<SpacetimeGrid>, rep: GammaRepresentation) -> Result<Self> {
        let components = vec![vec![Complex64::default(); grid.len()]; rep.size()];
        Self::new(grid, rep, components)
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn rep(&self) -> &GammaRepresentation {
        &self.rep
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn at(&self, i: usize) -> Vec<Complex64> {
        self.components.iter().map(|c| c[i]).collect()
    }

    pub fn map_global_phase(&self, alpha: f64) -> Self {
        let w = Complex64::from_polar(1.0, alpha);
        Self {
            components: self.components.iter().map(|c| c.iter().map(|z| z * w).collect()).collect(),
            ..self.clone()
        }
    }
}

/// First and second derivatives of every spinor component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorDerivatives {
    /// `[component][mu][point]`, covariant.
    pub grad: Vec<Vec<Vec<Complex64>>>,
    /// `[component][point]`
    pub dalembertian: Vec<Vec<Complex64>>,
}

impl SpinorDerivatives {
    pub fn from_stencils(psi: &SpinorField, order: StencilOrder) -> Self {
        let grid = psi.grid();
        Self {
            grad: psi
                .components
                .iter()
                .map(|c| (0..grid.dim()).map(|mu| partial(grid, c, mu, order)).collect())
                .collect(),
            dalembertian: psi
                .components
                .iter()
                .map(|c| dalembertian_values(grid, c, order))
                .collect(),
        }
    }

    /// Derivatives of `chi phi` taken from the scalar pack.
    pub fn from_scalar(pack: &DerivativePack, chi: &[Complex64]) -> Self {
        Self {
            grad: chi
                .iter()
                .map(|&a| pack.grad_phi.iter().map(|g| g.iter().map(|&v| a * v).collect()).collect())
                .collect(),
            dalembertian: chi.iter().map(|&a| pack.box_phi.iter().map(|&v| a * v).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleSign {
    /// Column equation on `Psi`, rest term `-m`.
    Particle,
    /// Row equation on `Psi-bar`, rest term `+m`.
    Antiparticle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VacuumSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiracVariant {
    pub particle: ParticleSign,
    pub vacuum: VacuumSign,
}

impl DiracVariant {
    pub const ALL: [DiracVariant; 4] = [
        DiracVariant {
            particle: ParticleSign::Particle,
            vacuum: VacuumSign::Minus,
        },
        DiracVariant {
            particle: ParticleSign::Particle,
            vacuum: VacuumSign::Plus,
        },
        DiracVariant {
            particle: ParticleSign::Antiparticle,
            vacuum: VacuumSign::Plus,
        },
        DiracVariant {
            particle: ParticleSign::Antiparticle,
            vacuum: VacuumSign::Minus,
        },
    ];

    pub fn rest_sign(self) -> f64 {
        match self.particle {
            ParticleSign::Particle => -1.0,
            ParticleSign::Antiparticle => 1.0,
        }
    }

    pub fn vacuum_sign(self) -> f64 {
        match self.vacuum {
            VacuumSign::Plus => 1.0,
            VacuumSign::Minus => -1.0,
        }
    }

    /// Both signs flipped: the paired equation for the conjugate spinor.
    pub fn flipped(self) -> Self {
        Self {
            particle: match self.particle {
                ParticleSign::Particle => ParticleSign::Antiparticle,
                ParticleSign::Antiparticle => ParticleSign::Particle,
            },
            vacuum: match self.vacuum {
                VacuumSign::Plus => VacuumSign::Minus,
                VacuumSign::Minus => VacuumSign::Plus,
            },
        }
    }

    pub fn label(self) -> String {
        let p = match self.particle {
            ParticleSign::Particle => "particle",
            ParticleSign::Antiparticle => "antiparticle",
        };
        let v = match self.vacuum {
            VacuumSign::Plus => "plus",
            VacuumSign::Minus => "minus",
        };
        format!("{p}-{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiracMode {
    /// `i hbar gamma^mu D_mu Psi + vacuum_sign M Psi`
    DForm,
    /// `i hbar gamma^mu grad_mu Psi + gamma^mu grad_mu S Psi + vacuum_sign M Psi`
    Expanded,
    /// `gamma^mu grad_mu S Psi` replaced by `-m Psi`:
    /// `i hbar gamma^mu grad_mu Psi - m Psi + vacuum_sign M Psi`
    Assigned,
}

impl DiracMode {
    pub fn label(self) -> &'static str {
        match self {
            DiracMode::DForm => "d-form",
            DiracMode::Expanded => "expanded",
            DiracMode::Assigned => "assigned",
        }
    }
}

/// Inputs shared by the residual evaluators.
#[derive(Debug, Clone, Copy)]
pub struct DiracContext<'a> {
    pub hbar: f64,
    pub mass: f64,
    /// Covariant `grad_mu S`, `[mu][point]`.
    pub grad_action: &'a [Vec<f64>],
    pub vacuum: Option<&'a VacuumMass>,
    /// Permit imaginary `M` (diagnostic use only).
    pub allow_complex: bool,
    pub margin: usize,
}

impl<'a> DiracContext<'a> {
    pub fn from_pack(pack: &'a DerivativePack) -> Self {
        Self {
            hbar: pack.hbar(),
            mass: pack.mass(),
            grad_action: &pack.grad_action,
            vacuum: None,
            allow_complex: false,
            margin: pack.margin(),
        }
    }

    pub fn with_vacuum(mut self, vm: &'a VacuumMass) -> Self {
        self.vacuum = Some(vm);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracResidual {
    pub residual: Residual,
    /// `[component][point]`; zero outside the interior.
    pub field: Vec<Vec<Complex64>>,
}

fn vacuum_masses(ctx: &DiracContext, grid: &SpacetimeGrid) -> Result<Vec<Complex64>> {
    match ctx.vacuum {
        None => Ok(vec![Complex64::default(); grid.len()]),
        Some(vm) => {
            if vm.grid().as_ref() != grid {
                return Err(Error::GridMismatch);
            }
            let count = vm.complex_count();
            if count > 0 && !ctx.allow_complex {
                return Err(Error::ComplexMass { count });
            }
            Ok((0..grid.len()).map(|i| vm.mass(i)).collect())
        }
    }
}

/// Residual of the selected equation at every interior point.
pub fn dirac_residual(
    psi: &SpinorField,
    derivs: &SpinorDerivatives,
    ctx: &DiracContext,
    variant: DiracVariant,
    mode: DiracMode,
) -> Result<DiracResidual> {
    let grid = psi.grid();
    let rep = psi.rep();
    let dim = grid.dim();
    let n = rep.size();
    if ctx.grad_action.len() != dim || ctx.grad_action.iter().any(|g| g.len() != grid.len()) {
        return Err(Error::GridMismatch);
    }
    let masses = vacuum_masses(ctx, grid)?;
    let hbar = ctx.hbar;
    let row = variant.particle == ParticleSign::Antiparticle;
    let g0 = rep.gamma(0);
    let mut field = vec![vec![Complex64::default(); grid.len()]; n];
    let mut residual = Residual::default();
    let mut v = vec![Complex64::default(); n];
    let mut dv = vec![vec![Complex64::default(); n]; dim];
    for i in grid.interior(ctx.margin) {
        // Column: v = Psi, dv = d Psi. Row: v = Psi-bar, dv = d Psi-bar.
        for a in 0..n {
            if row {
                v[a] = (0..n).map(|b| psi.components[b][i].conj() * g0[(b, a)]).sum();
                for mu in 0..dim {
                    dv[mu][a] = (0..n).map(|b| derivs.grad[b][mu][i].conj() * g0[(b, a)]).sum();
                }
            } else {
                v[a] = psi.components[a][i];
                for mu in 0..dim {
                    dv[mu][a] = derivs.grad[a][mu][i];
                }
            }
        }
        let mass_term = masses[i] * variant.vacuum_sign();
        let scalar = match mode {
            DiracMode::Assigned => mass_term + variant.rest_sign() * ctx.mass,
            _ => mass_term,
        };
        // Phase-gradient coupling: +gamma grad S on columns, -gamma grad S on rows;
        // the D-form gives the same term through D (columns) or D+ (rows).
        let s_sign = match (mode, row) {
            (DiracMode::Assigned, _) => 0.0,
            (_, false) => 1.0,
            (_, true) => -1.0,
        };
        let mut out = vec![Complex64::default(); n];
        let mut scale = 0.0_f64;
        for mu in 0..dim {
            let g = rep.gamma(mu);
            let ds = ctx.grad_action[mu][i];
            for a in 0..n {
                for b in 0..n {
                    let (deriv, coupled) = if row {
                        (dv[mu][b] * g[(b, a)], v[b] * g[(b, a)])
                    } else {
                        (g[(a, b)] * dv[mu][b], g[(a, b)] * v[b])
                    };
                    let kinetic = I * hbar * deriv;
                    let phase = coupled * (s_sign * ds);
                    out[a] += kinetic + phase;
                    scale = scale.max(kinetic.norm()).max(phase.norm());
                }
            }
        }
        for a in 0..n {
            let m = scalar * v[a];
            out[a] += m;
            scale = scale.max(m.norm());
            field[a][i] = out[a];
        }
        let norm = out.iter().map(|z| z.norm()).fold(0.0, f64::max);
        residual.max_abs = residual.max_abs.max(norm);
        residual.scale = residual.scale.max(scale);
    }
    Ok(DiracResidual { residual, field })
}

/// `i hbar gamma^mu D_mu f` for a spinor with known gradients, at every point.
fn gamma_d(rep: &GammaRepresentation, f: &[Vec<Complex64>], grad: &[Vec<Vec<Complex64>>], grad_s: &[Vec<f64>], hbar: f64) -> Vec<Vec<Complex64>> {
    let n = rep.size();
    let len = f[0].len();
    let dim = grad_s.len();
    let mut out = vec![vec![Complex64::default(); len]; n];
    for mu in 0..dim {
        let g = rep.gamma(mu);
        for i in 0..len {
            let k = grad_s[mu][i] / hbar;
            for a in 0..n {
                let mut acc = Complex64::default();
                for b in 0..n {
                    let d = grad[b][mu][i] - I * k * f[b][i];
                    acc += g[(a, b)] * d;
                }
                out[a][i] += I * hbar * acc;
            }
        }
    }
    out
}

/// `(i hbar gamma D)(i hbar gamma D) Psi + hbar^2 D_mu D^mu Psi`, with the scalar
/// `D_mu D^mu` acting componentwise.
///
/// The outer operator differentiates the sampled inner result with stencils,
/// so the residual is a discretization error of the stencil order.
pub fn square_dirac_check(
    psi: &SpinorField,
    derivs: &SpinorDerivatives,
    pack: &DerivativePack,
) -> Result<Residual> {
    let grid = psi.grid();
    if grid.as_ref() != pack.grid().as_ref() {
        return Err(Error::GridMismatch);
    }
    let rep = psi.rep();
    let hbar = pack.hbar();
    let inner = gamma_d(rep, &psi.components, &derivs.grad, &pack.grad_action, hbar);
    let inner_grad: Vec<Vec<Vec<Complex64>>> = inner
        .iter()
        .map(|c| (0..grid.dim()).map(|mu| partial(grid, c, mu, pack.order)).collect())
        .collect();
    let outer = gamma_d(rep, &inner, &inner_grad, &pack.grad_action, hbar);
    let scalar: Vec<Vec<Complex64>> = (0..rep.size())
        .map(|a| box_d_of(pack, &psi.components[a], &derivs.grad[a], &derivs.dalembertian[a]))
        .collect();
    let mut res = Residual::default();
    for i in pack.interior() {
        for a in 0..rep.size() {
            let s = scalar[a][i] * (hbar * hbar);
            res.max_abs = res.max_abs.max((outer[a][i] + s).norm());
            res.scale = res.scale.max(outer[a][i].norm()).max(s.norm());
        }
    }
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EikonalCheck {
    /// Max entry of `(gamma^mu grad_mu S)^2 - (grad S . grad S) I`.
    pub clifford: f64,
    /// Max of `|grad S . grad S - m^2 Omega^2|`.
    pub mass_shell: Residual,
}

pub fn eikonal_identity_check(rep: &GammaRepresentation, pack: &DerivativePack) -> Result<EikonalCheck> {
    rep.check_grid(pack.grid())?;
    let m = pack.mass();
    let dim = pack.grid().dim();
    let mut clifford = 0.0_f64;
    let mut mass_shell = Residual::default();
    let id = rep.identity();
    for i in pack.interior() {
        let a: Vec<f64> = (0..dim).map(|mu| pack.grad_action[mu][i]).collect();
        let s = rep.slash(&a);
        let norm = pack.action_norm(i);
        let d = &s * &s - &id * c(norm, 0.0);
        clifford = clifford.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let target = m * m * pack.omega2(i);
        mass_shell.max_abs = mass_shell.max_abs.max((norm - target).abs());
        mass_shell.scale = mass_shell.scale.max(norm.abs()).max(target);
    }
    Ok(EikonalCheck { clifford, mass_shell })
}

/// `Psi-bar Psi = Psi^dagger gamma^0 Psi`. Not positive definite.
pub fn spinor_density(psi: &SpinorField) -> Result<RealField> {
    let grid = psi.grid();
    let g0 = psi.rep().gamma(0);
    let n = psi.rep().size();
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let v = psi.at(i);
        let mut acc = Complex64::default();
        let mut size = 0.0;
        for a in 0..n {
            size += v[a].norm_sqr();
            for b in 0..n {
                acc += v[a].conj() * g0[(a, b)] * v[b];
            }
        }
        if acc.im.abs() > 1e-12 * size.max(f64::MIN_POSITIVE) {
            return Err(Error::ImaginaryDensity {
                index: grid.unravel(i),
                imag: acc.im,
            });
        }
        values.push(acc.re);
    }
    Field::new(grid.clone(), values)
}

/// Momentum-space Hamiltonian `gamma^0 (gamma^k p_k + mass)` for covariant spatial `p_k`.
pub fn momentum_hamiltonian(rep: &GammaRepresentation, p: &[f64], mass: f64) -> Result<DMatrix<Complex64>> {
    if p.len() + 1 != rep.dim().spacetime_dim() {
        return Err(Error::SpinorMismatch("momentum has the wrong number of spatial components"));
    }
    let mut k = rep.identity() * c(mass, 0.0);
    for (j, &pj) in p.iter().enumerate() {
        k += rep.gamma(j + 1) * c(pj, 0.0);
    }
    Ok(rep.gamma(0) * k)
}

/// Eigenvalues (ascending) and eigenvectors of the momentum-space Hamiltonian.
pub fn momentum_spectrum(rep: &GammaRepresentation, p: &[f64], mass: f64) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let h = momentum_hamiltonian(rep, p, mass)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(rep.size(), rep.size(), |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Positive energy of the 1+1 assigned-mode operator with constant vacuum mass,
/// from the 2x2 eigenproblem.
pub fn plane_wave_dispersion(k: f64, mass: f64, vacuum_mass: f64) -> Result<f64> {
    let rep = build_gamma(GammaDim::Two);
    let (values, _) = momentum_spectrum(&rep, &[k], mass + vacuum_mass)?;
    values.last().copied().ok_or(Error::Eigen("empty spectrum"))
}

/// Positive-energy plane-wave spinor `u exp(-i(E t - p x)/hbar)` of the
/// assigned-mode particle equation with total mass `mass`, sampled on a 1+1 grid.
///
/// `p` is the contravariant spatial momentum, so the covariant component is `-p`.
pub fn plane_wave_spinor(grid: &Arc<SpacetimeGrid>, p: f64, mass: f64, hbar: f64) -> Result<(f64, SpinorField)> {
    let rep = build_gamma(GammaDim::Two);
    // The particle equation i hbar gamma^mu d_mu Psi = mass Psi on exp(-i(Et - px)/hbar)
    // gives (E gamma^0 - p gamma^1 - mass) u = 0, i.e. gamma^0 (gamma^1 p + mass) u = E u.
    let (values, vectors) = momentum_spectrum(&rep, &[p], mass)?;
    let energy = values[1];
    let u: Vec<Complex64> = (0..2).map(|r| vectors[(r, 1)]).collect();
    let psi = SpinorField::from_fn(grid.clone(), rep, |x| {
        let phase = Complex64::from_polar(1.0, -(energy * x[0] - p * x[1]) / hbar);
        u.iter().map(|a| a * phase).collect()
    })?;
    Ok((energy, psi))
}
