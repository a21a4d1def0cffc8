//! The vacuum field `lambda`: its first-order constraint, a static 1D solver,
//! the vacuum mass `M(lambda, rho)` and the `m -> 0` study.
//!
//! The constraint is `lambda = (hbar^2 / (m^2 (1 - Q))) grad_mu(lambda u^mu)` with
//! `u^mu = grad^mu sqrt(rho) / sqrt(rho)`. For a static density on a 1+1 grid
//! it becomes the explicit linear ODE
//!
//! `lambda' = lambda [s_x (m/hbar)^2 (1 - Q) - u'] / u`,   `s_x = 1 / g_xx`,
//!
//! with `u = (ln rho)'/2` and `Q = (hbar/m)^2 s_x (u' + u^2)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::derivatives::DerivativePack;
use crate::error::{Error, Result};
use crate::grid::{dalembertian_values, partial, Boundary, Field, RealField, SpacetimeGrid, StencilOrder};
use crate::kgops::Residual;
use crate::manufactured::Profile;

/// Default half-width of the excluded bands around `u = 0` and `Q = 1`.
pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-6;

/// Anchor data a solved field was produced from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    pub mass: f64,
    pub hbar: f64,
    pub lambda0: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VacuumField {
    pub lambda: RealField,
    pub source: Option<SourceParams>,
}

impl VacuumField {
    pub fn new(lambda: RealField) -> Result<Self> {
        lambda.check_finite()?;
        Ok(Self { lambda, source: None })
    }

    pub fn zero(grid: Arc<SpacetimeGrid>) -> Self {
        Self {
            lambda: Field::constant(grid, 0.0),
            source: None,
        }
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        self.lambda.grid()
    }

    /// `c lambda`; the constraint is linear and homogeneous.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lambda: self.lambda.map(|l| c * l),
            source: self.source.map(|s| SourceParams {
                lambda0: c * s.lambda0,
                ..s
            }),
        }
    }
}

/// Max over interior points of `lambda - (hbar^2/(m^2(1-Q))) grad_mu(lambda u^mu)`.
///
/// Fails with the list of offending coordinates if `|1 - Q| < threshold` anywhere
/// on the interior.
pub fn lambda_residual(v: &VacuumField, pack: &DerivativePack, threshold: f64) -> Result<Residual> {
    v.lambda.ensure_same_grid(pack.grid())?;
    let grid = pack.grid();
    let interior = pack.interior();
    let locus: Vec<Vec<f64>> = interior
        .iter()
        .filter(|&&i| (1.0 - pack.q(i)).abs() < threshold)
        .map(|&i| grid.coords(i))
        .collect();
    if !locus.is_empty() {
        return Err(Error::SingularLocus { threshold, locus });
    }
    let (hbar, m) = (pack.hbar(), pack.mass());
    let lambda = v.lambda.values();
    let mut div = vec![0.0; grid.len()];
    for mu in 0..grid.dim() {
        let g = grid.inverse_metric(mu);
        let flux: Vec<f64> = (0..grid.len())
            .map(|i| lambda[i] * g * pack.grad_sqrt_rho[mu][i] / pack.sqrt_rho[i])
            .collect();
        for (d, f) in div.iter_mut().zip(partial(grid, &flux, mu, pack.order)) {
            *d += f;
        }
    }
    let mut res = Residual::default();
    for &i in &interior {
        let rhs = hbar * hbar / (m * m * (1.0 - pack.q(i))) * div[i];
        res.max_abs = res.max_abs.max((lambda[i] - rhs).abs());
        res.scale = res.scale.max(lambda[i].abs()).max(rhs.abs());
    }
    Ok(res)
}

/// The static constraint as an ODE in `x` for a density given by `ln rho(x)`.
#[derive(Debug, Clone)]
pub struct StaticLambdaOde<'a> {
    pub ln_rho: &'a Profile,
    pub mass: f64,
    pub hbar: f64,
    /// `1 / g_xx`: -1 for a mostly-minus metric.
    pub spatial_sign: f64,
    pub delta_u: f64,
    pub delta_q: f64,
}

/// Pointwise data of the static ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticPoint {
    pub u: f64,
    pub du: f64,
    pub q: f64,
    /// `lambda' / lambda`
    pub g: f64,
    /// `d/dx (lambda' / lambda)`
    pub dg: f64,
    pub rho: f64,
}

impl<'a> StaticLambdaOde<'a> {
    pub fn new(ln_rho: &'a Profile, mass: f64, hbar: f64, spatial_sign: f64) -> Result<Self> {
        if ln_rho.dim() != 1 {
            return Err(Error::UnsupportedDimension(ln_rho.dim()));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::MassRequired);
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                value: hbar,
                reason: "must be positive",
            });
        }
        Ok(Self {
            ln_rho,
            mass,
            hbar,
            spatial_sign,
            delta_u: DEFAULT_SINGULAR_THRESHOLD,
            delta_q: DEFAULT_SINGULAR_THRESHOLD,
        })
    }

    pub fn with_thresholds(mut self, delta_u: f64, delta_q: f64) -> Self {
        self.delta_u = delta_u;
        self.delta_q = delta_q;
        self
    }

    fn k2(&self) -> f64 {
        (self.mass / self.hbar).powi(2)
    }

    /// Everything at `x`, failing inside the excluded bands.
    pub fn point(&self, x: f64) -> Result<StaticPoint> {
        let [l, l1, l2, l3] = self.ln_rho.derivs_1d(x);
        let (u, du, ddu) = (0.5 * l1, 0.5 * l2, 0.5 * l3);
        let s = self.spatial_sign;
        let k2 = self.k2();
        let q = s * (du + u * u) / k2;
        let dq = s * (ddu + 2.0 * u * du) / k2;
        if u.abs() < self.delta_u {
            return Err(Error::SingularCrossing { quantity: "u", x });
        }
        if (1.0 - q).abs() < self.delta_q {
            return Err(Error::SingularCrossing { quantity: "1-Q", x });
        }
        let num = s * k2 * (1.0 - q) - du;
        let dnum = -s * k2 * dq - ddu;
        Ok(StaticPoint {
            u,
            du,
            q,
            g: num / u,
            dg: (dnum * u - num * du) / (u * u),
            rho: l.exp(),
        })
    }

    fn signs(&self, x: f64) -> Result<(bool, bool)> {
        let p = self.point(x)?;
        Ok((p.u > 0.0, p.q < 1.0))
    }

    /// Classical fourth-order Runge-Kutta from `(x0, lambda0)` to `x1` in `steps` equal steps.
    ///
    /// Every stage point is checked against the excluded bands and against a
    /// sign change of `u` or `1 - Q` relative to `x0`.
    pub fn integrate(&self, x0: f64, lambda0: f64, x1: f64, steps: usize) -> Result<f64> {
        let steps = steps.max(1);
        let h = (x1 - x0) / steps as f64;
        let start = self.signs(x0)?;
        let slope = |x: f64, y: f64| -> Result<f64> {
            let p = self.point(x)?;
            if (p.u > 0.0, p.q < 1.0) != start {
                let quantity = if (p.u > 0.0) != start.0 { "u" } else { "1-Q" };
                return Err(Error::SingularCrossing { quantity, x });
            }
            Ok(p.g * y)
        };
        let mut y = lambda0;
        for k in 0..steps {
            let x = x0 + k as f64 * h;
            let k1 = slope(x, y)?;
            let k2 = slope(x + 0.5 * h, y + 0.5 * h * k1)?;
            let k3 = slope(x + 0.5 * h, y + 0.5 * h * k2)?;
            let k4 = slope(x + h, y + h * k3)?;
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        Ok(y)
    }

    /// `lambda`, `lambda'` and `lambda''` at `x` given `lambda(x)`.
    pub fn derivatives(&self, x: f64, lambda: f64) -> Result<[f64; 3]> {
        let p = self.point(x)?;
        Ok([lambda, lambda * p.g, lambda * (p.g * p.g + p.dg)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSolverConfig {
    /// RK4 steps per grid cell.
    pub steps_per_cell: usize,
    pub delta_u: f64,
    pub delta_q: f64,
}

impl Default for LambdaSolverConfig {
    fn default() -> Self {
        Self {
            steps_per_cell: 8,
            delta_u: DEFAULT_SINGULAR_THRESHOLD,
            delta_q: DEFAULT_SINGULAR_THRESHOLD,
        }
    }
}

/// Solves the static constraint on the spatial axis of a 1+1 grid and copies
/// the profile across time.
///
/// The spatial axis must be one-sided; its extent is the integration domain.
/// The solution is marched outward from the anchor node by node, so the value
/// at each node depends only on the anchor and the step count.
pub fn solve_lambda_static_1d(
    grid: &Arc<SpacetimeGrid>,
    ln_rho: &Profile,
    mass: f64,
    hbar: f64,
    lambda0: f64,
    x0: f64,
    config: LambdaSolverConfig,
) -> Result<VacuumField> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let axis = grid.axis(1);
    if axis.boundary != Boundary::OneSided {
        return Err(Error::InvalidParameter {
            name: "boundary",
            value: 0.0,
            reason: "the static solver needs a one-sided spatial axis",
        });
    }
    let (lo, hi) = (axis.origin, axis.origin + axis.extent);
    if !(lo..=hi).contains(&x0) {
        return Err(Error::AnchorOutsideDomain { x0, lo, hi });
    }
    let ode = StaticLambdaOde::new(ln_rho, mass, hbar, grid.inverse_metric(1))?
        .with_thresholds(config.delta_u, config.delta_q);
    // Check the whole domain once so a crossing between nodes is reported
    // even when no stage point lands inside the band.
    ode.integrate(lo, 1.0, hi, (axis.points - 1) * config.steps_per_cell.max(1))?;

    let h = axis.spacing();
    let nodes: Vec<f64> = (0..axis.points).map(|i| axis.coord(i)).collect();
    let mut profile = vec![0.0; nodes.len()];
    let steps_for = |d: f64| ((d.abs() / h) * config.steps_per_cell as f64).ceil().max(1.0) as usize;
    let split = nodes.partition_point(|&x| x < x0);
    let (mut x, mut y) = (x0, lambda0);
    for i in split..nodes.len() {
        y = ode.integrate(x, y, nodes[i], steps_for(nodes[i] - x))?;
        x = nodes[i];
        profile[i] = y;
    }
    let (mut x, mut y) = (x0, lambda0);
    for i in (0..split).rev() {
        y = ode.integrate(x, y, nodes[i], steps_for(nodes[i] - x))?;
        x = nodes[i];
        profile[i] = y;
    }
    let values = (0..grid.len()).map(|i| profile[grid.index_along(i, 1)]).collect();
    Ok(VacuumField {
        lambda: Field::new(grid.clone(), values)?,
        source: Some(SourceParams {
            mass,
            hbar,
            lambda0,
            x0,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassBranch {
    #[default]
    Plus,
    Minus,
}

impl MassBranch {
    pub fn sign(self) -> f64 {
        match self {
            MassBranch::Plus => 1.0,
            MassBranch::Minus => -1.0,
        }
    }
}

/// `M` from `M^2` on a branch: real `+-sqrt(M^2)` or imaginary `+-i sqrt(|M^2|)`.
pub fn branch_mass(m2: f64, branch: MassBranch) -> Complex64 {
    let root = m2.abs().sqrt() * branch.sign();
    if m2 >= 0.0 {
        Complex64::new(root, 0.0)
    } else {
        Complex64::new(0.0, root)
    }
}

/// Vacuum-mass-squared fields in both forms.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumMass {
    /// The selected form.
    pub m2: RealField,
    /// `m (1 - Q) lambda / rho - (hbar^2 / (2 m rho)) box lambda`
    pub m2_closed: Vec<f64>,
    /// `[m (1 - Q) lambda - (hbar^2 / 2m) box lambda] / (Omega^2 rho)`
    pub m2_conformal: Vec<f64>,
    /// `m2_closed - m2_conformal`
    pub discrepancy: Vec<f64>,
    /// True where the selected `m2` is negative.
    pub complex_flag: Vec<bool>,
    pub branch: MassBranch,
    pub include_conformal: bool,
}

impl VacuumMass {
    /// A synthetic constant field, mostly for tests and dispersion checks.
    pub fn constant(grid: Arc<SpacetimeGrid>, m2: f64, branch: MassBranch) -> Self {
        let n = grid.len();
        Self {
            m2: Field::constant(grid, m2),
            m2_closed: vec![m2; n],
            m2_conformal: vec![m2; n],
            discrepancy: vec![0.0; n],
            complex_flag: vec![m2 < 0.0; n],
            branch,
            include_conformal: false,
        }
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        self.m2.grid()
    }

    pub fn mass(&self, i: usize) -> Complex64 {
        branch_mass(self.m2.values()[i], self.branch)
    }

    pub fn complex_count(&self) -> usize {
        self.complex_flag.iter().filter(|&&c| c).count()
    }
}

pub fn vacuum_mass(
    v: &VacuumField,
    pack: &DerivativePack,
    include_conformal: bool,
    branch: MassBranch,
) -> Result<VacuumMass> {
    v.lambda.ensure_same_grid(pack.grid())?;
    let (hbar, m) = (pack.hbar(), pack.mass());
    if m <= 0.0 {
        return Err(Error::MassRequired);
    }
    let grid = pack.grid();
    let lambda = v.lambda.values();
    let box_l = dalembertian_values(grid, lambda, pack.order);
    let n = grid.len();
    let (mut closed, mut conformal, mut discrepancy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let rho = pack.rho(i);
        let source = m * (1.0 - pack.q(i)) * lambda[i];
        let curvature = hbar * hbar / (2.0 * m) * box_l[i];
        closed[i] = source / rho - curvature / rho;
        conformal[i] = (source - curvature) / (pack.omega2(i) * rho);
        discrepancy[i] = closed[i] - conformal[i];
    }
    let selected = if include_conformal { &conformal } else { &closed };
    let complex_flag = selected.iter().map(|&v| v < 0.0).collect();
    Ok(VacuumMass {
        m2: Field::new(grid.clone(), selected.clone())?,
        m2_closed: closed,
        m2_conformal: conformal,
        discrepancy,
        complex_flag,
        branch,
        include_conformal,
    })
}

/// Max-norm of `grad_mu sqrt(M^2)` over the real sub-domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassConstancy {
    pub max_gradient: f64,
    /// Interior points whose stencils see only `M^2 >= 0`.
    pub real_points: usize,
    /// Interior points excluded because a complex value is in reach.
    pub excluded_points: usize,
}

pub fn mass_constancy_residual(vm: &VacuumMass, order: StencilOrder) -> MassConstancy {
    let grid = vm.grid();
    let root: Vec<f64> = vm
        .m2
        .values()
        .iter()
        .map(|&v| if v >= 0.0 { v.sqrt() } else { f64::NAN })
        .collect();
    let grads: Vec<Vec<f64>> = (0..grid.dim()).map(|mu| partial(grid, &root, mu, order)).collect();
    let mut out = MassConstancy {
        max_gradient: 0.0,
        real_points: 0,
        excluded_points: 0,
    };
    for i in grid.interior(order.interior_margin()) {
        if grads.iter().any(|g| !g[i].is_finite()) {
            out.excluded_points += 1;
            continue;
        }
        out.real_points += 1;
        for g in &grads {
            out.max_gradient = out.max_gradient.max(g[i].abs());
        }
    }
    out
}

/// How `lambda` is obtained for each mass in the study.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaProtocol {
    /// Re-solve the static constraint for every `m` from a fixed anchor.
    Resolved { lambda0: f64, x0: f64 },
    /// Keep one closed-form profile `lambda(x)` for every `m`.
    Fixed(Profile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeutrinoStudyConfig {
    pub ln_rho: Profile,
    pub hbar: f64,
    /// `1 / g_xx` of the 1+1 metric.
    pub spatial_sign: f64,
    /// Strictly decreasing positive masses.
    pub masses: Vec<f64>,
    pub probes: Vec<f64>,
    pub protocol: LambdaProtocol,
    pub include_conformal: bool,
    pub steps_per_unit: usize,
    pub delta_u: f64,
    pub delta_q: f64,
}

/// One mass of the study; `m2` has one entry per probe.
#[derive(Debug, Clone, PartialEq)]
pub struct NeutrinoRow {
    pub mass: f64,
    pub m2: Vec<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitClass {
    /// Every sample is exactly zero, or the extrapolated limit is within its uncertainty of zero.
    Zero,
    Nonzero,
    /// Successive differences do not shrink: no finite limit.
    Divergent,
    /// Fewer than three usable rows, or a non-monotone sequence.
    Undetermined,
}

impl LimitClass {
    pub fn label(self) -> &'static str {
        match self {
            LimitClass::Zero => "zero",
            LimitClass::Nonzero => "nonzero",
            LimitClass::Divergent => "divergent",
            LimitClass::Undetermined => "undetermined",
        }
    }
}

/// Richardson estimate of `lim_{m -> 0} M^2` at one probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeLimit {
    pub probe: f64,
    pub m2_limit: f64,
    pub order: f64,
    pub uncertainty: f64,
    pub monotone: bool,
    pub class: LimitClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeutrinoStudy {
    pub rows: Vec<NeutrinoRow>,
    pub limits: Vec<ProbeLimit>,
}

fn validate_masses(masses: &[f64]) -> Result<()> {
    if masses.len() < 3 {
        return Err(Error::InvalidMassSequence("at least three masses are needed"));
    }
    if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidMassSequence("masses must be positive"));
    }
    if masses.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidMassSequence("masses must be strictly decreasing"));
    }
    Ok(())
}

/// `M^2` at every probe for one mass; errors are reported in the row.
pub fn neutrino_row(config: &NeutrinoStudyConfig, mass: f64) -> NeutrinoRow {
    match neutrino_row_inner(config, mass) {
        Ok(m2) => NeutrinoRow {
            mass,
            m2,
            failure: None,
        },
        Err(e) => NeutrinoRow {
            mass,
            m2: vec![f64::NAN; config.probes.len()],
            failure: Some(e.to_string()),
        },
    }
}

fn neutrino_row_inner(config: &NeutrinoStudyConfig, mass: f64) -> Result<Vec<f64>> {
    let hbar = config.hbar;
    let ode = StaticLambdaOde::new(&config.ln_rho, mass, hbar, config.spatial_sign)?
        .with_thresholds(config.delta_u, config.delta_q);
    let steps = |d: f64| ((d.abs() * config.steps_per_unit as f64).ceil() as usize).max(1);
    config
        .probes
        .iter()
        .map(|&x| {
            let p = ode.point(x)?;
            let (lambda, d2) = match &config.protocol {
                LambdaProtocol::Resolved { lambda0, x0 } => {
                    let l = ode.integrate(*x0, *lambda0, x, steps(x - x0))?;
                    let [l, _, d2] = ode.derivatives(x, l)?;
                    (l, d2)
                }
                LambdaProtocol::Fixed(profile) => {
                    let [l, _, d2, _] = profile.derivs_1d(x);
                    (l, d2)
                }
            };
            let box_l = config.spatial_sign * d2;
            let source = mass * (1.0 - p.q) * lambda;
            let curvature = hbar * hbar / (2.0 * mass) * box_l;
            let m2 = if config.include_conformal {
                (source - curvature) / (p.q.exp() * p.rho)
            } else {
                source / p.rho - curvature / p.rho
            };
            if m2.is_finite() {
                Ok(m2)
            } else {
                Err(Error::NonFinite { index: vec![] })
            }
        })
        .collect()
}

/// Richardson extrapolation of one probe column over a geometric mass sequence.
pub fn extrapolate_probe(probe: f64, masses: &[f64], values: &[f64]) -> ProbeLimit {
    let undetermined = |monotone| ProbeLimit {
        probe,
        m2_limit: f64::NAN,
        order: f64::NAN,
        uncertainty: f64::NAN,
        monotone,
        class: LimitClass::Undetermined,
    };
    let usable: Vec<(f64, f64)> = masses
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(m, v)| (*m, *v))
        .collect();
    if !usable.is_empty() && usable.iter().all(|(_, v)| *v == 0.0) {
        return ProbeLimit {
            probe,
            m2_limit: 0.0,
            order: f64::NAN,
            uncertainty: 0.0,
            monotone: true,
            class: LimitClass::Zero,
        };
    }
    if usable.len() < 3 {
        return undetermined(false);
    }
    let diffs: Vec<f64> = usable.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let monotone = diffs.iter().all(|d| *d >= 0.0) || diffs.iter().all(|d| *d <= 0.0);
    let estimate = |k: usize| -> Option<(f64, f64)> {
        // rows k-2, k-1, k
        let (m1, m2) = (usable[k - 1].0, usable[k].0);
        let r = m2 / m1;
        let (d1, d2) = (diffs[k - 2], diffs[k - 1]);
        if d2 == 0.0 {
            return Some((usable[k].1, f64::INFINITY));
        }
        let q = d1 / d2;
        if q <= 0.0 {
            return None;
        }
        let p = q.ln() / (1.0 / r).ln();
        Some((usable[k].1 - d2 / (1.0 - r.powf(-p)), p))
    };
    let last = usable.len() - 1;
    let Some((limit, order)) = estimate(last) else {
        return undetermined(monotone);
    };
    if order.is_nan() || order <= 0.0 {
        return ProbeLimit {
            probe,
            m2_limit: f64::NAN,
            order,
            uncertainty: f64::INFINITY,
            monotone,
            class: LimitClass::Divergent,
        };
    }
    let uncertainty = match (last >= 3).then(|| estimate(last - 1)).flatten() {
        Some((previous, _)) => (limit - previous).abs(),
        None => diffs[last - 1].abs(),
    };
    let class = if limit.abs() <= 2.0 * uncertainty {
        LimitClass::Zero
    } else {
        LimitClass::Nonzero
    };
    ProbeLimit {
        probe,
        m2_limit: limit,
        order,
        uncertainty,
        monotone,
        class,
    }
}

/// Merges independently computed rows (sorted by decreasing mass) into a study.
pub fn assemble_study(config: &NeutrinoStudyConfig, mut rows: Vec<NeutrinoRow>) -> NeutrinoStudy {
    rows.sort_by(|a, b| b.mass.total_cmp(&a.mass));
    let masses: Vec<f64> = rows.iter().map(|r| r.mass).collect();
    let limits = config
        .probes
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let column: Vec<f64> = rows.iter().map(|r| r.m2[k]).collect();
            extrapolate_probe(x, &masses, &column)
        })
        .collect();
    NeutrinoStudy { rows, limits }
}

/// `M^2` at the probes for each mass, then its extrapolation to `m -> 0`.
pub fn neutrino_limit_study(config: &NeutrinoStudyConfig) -> Result<NeutrinoStudy> {
    validate_masses(&config.masses)?;
    let rows = config.masses.iter().map(|&m| neutrino_row(config, m)).collect();
    Ok(assemble_study(config, rows))
}
