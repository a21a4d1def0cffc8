//! Run configuration: a flat, sectioned TOML file plus `section.key=value` overrides.
//!
//! ```toml
//! [run]
//! experiment = "identity-suite"
//! seed = 1
//!
//! [grid]               # optional; every experiment has its own default grid
//! points_per_axis = 64
//! extent = [6.283185307179586, 6.283185307179586]
//! boundary = ["one-sided", "periodic"]
//!
//! [physics]
//! mass = 1.0
//! ```
//!
//! Sections are `run`, `grid`, `physics`, `numerics`, `tolerances` and `output`.
//! Values are scalars or flat arrays; unknown sections and keys are rejected.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use vdlab_core::grid::{Axis, Boundary, SpacetimeGrid, StencilOrder};
use vdlab_core::vacuum::MassBranch;
use vdlab_core::DerivativeMode;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    IdentitySuite,
    ConvergenceSuite,
    LambdaProfile,
    MassLandscape,
    NeutrinoLimit,
    DispersionScan,
    ActionGradient,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::IdentitySuite,
        Experiment::ConvergenceSuite,
        Experiment::LambdaProfile,
        Experiment::MassLandscape,
        Experiment::NeutrinoLimit,
        Experiment::DispersionScan,
        Experiment::ActionGradient,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::IdentitySuite => "identity-suite",
            Experiment::ConvergenceSuite => "convergence-suite",
            Experiment::LambdaProfile => "lambda-profile",
            Experiment::MassLandscape => "mass-landscape",
            Experiment::NeutrinoLimit => "neutrino-limit",
            Experiment::DispersionScan => "dispersion-scan",
            Experiment::ActionGradient => "action-gradient",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Grid used when the config has no `[grid]` section (or leaves keys out).
    pub fn default_grid(self) -> GridSpec {
        let tau = std::f64::consts::TAU;
        let (extent, points, boundary, origin) = match self {
            Experiment::IdentitySuite => (vec![tau, tau], 64, [BoundaryName::OneSided, BoundaryName::Periodic], vec![0.0, 0.0]),
            Experiment::ConvergenceSuite => (vec![tau, tau], 64, [BoundaryName::OneSided, BoundaryName::Periodic], vec![0.0, 0.0]),
            Experiment::LambdaProfile | Experiment::MassLandscape | Experiment::NeutrinoLimit => {
                (vec![1.0, 2.0], 81, [BoundaryName::OneSided, BoundaryName::OneSided], vec![0.0, 0.5])
            }
            Experiment::DispersionScan => (vec![2.0, 2.0], 33, [BoundaryName::OneSided, BoundaryName::OneSided], vec![0.0, 0.0]),
            Experiment::ActionGradient => (vec![2.0, tau], 16, [BoundaryName::OneSided, BoundaryName::Periodic], vec![0.0, 0.0]),
        };
        GridSpec {
            origin,
            extent,
            points_per_axis: points,
            boundary: boundary.to_vec(),
            metric: vec![1.0, -1.0],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    Periodic,
    OneSided,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Periodic => Boundary::Periodic,
            BoundaryName::OneSided => Boundary::OneSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Analytic,
    Stencil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchName {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    /// Re-solve lambda for every mass from `(x0, lambda0)`.
    Resolved,
    /// Keep `lambda = lambda0` for every mass.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub experiment: Experiment,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            experiment: Experiment::IdentitySuite,
            seed: 1,
        }
    }
}

/// Partial grid description; missing keys come from the experiment default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: Option<usize>,
    pub origin: Option<Vec<f64>>,
    pub extent: Option<Vec<f64>>,
    pub points_per_axis: Option<usize>,
    pub boundary: Option<Vec<BoundaryName>>,
    pub metric: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
    pub points_per_axis: usize,
    pub boundary: Vec<BoundaryName>,
    pub metric: Vec<f64>,
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Arc<SpacetimeGrid>> {
        let axes = self
            .origin
            .iter()
            .zip(&self.extent)
            .zip(&self.boundary)
            .map(|((&o, &e), &b)| Axis::new(o, e, self.points_per_axis, b.into()))
            .collect();
        SpacetimeGrid::new(axes, self.metric.clone())
            .map(Arc::new)
            .map_err(|e| CliError::config("grid", e.to_string()))
    }

    pub fn signature_label(&self) -> String {
        let signs: String = self.metric.iter().map(|g| if *g > 0.0 { '+' } else { '-' }).collect();
        format!("({signs})")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub mass: f64,
    pub hbar: f64,
    pub kappa: f64,
    /// Width of the Gaussian density `rho0 exp(-x^2/sigma^2)`.
    pub sigma: f64,
    pub rho0: f64,
    pub lambda0: f64,
    pub x0: f64,
    /// Strictly decreasing masses for the `m -> 0` study.
    pub masses: Vec<f64>,
    pub probes: Vec<f64>,
    pub protocol: ProtocolName,
    /// Fourier modes per manufactured field.
    pub smoothness: usize,
    /// Spatial momentum of plane-wave fields.
    pub momentum: f64,
    /// Constant vacuum mass used by the dispersion scan.
    pub vacuum_mass: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            kappa: 1.0,
            sigma: 1.0,
            rho0: 1.0,
            lambda0: 1.0,
            x0: 1.2,
            masses: vec![1.6, 0.8, 0.4, 0.2, 0.1],
            probes: vec![1.5, 2.0],
            protocol: ProtocolName::Resolved,
            smoothness: 2,
            momentum: 0.8,
            vacuum_mass: 0.5,
            k_min: -5.0,
            k_max: 5.0,
            k_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    /// 2 or 4.
    pub stencil_order: u8,
    pub derivative_mode: ModeName,
    pub refine_levels: usize,
    /// Size of the manufactured corpus; seeds are `run.seed .. run.seed + corpus_size`.
    pub corpus_size: usize,
    pub delta_u: f64,
    pub delta_q: f64,
    pub density_floor: f64,
    pub gradient_epsilon: f64,
    pub steps_per_cell: usize,
    pub steps_per_unit: usize,
    pub include_conformal: bool,
    pub branch: BranchName,
    pub allow_complex: bool,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            stencil_order: 2,
            derivative_mode: ModeName::Analytic,
            refine_levels: 3,
            corpus_size: 10,
            delta_u: 1e-6,
            delta_q: 1e-6,
            density_floor: 1e-12,
            gradient_epsilon: 1e-6,
            steps_per_cell: 8,
            steps_per_unit: 200,
            include_conformal: true,
            branch: BranchName::Plus,
            allow_complex: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub identity: f64,
    pub plane_wave: f64,
    pub action: f64,
    pub action_vanish: f64,
    pub rk4_ratio_min: f64,
    pub rk4_ratio_max: f64,
    pub closure: f64,
    pub homogeneity: f64,
    pub vacuum_identity: f64,
    pub dispersion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ratio_min: 3.5,
            ratio_max: 4.5,
            identity: 1e-10,
            plane_wave: 1e-8,
            action: 1e-3,
            action_vanish: 1e-6,
            rk4_ratio_min: 12.0,
            rk4_ratio_max: 20.0,
            closure: 1e-8,
            homogeneity: 1e-13,
            vacuum_identity: 1e-12,
            dispersion: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "vdlab-out".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub numerics: NumericsSection,
    pub tolerances: Tolerances,
    pub output: OutputSection,
}

/// Parses a raw override value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `section.key=value` to a parsed document.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "overrides take the form section.key=value"))?;
    let path = path.trim();
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| CliError::config(path, "override keys take the form section.key"))?;
    let entry = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let table = entry
        .as_table_mut()
        .ok_or_else(|| CliError::config(section, "not a section"))?;
    table.insert(key.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> CliResult<Self> {
        let parse_err = |e: toml::de::Error| CliError::Parse(e.to_string());
        let config: RunConfig = if overrides.is_empty() {
            // Straight from text so errors keep their line numbers.
            toml::from_str(text).map_err(parse_err)?
        } else {
            let mut doc: toml::Table = text.parse().map_err(parse_err)?;
            for o in overrides {
                apply_override(&mut doc, o)?;
            }
            doc.try_into().map_err(parse_err)?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, overrides).map_err(|e| e.in_file(path))
    }

    pub fn experiment(&self) -> Experiment {
        self.run.experiment
    }

    /// The experiment's default grid with the `[grid]` keys applied.
    pub fn grid_spec(&self) -> GridSpec {
        let mut spec = self.run.experiment.default_grid();
        let g = &self.grid;
        if let Some(dim) = g.dim {
            if dim != spec.origin.len() {
                spec.origin.resize(dim, 0.0);
                let last_extent = *spec.extent.last().unwrap_or(&1.0);
                spec.extent.resize(dim, last_extent);
                let last_boundary = *spec.boundary.last().unwrap_or(&BoundaryName::Periodic);
                spec.boundary.resize(dim, last_boundary);
                spec.metric.resize(dim, -1.0);
            }
        }
        if let Some(v) = &g.origin {
            spec.origin = v.clone();
        }
        if let Some(v) = &g.extent {
            spec.extent = v.clone();
        }
        if let Some(v) = g.points_per_axis {
            spec.points_per_axis = v;
        }
        if let Some(v) = &g.boundary {
            spec.boundary = v.clone();
        }
        if let Some(v) = &g.metric {
            spec.metric = v.clone();
        }
        spec
    }

    pub fn stencil_order(&self) -> StencilOrder {
        match self.numerics.stencil_order {
            4 => StencilOrder::Fourth,
            _ => StencilOrder::Second,
        }
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        match self.numerics.derivative_mode {
            ModeName::Analytic => DerivativeMode::Analytic,
            ModeName::Stencil => DerivativeMode::Stencil,
        }
    }

    pub fn branch(&self) -> MassBranch {
        match self.numerics.branch {
            BranchName::Plus => MassBranch::Plus,
            BranchName::Minus => MassBranch::Minus,
        }
    }

    /// Seeds of the manufactured corpus.
    pub fn corpus(&self) -> Vec<u64> {
        (0..self.numerics.corpus_size as u64)
            .map(|k| self.run.seed.wrapping_add(k))
            .collect()
    }

    pub fn validate(&self) -> CliResult<()> {
        let spec = self.grid_spec();
        let dim = spec.origin.len();
        if dim != 2 && dim != 4 {
            return Err(CliError::config("grid.dim", format!("{dim} dimensions; 2 or 4 required")));
        }
        for (key, len) in [
            ("grid.extent", spec.extent.len()),
            ("grid.boundary", spec.boundary.len()),
            ("grid.metric", spec.metric.len()),
        ] {
            if len != dim {
                return Err(CliError::config(key, format!("{len} entries for {dim} axes")));
            }
        }
        if spec.points_per_axis < 5 {
            return Err(CliError::config(
                "grid.points_per_axis",
                format!("{} points; >= 5 required", spec.points_per_axis),
            ));
        }
        if let Some(e) = spec.extent.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(CliError::config("grid.extent", format!("{e}; extents must be positive")));
        }
        spec.build()?;

        let p = &self.physics;
        positive("physics.mass", p.mass)?;
        positive("physics.hbar", p.hbar)?;
        positive("physics.kappa", p.kappa)?;
        positive("physics.sigma", p.sigma)?;
        positive("physics.rho0", p.rho0)?;
        finite("physics.lambda0", p.lambda0)?;
        finite("physics.x0", p.x0)?;
        finite("physics.momentum", p.momentum)?;
        finite("physics.vacuum_mass", p.vacuum_mass)?;
        if p.masses.len() < 3 {
            return Err(CliError::config("physics.masses", "at least three masses required"));
        }
        if p.masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(CliError::config("physics.masses", "masses must be positive"));
        }
        if p.masses.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::config("physics.masses", "masses must be strictly decreasing"));
        }
        if p.probes.is_empty() || p.probes.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config("physics.probes", "at least one finite probe required"));
        }
        if !(p.k_min.is_finite() && p.k_max.is_finite() && p.k_min < p.k_max) {
            return Err(CliError::config("physics.k_min", "k_min < k_max required"));
        }
        if p.k_points < 2 {
            return Err(CliError::config("physics.k_points", ">= 2 required"));
        }

        let n = &self.numerics;
        if n.stencil_order != 2 && n.stencil_order != 4 {
            return Err(CliError::config("numerics.stencil_order", format!("{}; 2 or 4 required", n.stencil_order)));
        }
        if n.refine_levels < 3 {
            return Err(CliError::config("numerics.refine_levels", format!("{}; >= 3 required", n.refine_levels)));
        }
        if n.corpus_size == 0 {
            return Err(CliError::config("numerics.corpus_size", ">= 1 required"));
        }
        positive("numerics.delta_u", n.delta_u)?;
        positive("numerics.delta_q", n.delta_q)?;
        positive("numerics.density_floor", n.density_floor)?;
        positive("numerics.gradient_epsilon", n.gradient_epsilon)?;
        if n.steps_per_cell == 0 {
            return Err(CliError::config("numerics.steps_per_cell", ">= 1 required"));
        }
        if n.steps_per_unit == 0 {
            return Err(CliError::config("numerics.steps_per_unit", ">= 1 required"));
        }

        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.ratio_min", t.ratio_min),
            ("tolerances.ratio_max", t.ratio_max),
            ("tolerances.identity", t.identity),
            ("tolerances.plane_wave", t.plane_wave),
            ("tolerances.action", t.action),
            ("tolerances.action_vanish", t.action_vanish),
            ("tolerances.rk4_ratio_min", t.rk4_ratio_min),
            ("tolerances.rk4_ratio_max", t.rk4_ratio_max),
            ("tolerances.closure", t.closure),
            ("tolerances.homogeneity", t.homogeneity),
            ("tolerances.vacuum_identity", t.vacuum_identity),
            ("tolerances.dispersion", t.dispersion),
        ] {
            positive(key, v)?;
        }
        if t.ratio_min > t.ratio_max || t.rk4_ratio_min > t.rk4_ratio_max {
            return Err(CliError::config("tolerances", "ratio window is empty"));
        }
        if self.output.dir.is_empty() {
            return Err(CliError::config("output.dir", "must not be empty"));
        }
        Ok(())
    }
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(key, format!("{v}; must be positive")))
    }
}

fn finite(key: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(key, format!("{v}; must be finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_toml("", &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.grid_spec().points_per_axis, 64);
    }

    #[test]
    fn overrides_parse_numbers_and_bare_strings() {
        let c = RunConfig::from_toml(
            "[run]\nexperiment = \"identity-suite\"\n",
            &[
                "run.experiment=lambda-profile".into(),
                "physics.mass=2.5".into(),
                "grid.points_per_axis=41".into(),
                "physics.masses=[3.0, 2.0, 1.0]".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.experiment(), Experiment::LambdaProfile);
        assert_eq!(c.physics.mass, 2.5);
        assert_eq!(c.grid_spec().points_per_axis, 41);
        assert_eq!(c.physics.masses, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let err = RunConfig::from_toml("[physics]\nmas = 1.0\n", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mas"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn too_few_points_is_rejected() {
        let err = RunConfig::from_toml("[grid]\npoints_per_axis = 3\n", &[]).unwrap_err();
        assert!(err.to_string().contains(">= 5 required"), "{err}");
    }

    #[test]
    fn grid_section_is_merged_over_experiment_default() {
        let c = RunConfig::from_toml("[run]\nexperiment = \"lambda-profile\"\n[grid]\nextent = [1.0, 3.0]\n", &[]).unwrap();
        let g = c.grid_spec();
        assert_eq!(g.extent, vec![1.0, 3.0]);
        assert_eq!(g.origin, vec![0.0, 0.5]);
        assert_eq!(g.points_per_axis, 81);
    }
}
