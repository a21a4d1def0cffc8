//! Report tables, pass/fail rows and the files they are written to.
//!
//! Every table becomes `<name>.csv` (header line, 17 significant digits);
//! `report.json` holds the manifest, the check rows and scalar metrics.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::config::{GridSpec, RunConfig};
use crate::error::CliResult;

/// A float that serializes non-finite values as strings instead of failing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(dir.join(self.file_name()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One pass/fail row, citing the invariant it checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub measured: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<Num>,
    pub detail: String,
}

impl Check {
    /// `measured <= tolerance`.
    pub fn at_most(id: &str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            passed: measured <= tolerance,
            measured: Num(measured),
            lower: None,
            upper: Some(Num(tolerance)),
            detail: detail.into(),
        }
    }

    /// Every value inside `[lo, hi]`; the reported value is the one farthest from the window centre.
    pub fn within(id: &str, values: &[f64], lo: f64, hi: f64, detail: impl Into<String>) -> Self {
        let centre = 0.5 * (lo + hi);
        let worst = values
            .iter()
            .copied()
            .max_by(|a, b| {
                let da = if a.is_nan() { f64::INFINITY } else { (a - centre).abs() };
                let db = if b.is_nan() { f64::INFINITY } else { (b - centre).abs() };
                da.total_cmp(&db)
            })
            .unwrap_or(f64::NAN);
        Self {
            id: id.into(),
            passed: !values.is_empty() && values.iter().all(|v| (lo..=hi).contains(v)),
            measured: Num(worst),
            lower: Some(Num(lo)),
            upper: Some(Num(hi)),
            detail: detail.into(),
        }
    }

    /// A boolean property; `measured` is 1 when it holds.
    pub fn holds(id: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            passed: ok,
            measured: Num(if ok { 1.0 } else { 0.0 }),
            lower: Some(Num(1.0)),
            upper: None,
            detail: detail.into(),
        }
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let bound = match (self.lower, self.upper) {
            (Some(l), Some(u)) => format!("in [{}, {}]", short(l.0), short(u.0)),
            (None, Some(u)) => format!("<= {}", short(u.0)),
            (Some(l), None) => format!(">= {}", short(l.0)),
            (None, None) => String::new(),
        };
        format!("{status} {} measured={} {bound}", self.id, short(self.measured.0))
    }
}

fn short(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        format_float(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub signature: String,
    pub derivative_mode: String,
    pub derivatives_used: String,
    pub include_conformal: bool,
    pub stencil_order: u8,
    pub seed: u64,
    pub timestamp: String,
    pub grid: GridSpec,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(config: &RunConfig, derivatives_used: &str) -> CliResult<Self> {
        let grid = config.grid_spec();
        Ok(Self {
            experiment: config.experiment().name().into(),
            version: env!("CARGO_PKG_VERSION").into(),
            signature: grid.signature_label(),
            derivative_mode: config.derivative_mode().label().into(),
            derivatives_used: derivatives_used.into(),
            include_conformal: config.numerics.include_conformal,
            stencil_order: config.numerics.stencil_order,
            seed: config.run.seed,
            timestamp: timestamp(),
            grid,
            config: serde_json::to_value(config)?,
        })
    }
}

/// `SOURCE_DATE_EPOCH` when set, so reports stay byte-reproducible.
fn timestamp() -> String {
    std::env::var("SOURCE_DATE_EPOCH").unwrap_or_else(|_| "unset".into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub manifest: Manifest,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    manifest: &'a Manifest,
    passed: bool,
    checks: &'a [Check],
    metrics: BTreeMap<&'a str, Num>,
    tables: Vec<String>,
}

impl Report {
    pub fn new(manifest: Manifest) -> Self {
        Self {
            manifest,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check_named(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> CliResult<String> {
        let doc = ReportJson {
            manifest: &self.manifest,
            passed: self.passed(),
            checks: &self.checks,
            metrics: self.metrics.iter().map(|(k, v)| (k.as_str(), Num(*v))).collect(),
            tables: self.tables.iter().map(Table::file_name).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        for t in &self.tables {
            t.write(dir)?;
        }
        fs::write(dir.join("report.json"), self.to_json()?)?;
        Ok(())
    }
}
