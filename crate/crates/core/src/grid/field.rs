use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::SpacetimeGrid;
use crate::error::{Error, Result};

/// Scalar sample type carried by fields: `f64` or `Complex64`.
pub trait Sample:
    Copy
    + Default
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
{
    fn is_finite(self) -> bool;
    fn modulus(self) -> f64;
}

impl Sample for f64 {
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Sample for Complex64 {
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// One sample per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Arc<SpacetimeGrid>,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    pub fn new(grid: Arc<SpacetimeGrid>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<SpacetimeGrid>, f: impl Fn(&[f64]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Arc<SpacetimeGrid>, value: T) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<U: Sample, V: Sample>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        self.ensure_same_grid(other.grid())?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Fails with the multi-index of the first non-finite sample.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite {
                index: self.grid.unravel(i),
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_grid(&self, other: &Arc<SpacetimeGrid>) -> Result<()> {
        same_grid(&self.grid, other)
    }
}

pub(crate) fn same_grid(a: &Arc<SpacetimeGrid>, b: &Arc<SpacetimeGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// Per-axis components of a vector field, `components[mu][point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector<T> {
    grid: Arc<SpacetimeGrid>,
    variance: Variance,
    components: Vec<Vec<T>>,
}

impl<T: Sample> Covector<T> {
    pub fn new(grid: Arc<SpacetimeGrid>, variance: Variance, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::LengthMismatch {
                expected: grid.dim(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        Ok(Self {
            grid,
            variance,
            components,
        })
    }

    pub fn grid(&self) -> &Arc<SpacetimeGrid> {
        &self.grid
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn component(&self, mu: usize) -> &[T] {
        &self.components[mu]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<T>> {
        self.components
    }

    pub fn at(&self, point: usize) -> Vec<T> {
        self.components.iter().map(|c| c[point]).collect()
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Covector<U> {
        Covector {
            grid: self.grid.clone(),
            variance: self.variance,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// Multiplies every component pointwise by a scalar field.
    pub fn scale_by(&self, weights: &[f64]) -> Covector<T> {
        Covector {
            grid: self.grid.clone(),
            variance: self.variance,
            components: self
                .components
                .iter()
                .map(|c| c.iter().zip(weights).map(|(&v, &w)| v * w).collect())
                .collect(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for c in &self.components {
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    index: self.grid.unravel(i),
                });
            }
        }
        Ok(())
    }
}
