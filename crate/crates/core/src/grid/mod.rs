//! Uniform tensor-product spacetime grids with constant diagonal metrics.
//!
//! Axis 0 is time. Samples are stored row-major, so the last axis is the
//! fastest-varying one. With a constant diagonal metric the covariant
//! derivative of scalars and vectors reduces to the partial derivative and
//! the Ricci scalar vanishes; every operator in this module relies on that.

mod field;
pub mod reduce;
mod stencil;

pub use field::{Covector, Field, RealField, ComplexField, Sample, Variance};
pub use stencil::{
    dalembertian, dalembertian_at, dalembertian_values, divergence, gradient, gradient_values,
    lower_index, partial, partial_at, raise_index, second_partial, second_partial_at,
};

use crate::error::{Error, Result};

/// Boundary treatment along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Wrap-around; the point at `origin + extent` is identified with `origin`.
    Periodic,
    /// Second-order one-sided closures at both ends.
    OneSided,
}

/// Finite-difference order of the central stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    #[default]
    Second,
    /// Five-point central stencils in the interior; boundary closures stay second order.
    Fourth,
}

impl StencilOrder {
    pub fn half_width(self) -> usize {
        match self {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 2,
        }
    }

    /// Margin used when taking residual norms: composed operators reach two stencils deep.
    pub fn interior_margin(self) -> usize {
        2 * self.half_width()
    }

    pub fn accuracy(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub extent: f64,
    pub points: usize,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(origin: f64, extent: f64, points: usize, boundary: Boundary) -> Self {
        Self {
            origin,
            extent,
            points,
            boundary,
        }
    }

    pub fn periodic(origin: f64, extent: f64, points: usize) -> Self {
        Self::new(origin, extent, points, Boundary::Periodic)
    }

    pub fn one_sided(origin: f64, extent: f64, points: usize) -> Self {
        Self::new(origin, extent, points, Boundary::OneSided)
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.extent / self.points as f64,
            Boundary::OneSided => self.extent / (self.points - 1) as f64,
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing()
    }

    /// Same axis with the spacing halved; nodes of the coarse axis are kept.
    pub fn refined(&self) -> Self {
        let points = match self.boundary {
            Boundary::Periodic => 2 * self.points,
            Boundary::OneSided => 2 * self.points - 1,
        };
        Self {
            points,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeGrid {
    axes: Vec<Axis>,
    metric: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl SpacetimeGrid {
    pub fn new(axes: Vec<Axis>, metric: Vec<f64>) -> Result<Self> {
        let dim = axes.len();
        if dim != 2 && dim != 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        for (axis, a) in axes.iter().enumerate() {
            if a.points < 5 {
                return Err(Error::TooFewPoints {
                    axis,
                    points: a.points,
                });
            }
            if !(a.extent.is_finite() && a.extent > 0.0) || !a.origin.is_finite() {
                return Err(Error::InvalidExtent {
                    axis,
                    extent: a.extent,
                });
            }
        }
        let positives = metric.iter().filter(|&&g| g > 0.0).count();
        if metric.len() != dim
            || positives != 1
            || metric.iter().any(|g| *g == 0.0 || !g.is_finite())
        {
            return Err(Error::InvalidMetric(metric));
        }
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].points;
        }
        let len = axes.iter().map(|a| a.points).product();
        Ok(Self {
            axes,
            metric,
            strides,
            len,
        })
    }

    /// Mostly-minus signature: (+1, -1, ...).
    pub fn minkowski(axes: Vec<Axis>) -> Result<Self> {
        let mut metric = vec![-1.0; axes.len()];
        if let Some(g) = metric.first_mut() {
            *g = 1.0;
        }
        Self::new(axes, metric)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn metric(&self) -> &[f64] {
        &self.metric
    }

    pub fn inverse_metric(&self, mu: usize) -> f64 {
        1.0 / self.metric[mu]
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.axes[a].spacing()
    }

    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    /// sqrt(-g) for the constant diagonal metric.
    pub fn volume_weight(&self) -> f64 {
        self.metric.iter().product::<f64>().abs().sqrt()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn index_along(&self, flat: usize, a: usize) -> usize {
        (flat / self.strides[a]) % self.axes[a].points
    }

    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.index_along(flat, a)).collect()
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.axes[a].coord(self.index_along(flat, a)))
            .collect()
    }

    /// True when the point is at least `margin` nodes away from every one-sided boundary.
    pub fn is_interior(&self, flat: usize, margin: usize) -> bool {
        self.axes.iter().enumerate().all(|(a, axis)| match axis.boundary {
            Boundary::Periodic => true,
            Boundary::OneSided => {
                let i = self.index_along(flat, a);
                i >= margin && i + margin < axis.points
            }
        })
    }

    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.len).filter(|&i| self.is_interior(i, margin)).collect()
    }

    pub fn refined(&self) -> Self {
        let axes = self.axes.iter().map(Axis::refined).collect();
        Self::new(axes, self.metric.clone()).expect("refining a valid grid stays valid")
    }

    pub fn signature_label(&self) -> String {
        let signs: String = self
            .metric
            .iter()
            .map(|g| if *g > 0.0 { '+' } else { '-' })
            .collect();
        format!("({signs})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpacetimeGrid {
        SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, 1.0, 11), Axis::periodic(0.0, 2.0, 8)])
            .unwrap()
    }

    #[test]
    fn spacing_rules() {
        let g = grid();
        assert_eq!(g.spacing(0), 0.1);
        assert_eq!(g.spacing(1), 0.25);
        assert_eq!(g.len(), 88);
        assert_eq!(g.volume_weight(), 1.0);
    }

    #[test]
    fn ravel_roundtrip() {
        let g = grid();
        for flat in 0..g.len() {
            assert_eq!(g.ravel(&g.unravel(flat)), flat);
        }
    }

    #[test]
    fn rejects_bad_metric_and_points() {
        let axes = vec![Axis::one_sided(0.0, 1.0, 5), Axis::periodic(0.0, 1.0, 5)];
        assert!(matches!(
            SpacetimeGrid::new(axes.clone(), vec![1.0, 1.0]),
            Err(Error::InvalidMetric(_))
        ));
        assert!(matches!(
            SpacetimeGrid::new(axes.clone(), vec![1.0, 0.0]),
            Err(Error::InvalidMetric(_))
        ));
        let few = vec![Axis::one_sided(0.0, 1.0, 3), Axis::periodic(0.0, 1.0, 5)];
        assert_eq!(
            SpacetimeGrid::minkowski(few),
            Err(Error::TooFewPoints { axis: 0, points: 3 })
        );
        assert!(matches!(
            SpacetimeGrid::minkowski(vec![Axis::periodic(0.0, 1.0, 5); 3]),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = grid();
        let r = g.refined();
        assert_eq!(r.spacing(0), g.spacing(0) / 2.0);
        assert_eq!(r.spacing(1), g.spacing(1) / 2.0);
        assert_eq!(r.axis(0).points, 21);
        assert_eq!(r.axis(1).points, 16);
    }

    #[test]
    fn interior_skips_one_sided_edges_only() {
        let g = grid();
        let inner = g.interior(2);
        assert_eq!(inner.len(), (11 - 4) * 8);
    }
}
