#![allow(dead_code)]

use std::f64::consts::TAU;
use std::sync::Arc;

use vdlab_core::grid::{Axis, SpacetimeGrid};

pub const SEEDS: [u64; 10] = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89];

/// One-sided time on `[0, 2 pi]` with `n + 1` nodes, periodic space with `n` nodes.
pub fn corpus_grid(n: usize) -> Arc<SpacetimeGrid> {
    Arc::new(SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, TAU, n + 1), Axis::periodic(0.0, TAU, n)]).unwrap())
}

/// Both axes one-sided on `[0, len]`.
pub fn box_grid(nt: usize, nx: usize, len: f64) -> Arc<SpacetimeGrid> {
    Arc::new(SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, len, nt), Axis::one_sided(0.0, len, nx)]).unwrap())
}

pub fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[0] / w[1]).collect()
}

pub fn assert_ratios_in(values: &[f64], lo: f64, hi: f64, what: &str) {
    for r in ratios(values) {
        assert!((lo..=hi).contains(&r), "{what}: ratio {r} outside [{lo}, {hi}] for {values:?}");
    }
}
