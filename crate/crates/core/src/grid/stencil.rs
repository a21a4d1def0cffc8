//! Finite-difference operators.
//!
//! Interior points use central stencils of the requested order. On one-sided
//! axes the two outermost layers fall back to second-order closures:
//! `(-3f0 + 4f1 - f2) / 2h` for first and `(2f0 - 5f1 + 4f2 - f3) / h^2` for
//! second derivatives.

use super::field::{Covector, Field, Sample, Variance};
use super::{Boundary, SpacetimeGrid, StencilOrder};
use crate::error::{Error, Result};

#[inline]
fn neighbour(grid: &SpacetimeGrid, flat: usize, axis: usize, i: usize, offset: isize) -> usize {
    let n = grid.axis(axis).points as isize;
    let j = match grid.axis(axis).boundary {
        Boundary::Periodic => (i as isize + offset).rem_euclid(n),
        Boundary::OneSided => i as isize + offset,
    };
    debug_assert!((0..n).contains(&j));
    let stride = grid.stride(axis) as isize;
    (flat as isize + (j - i as isize) * stride) as usize
}

/// First partial derivative along `axis`.
pub fn partial<T: Sample>(grid: &SpacetimeGrid, values: &[T], axis: usize, order: StencilOrder) -> Vec<T> {
    (0..grid.len())
        .map(|flat| partial_at(grid, values, axis, flat, order))
        .collect()
}

/// [`partial`] at a single point.
pub fn partial_at<T: Sample>(
    grid: &SpacetimeGrid,
    values: &[T],
    axis: usize,
    flat: usize,
    order: StencilOrder,
) -> T {
    let ax = grid.axis(axis);
    let n = ax.points;
    let h = ax.spacing();
    let periodic = ax.boundary == Boundary::Periodic;
    let i = grid.index_along(flat, axis);
    let f = |off| values[neighbour(grid, flat, axis, i, off)];
    let wide = order == StencilOrder::Fourth && (periodic || (i >= 2 && i + 2 < n));
    if wide {
        (f(-2) - f(2) + (f(1) - f(-1)) * 8.0) * (1.0 / (12.0 * h))
    } else if periodic || (i >= 1 && i + 1 < n) {
        (f(1) - f(-1)) * (0.5 / h)
    } else if i == 0 {
        (f(1) * 4.0 - f(0) * 3.0 - f(2)) * (0.5 / h)
    } else {
        (f(0) * 3.0 - f(-1) * 4.0 + f(-2)) * (0.5 / h)
    }
}

/// Second partial derivative along `axis` from a direct second-difference stencil.
pub fn second_partial<T: Sample>(
    grid: &SpacetimeGrid,
    values: &[T],
    axis: usize,
    order: StencilOrder,
) -> Vec<T> {
    (0..grid.len())
        .map(|flat| second_partial_at(grid, values, axis, flat, order))
        .collect()
}

/// [`second_partial`] at a single point.
pub fn second_partial_at<T: Sample>(
    grid: &SpacetimeGrid,
    values: &[T],
    axis: usize,
    flat: usize,
    order: StencilOrder,
) -> T {
    let ax = grid.axis(axis);
    let n = ax.points;
    let h2 = ax.spacing() * ax.spacing();
    let periodic = ax.boundary == Boundary::Periodic;
    let i = grid.index_along(flat, axis);
    let f = |off| values[neighbour(grid, flat, axis, i, off)];
    let wide = order == StencilOrder::Fourth && (periodic || (i >= 2 && i + 2 < n));
    if wide {
        ((f(1) + f(-1)) * 16.0 - (f(2) + f(-2)) - f(0) * 30.0) * (1.0 / (12.0 * h2))
    } else if periodic || (i >= 1 && i + 1 < n) {
        (f(1) + f(-1) - f(0) * 2.0) * (1.0 / h2)
    } else if i == 0 {
        (f(0) * 2.0 - f(1) * 5.0 + f(2) * 4.0 - f(3)) * (1.0 / h2)
    } else {
        (f(0) * 2.0 - f(-1) * 5.0 + f(-2) * 4.0 - f(-3)) * (1.0 / h2)
    }
}

/// `sum_mu g^{mu mu} d_mu d_mu f` at a single point.
pub fn dalembertian_at<T: Sample>(grid: &SpacetimeGrid, values: &[T], flat: usize, order: StencilOrder) -> T {
    (0..grid.dim()).fold(T::default(), |acc, mu| {
        acc + second_partial_at(grid, values, mu, flat, order) * grid.inverse_metric(mu)
    })
}

/// Covariant components of the gradient.
pub fn gradient<T: Sample>(f: &Field<T>, order: StencilOrder) -> Result<Covector<T>> {
    f.check_finite()?;
    let grid = f.grid();
    let components = (0..grid.dim())
        .map(|mu| partial(grid, f.values(), mu, order))
        .collect();
    Covector::new(grid.clone(), Variance::Covariant, components)
}

fn reindex<T: Sample>(w: &Covector<T>, from: Variance, to: Variance, name: &'static str) -> Result<Covector<T>> {
    if w.variance() != from {
        return Err(Error::VarianceMismatch { expected: name });
    }
    w.check_finite()?;
    let grid = w.grid();
    let components = w
        .components()
        .iter()
        .enumerate()
        .map(|(mu, c)| {
            let g = match to {
                Variance::Contravariant => grid.inverse_metric(mu),
                Variance::Covariant => grid.metric()[mu],
            };
            c.iter().map(|&v| v * g).collect()
        })
        .collect();
    Covector::new(grid.clone(), to, components)
}

/// Contracts with the diagonal inverse metric.
pub fn raise_index<T: Sample>(w: &Covector<T>) -> Result<Covector<T>> {
    reindex(w, Variance::Covariant, Variance::Contravariant, "covariant")
}

pub fn lower_index<T: Sample>(w: &Covector<T>) -> Result<Covector<T>> {
    reindex(w, Variance::Contravariant, Variance::Covariant, "contravariant")
}

/// `sum_mu d_mu v^mu` for a contravariant field.
pub fn divergence<T: Sample>(v: &Covector<T>, order: StencilOrder) -> Result<Field<T>> {
    if v.variance() != Variance::Contravariant {
        return Err(Error::VarianceMismatch {
            expected: "contravariant",
        });
    }
    v.check_finite()?;
    let grid = v.grid();
    let mut out = vec![T::default(); grid.len()];
    for mu in 0..grid.dim() {
        for (o, d) in out.iter_mut().zip(partial(grid, v.component(mu), mu, order)) {
            *o = *o + d;
        }
    }
    Field::new(grid.clone(), out)
}

/// `sum_mu g^{mu mu} d_mu d_mu f`.
pub fn dalembertian<T: Sample>(f: &Field<T>, order: StencilOrder) -> Result<Field<T>> {
    f.check_finite()?;
    let grid = f.grid();
    Field::new(grid.clone(), dalembertian_values(grid, f.values(), order))
}

/// Raw-slice form of [`dalembertian`].
pub fn dalembertian_values<T: Sample>(grid: &SpacetimeGrid, values: &[T], order: StencilOrder) -> Vec<T> {
    let mut out = vec![T::default(); grid.len()];
    for mu in 0..grid.dim() {
        let g = grid.inverse_metric(mu);
        for (o, d) in out.iter_mut().zip(second_partial(grid, values, mu, order)) {
            *o = *o + d * g;
        }
    }
    out
}

/// Raw-slice form of [`gradient`] without the finiteness check.
pub fn gradient_values<T: Sample>(grid: &SpacetimeGrid, values: &[T], order: StencilOrder) -> Vec<Vec<T>> {
    (0..grid.dim()).map(|mu| partial(grid, values, mu, order)).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::grid::reduce::max_norm_at;
    use crate::grid::Axis;

    fn grid_1p1(nt: usize, nx: usize) -> Arc<SpacetimeGrid> {
        Arc::new(
            SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 1.0, nt),
                Axis::one_sided(-1.0, 2.0, nx),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = grid_1p1(9, 11);
        let f = Field::constant(g, 1.0);
        let grad = gradient(&f, StencilOrder::Second).unwrap();
        assert!(grad.components().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_exact_on_linear_field_including_boundaries() {
        let g = grid_1p1(9, 11);
        let f = Field::from_fn(g, |x| x[1]);
        let grad = gradient(&f, StencilOrder::Second).unwrap();
        for &v in grad.component(1) {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn raise_index_flips_spatial_sign() {
        let g = grid_1p1(5, 5);
        let w = Covector::new(g.clone(), Variance::Covariant, vec![vec![2.0; 25], vec![3.0; 25]]).unwrap();
        let up = raise_index(&w).unwrap();
        assert_eq!(up.component(0)[0], 2.0);
        assert_eq!(up.component(1)[0], -3.0);
        assert!(raise_index(&up).is_err());

        let g4 = Arc::new(SpacetimeGrid::minkowski(vec![Axis::periodic(0.0, 1.0, 5); 4]).unwrap());
        let n = g4.len();
        let w4 = Covector::new(g4, Variance::Covariant, vec![vec![1.0; n]; 4]).unwrap();
        assert_eq!(raise_index(&w4).unwrap().at(0), vec![1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn dalembertian_exact_on_quadratics() {
        let g = grid_1p1(9, 11);
        let t2 = dalembertian(&Field::from_fn(g.clone(), |x| x[0] * x[0]), StencilOrder::Second).unwrap();
        let x2 = dalembertian(&Field::from_fn(g, |x| x[1] * x[1]), StencilOrder::Second).unwrap();
        for (&a, &b) in t2.values().iter().zip(x2.values()) {
            assert!((a - 2.0).abs() < 1e-10, "{a}");
            assert!((b + 2.0).abs() < 1e-10, "{b}");
        }
    }

    #[test]
    fn divergence_of_raised_gradient_matches_box_for_quadratic() {
        let g = grid_1p1(9, 11);
        let f = Field::from_fn(g.clone(), |x| 3.0 * x[0] * x[0] - 0.5 * x[1] * x[1] + x[0] * x[1]);
        let grad = raise_index(&gradient(&f, StencilOrder::Second).unwrap()).unwrap();
        let div = divergence(&grad, StencilOrder::Second).unwrap();
        // analytic box f = 6 - (-1) = 7
        for &i in &g.interior(2) {
            assert!((div.values()[i] - 7.0).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_of_constant_is_zero() {
        let g = grid_1p1(7, 7);
        let v = Covector::new(g.clone(), Variance::Contravariant, vec![vec![1.5; g.len()], vec![-0.2; g.len()]]).unwrap();
        let d = divergence(&v, StencilOrder::Fourth).unwrap();
        assert!(d.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn non_finite_reports_first_index() {
        let g = grid_1p1(5, 5);
        let mut f = Field::constant(g, 0.0);
        f.values_mut()[7] = f64::NAN;
        assert_eq!(
            gradient(&f, StencilOrder::Second).unwrap_err(),
            Error::NonFinite { index: vec![1, 2] }
        );
    }

    fn sine_error(n: usize, order: StencilOrder) -> f64 {
        let g = Arc::new(
            SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 1.0, 5),
                Axis::periodic(0.0, std::f64::consts::TAU, n),
            ])
            .unwrap(),
        );
        let f = Field::from_fn(g.clone(), |x| x[1].sin());
        let d = gradient(&f, order).unwrap();
        let err: Vec<f64> = (0..g.len()).map(|i| d.component(1)[i] - g.coords(i)[1].cos()).collect();
        max_norm_at(&err, &g.interior(0))
    }

    #[test]
    fn sine_derivative_converges_at_stencil_order() {
        // Ratios measured by running the study: second order -> 4, fourth -> 16.
        let r2 = sine_error(32, StencilOrder::Second) / sine_error(64, StencilOrder::Second);
        assert!((3.9..4.1).contains(&r2), "{r2}");
        let r4 = sine_error(32, StencilOrder::Fourth) / sine_error(64, StencilOrder::Fourth);
        assert!((15.5..16.5).contains(&r4), "{r4}");
    }

    #[test]
    fn plane_wave_box_eigenvalue() {
        let (k, w) = (2.0, 3.0);
        let ratio = |n: usize| {
            let g = Arc::new(
                SpacetimeGrid::minkowski(vec![
                    Axis::periodic(0.0, std::f64::consts::TAU, n),
                    Axis::periodic(0.0, std::f64::consts::TAU, n),
                ])
                .unwrap(),
            );
            let f = Field::from_fn(g.clone(), |x| Complex64::new(0.0, k * x[1] - w * x[0]).exp());
            let b = dalembertian(&f, StencilOrder::Second).unwrap();
            b.values()
                .iter()
                .zip(f.values())
                .map(|(b, f)| (b / f + (w * w - k * k)).norm())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (ratio(32), ratio(64));
        assert!(e1 < 0.5);
        assert!((3.9..4.1).contains(&(e1 / e2)));
    }

    proptest! {
        #[test]
        fn operators_are_linear(a in proptest::collection::vec(-1.0f64..1.0, 49),
                                b in proptest::collection::vec(-1.0f64..1.0, 49),
                                alpha in -3.0f64..3.0) {
            let g = Arc::new(SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 1.0, 7), Axis::periodic(0.0, 1.0, 7)]).unwrap());
            let fa = Field::new(g.clone(), a).unwrap();
            let fb = Field::new(g.clone(), b).unwrap();
            let combo = fa.zip_map(&fb, |x, y| x * alpha + y).unwrap();
            for order in [StencilOrder::Second, StencilOrder::Fourth] {
                let lhs = dalembertian(&combo, order).unwrap();
                let ba = dalembertian(&fa, order).unwrap();
                let bb = dalembertian(&fb, order).unwrap();
                for i in 0..g.len() {
                    let rhs = ba.values()[i] * alpha + bb.values()[i];
                    prop_assert!((lhs.values()[i] - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
                }
            }
        }

        #[test]
        fn raise_then_lower_is_identity(vals in proptest::collection::vec(-10.0f64..10.0, 50)) {
            let g = Arc::new(SpacetimeGrid::minkowski(vec![
                Axis::one_sided(0.0, 1.0, 5), Axis::periodic(0.0, 1.0, 5)]).unwrap());
            let w = Covector::new(g, Variance::Covariant, vec![vals[..25].to_vec(), vals[25..].to_vec()]).unwrap();
            let back = lower_index(&raise_index(&w).unwrap()).unwrap();
            prop_assert_eq!(back, w);
        }
    }
}
