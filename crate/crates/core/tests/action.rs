use std::f64::consts::TAU;
use std::sync::Arc;

use vdlab_core::fields::quantum_potential;
use vdlab_core::grid::{Axis, Field, SpacetimeGrid, StencilOrder};
use vdlab_core::kgops::{action_gradient_check, action_value, ActionParams, ActionVariable};
use vdlab_core::manufactured::random_manufactured;
use vdlab_core::PolarDecomposition;

fn grid(nt: usize, nx: usize) -> Arc<SpacetimeGrid> {
    Arc::new(SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, 2.0, nt), Axis::periodic(0.0, TAU, nx)]).unwrap())
}

#[test]
fn gradients_match_euler_lagrange_on_random_fields() {
    let g = grid(13, 16);
    for seed in [3_u64, 7, 11, 19] {
        let (hbar, mass) = (0.9, 1.4);
        let p = random_manufactured(seed, &g, 2, hbar, mass).polar(&g).unwrap();
        let q = quantum_potential(&p, StencilOrder::Second).unwrap();
        // Omega^2 off the constraint surface so the lambda gradient is nonzero.
        let omega2 = Field::from_fn(g.clone(), |x| 1.0 + 0.2 * (x[1] + 0.3 * x[0]).sin())
            .zip_map(&q.omega2, |a, b| a * b)
            .unwrap();
        let lambda = Field::from_fn(g.clone(), |x| 0.4 + 0.3 * (2.0 * x[1]).cos() - 0.2 * x[0]);
        let params = ActionParams::flat(1.0, hbar, mass);
        let check = action_gradient_check(&p, &omega2, &lambda, &params, StencilOrder::Second, 1e-6).unwrap();
        for c in &check.comparisons {
            assert!(c.relative_deviation <= 1e-3, "seed {seed} {}: {}", c.variable.label(), c.relative_deviation);
            assert!(c.relative_magnitude() > 1e-3, "seed {seed} {}: gradient vanished", c.variable.label());
        }
    }
}

#[test]
fn finite_differences_agree_with_full_reevaluation() {
    let g = grid(11, 12);
    let (hbar, mass, eps) = (1.0, 1.2, 1e-6);
    let p = random_manufactured(5, &g, 2, hbar, mass).polar(&g).unwrap();
    let omega2 = Field::from_fn(g.clone(), |x| 1.1 + 0.1 * x[1].cos());
    let lambda = Field::from_fn(g.clone(), |x| 0.3 * x[1].sin() + 0.1 * x[0]);
    let params = ActionParams::flat(1.0, hbar, mass);
    let order = StencilOrder::Second;
    let check = action_gradient_check(&p, &omega2, &lambda, &params, order, eps).unwrap();
    let weight = g.cell_volume() * g.volume_weight();
    let s = check.get(ActionVariable::Action);
    for (k, &j) in s.points.iter().enumerate().step_by(7) {
        let bump = |sign: f64| {
            let mut action = p.action().clone().into_values();
            action[j] += sign * eps;
            let q = PolarDecomposition::new(p.rho().clone(), Field::new(g.clone(), action).unwrap(), hbar, mass)
                .unwrap();
            action_value(&q, &omega2, &lambda, &params, order).unwrap()
        };
        let full = (bump(1.0) - bump(-1.0)) / (2.0 * eps * weight);
        assert!(
            (full - s.finite_difference[k]).abs() <= 1e-5 * s.scale,
            "point {j}: {full} vs {}",
            s.finite_difference[k]
        );
    }
}

#[test]
fn gradients_vanish_at_plane_wave() {
    let g = Arc::new(
        SpacetimeGrid::minkowski(vec![Axis::one_sided(0.0, 2.0, 13), Axis::one_sided(0.0, 2.0, 13)]).unwrap(),
    );
    let (hbar, mass, px) = (0.7, 1.1_f64, 0.5_f64);
    let e = (mass * mass + px * px).sqrt();
    let p = PolarDecomposition::new(
        Field::constant(g.clone(), 1.7),
        Field::from_fn(g.clone(), |x| e * x[0] - px * x[1]),
        hbar,
        mass,
    )
    .unwrap();
    let omega2 = Field::constant(g.clone(), 1.0);
    let lambda = Field::constant(g.clone(), 0.0);
    let params = ActionParams::flat(1.0, hbar, mass);
    let check = action_gradient_check(&p, &omega2, &lambda, &params, StencilOrder::Second, 1e-6).unwrap();
    for c in &check.comparisons {
        assert!(c.el_max <= 1e-12, "{}: {}", c.variable.label(), c.el_max);
        assert!(c.relative_magnitude() <= 1e-6, "{}: {}", c.variable.label(), c.relative_magnitude());
    }
}

#[test]
fn fourth_order_lattice_also_matches() {
    let g = grid(17, 16);
    let (hbar, mass) = (1.0, 1.0);
    let p = random_manufactured(23, &g, 1, hbar, mass).polar(&g).unwrap();
    let omega2 = Field::from_fn(g.clone(), |x| 1.0 + 0.1 * x[1].sin());
    let lambda = Field::from_fn(g.clone(), |x| 0.2 * (x[1] - x[0]).cos());
    let params = ActionParams::flat(2.0, hbar, mass);
    let check = action_gradient_check(&p, &omega2, &lambda, &params, StencilOrder::Fourth, 1e-6).unwrap();
    assert!(check.passes(1e-3), "{}", check.max_relative_deviation());
}
