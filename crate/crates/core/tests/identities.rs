mod common;

use common::{assert_ratios_in, box_grid, corpus_grid, SEEDS};
use num_complex::Complex64;
use vdlab_core::fields::phase_identity_residual;
use vdlab_core::grid::StencilOrder;
use vdlab_core::kgops::{
    box_d, box_d_nested, kg_residual_polar, kg_residual_wave, shift_residual, wave_form_identity,
};
use vdlab_core::manufactured::{random_manufactured, ManufacturedPolar, Profile, Term};
use vdlab_core::DerivativePack;

const HBAR: f64 = 0.8;
const MASS: f64 = 1.3;

fn stencil_pack(seed: u64, n: usize, order: StencilOrder) -> DerivativePack {
    let g = corpus_grid(n);
    let m = random_manufactured(seed, &g, 2, HBAR, MASS);
    DerivativePack::from_stencils(&m.polar(&g).unwrap(), order).unwrap()
}

fn analytic_pack(seed: u64, n: usize) -> DerivativePack {
    let g = corpus_grid(n);
    random_manufactured(seed, &g, 3, HBAR, MASS).pack(&g, StencilOrder::Second).unwrap()
}

#[test]
fn shift_theorem_converges_at_second_order() {
    for seed in SEEDS {
        let box_res: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| shift_residual(&stencil_pack(seed, n, StencilOrder::Second)).dalembertian.max_abs)
            .collect();
        assert_ratios_in(&box_res, 3.5, 4.5, &format!("seed {seed}"));
    }
}

#[test]
fn shift_theorem_holds_to_round_off_with_exact_derivatives() {
    for seed in SEEDS {
        let r = shift_residual(&analytic_pack(seed, 32));
        assert!(r.relative() <= 1e-10, "seed {seed}: {r:?}");
    }
}

#[test]
fn fourth_order_stencils_converge_faster() {
    for seed in &SEEDS[..3] {
        let res: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| shift_residual(&stencil_pack(*seed, n, StencilOrder::Fourth)).dalembertian.max_abs)
            .collect();
        assert_ratios_in(&res, 12.0, 20.0, &format!("seed {seed}"));
    }
}

#[test]
fn phase_identity_converges_and_is_exact_analytically() {
    for seed in SEEDS {
        let res: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| phase_identity_residual(&stencil_pack(seed, n, StencilOrder::Second)).unwrap())
            .collect();
        assert_ratios_in(&res, 3.5, 4.5, &format!("seed {seed}"));
        let pack = analytic_pack(seed, 32);
        let scale = pack.grad_action.iter().flatten().fold(0.0_f64, |a, s| a.max(s.abs())) / HBAR;
        assert!(phase_identity_residual(&pack).unwrap() <= 1e-10 * scale);
    }
}

#[test]
fn exponential_density_matches_hand_derivation() {
    // sqrt(rho) = exp(beta x), S = E t - p x: D_t phi = 0, D_x phi = beta phi,
    // so D_mu D^mu phi = g^xx beta^2 phi = -beta^2 phi.
    let (beta, e, p) = (0.4, 1.7, 0.6);
    let g = box_grid(9, 9, 1.0);
    let m = ManufacturedPolar {
        ln_rho: Profile::zero(2).with(Term::Linear(vec![0.0, 2.0 * beta])),
        action: Profile::zero(2).with(Term::Linear(vec![e, -p])),
        hbar: HBAR,
        mass: MASS,
    };
    let pack = m.pack(&g, StencilOrder::Second).unwrap();
    let bd = box_d(&pack);
    for i in pack.interior() {
        let x = g.coords(i);
        let phi = Complex64::from_polar((beta * x[1]).exp(), (e * x[0] - p * x[1]) / HBAR);
        assert!((bd[i] + phi * beta * beta).norm() <= 1e-13 * phi.norm());
        assert!((pack.qtilde(i) + beta * beta).abs() <= 1e-14);
    }
}

fn plane_wave(n: usize) -> DerivativePack {
    let (p, hbar, mass) = (0.9_f64, 0.6, 1.1_f64);
    let e = (p * p + mass * mass).sqrt();
    let m = ManufacturedPolar {
        ln_rho: Profile::zero(2).with(Term::Constant(0.25)),
        action: Profile::zero(2).with(Term::Linear(vec![e, -p])),
        hbar,
        mass,
    };
    let g = box_grid(n, n, 3.0);
    m.pack(&g, StencilOrder::Second).unwrap()
}

#[test]
fn plane_wave_satisfies_every_form() {
    let pack = plane_wave(33);
    let polar = kg_residual_polar(&pack, None).unwrap();
    assert!(polar.motion.max_abs <= 1e-8 && polar.continuity.max_abs <= 1e-8, "{polar:?}");
    let wave = kg_residual_wave(&pack).unwrap();
    assert!(wave.quantum_force.max_abs <= 1e-8, "{:?}", wave.quantum_force);
    assert!(wave.log_derivative.max_abs <= 1e-8, "{:?}", wave.log_derivative);
    let bd = box_d(&pack);
    assert!(pack.interior().iter().all(|&i| bd[i].norm() <= 1e-8));
}

#[test]
fn plane_wave_stencil_residual_is_second_order() {
    let res: Vec<f64> = [33, 65, 129]
        .iter()
        .map(|&n| {
            let pack = plane_wave(n);
            let s = DerivativePack::from_stencils(&pack.polar, StencilOrder::Second).unwrap();
            kg_residual_wave(&s).unwrap().quantum_force.max_abs
        })
        .collect();
    assert_ratios_in(&res, 3.5, 4.5, "plane wave");
}

#[test]
fn wave_form_identity_is_algebraic() {
    for seed in SEEDS {
        let r = wave_form_identity(&analytic_pack(seed, 24));
        assert!(r.relative() <= 1e-11, "seed {seed}: {r:?}");
    }
}

#[test]
fn nested_and_expanded_box_d_agree_to_stencil_order() {
    for seed in &SEEDS[..4] {
        let gaps: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let pack = stencil_pack(*seed, n, StencilOrder::Second);
                let (a, b) = (box_d(&pack), box_d_nested(&pack));
                pack.interior().iter().map(|&i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
            })
            .collect();
        assert_ratios_in(&gaps, 3.3, 4.7, &format!("seed {seed}"));
    }
}

#[test]
fn quantum_force_and_log_derivative_forms_coincide() {
    for seed in &SEEDS[..4] {
        let w = kg_residual_wave(&analytic_pack(*seed, 24)).unwrap();
        let scale = w.quantum_force.scale.max(w.log_derivative.scale);
        assert!(w.form_gap <= 1e-11 * scale, "seed {seed}: gap {}", w.form_gap);
    }
}
