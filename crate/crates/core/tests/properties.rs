mod common;

use common::corpus_grid;
use num_complex::Complex64;
use proptest::prelude::*;
use vdlab_core::dirac::{build_gamma, plane_wave_dispersion, spinor_density, GammaDim, SpinorField};
use vdlab_core::grid::{Field, StencilOrder};
use vdlab_core::kgops::{general_kg_residual, mass_substituted_residual, shift_residual};
use vdlab_core::manufactured::{generate_manufactured_fields, random_manufactured, Profile};
use vdlab_core::vacuum::{vacuum_mass, MassBranch, StaticLambdaOde, VacuumField};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn slash_square_is_norm(a in prop::collection::vec(-10.0..10.0_f64, 4)) {
        let rep = build_gamma(GammaDim::Four);
        let s = rep.slash(&a);
        let norm = a[0] * a[0] - a[1] * a[1] - a[2] * a[2] - a[3] * a[3];
        let d = &s * &s - rep.identity() * Complex64::new(norm, 0.0);
        let scale: f64 = a.iter().map(|x| x * x).sum();
        prop_assert!(d.iter().all(|z| z.norm() <= 8.0 * f64::EPSILON * scale.max(1.0)));
    }

    #[test]
    fn dispersion_is_even_and_above_total_mass(k in -20.0..20.0_f64, m in 0.0..3.0_f64, big_m in -3.0..3.0_f64) {
        let e = plane_wave_dispersion(k, m, big_m).unwrap();
        let f = plane_wave_dispersion(-k, m, big_m).unwrap();
        prop_assert!((e - f).abs() <= 1e-12 * e.max(1.0));
        prop_assert!(e >= (m + big_m).abs() - 1e-12);
        prop_assert!(e >= k.abs() - 1e-12);
    }

    #[test]
    fn density_is_phase_invariant(a in -1.0..1.0_f64, b in -1.0..1.0_f64, alpha in 0.0..6.3_f64) {
        let g = corpus_grid(8);
        let psi = SpinorField::from_fn(g, build_gamma(GammaDim::Two), |x| {
            vec![Complex64::new(a + x[1].sin(), 0.3), Complex64::new(b, x[0])]
        }).unwrap();
        let r0 = spinor_density(&psi).unwrap();
        let r1 = spinor_density(&psi.map_global_phase(alpha)).unwrap();
        for (x, y) in r0.values().iter().zip(r1.values()) {
            prop_assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn generator_is_deterministic(seed in any::<u64>(), smooth in 0_usize..4) {
        let g = corpus_grid(8);
        let (p1, k1) = generate_manufactured_fields(seed, &g, smooth, 1.0, 1.0).unwrap();
        let (p2, k2) = generate_manufactured_fields(seed, &g, smooth, 1.0, 1.0).unwrap();
        prop_assert_eq!(p1, p2);
        prop_assert_eq!(k1.box_phi, k2.box_phi);
    }

    #[test]
    fn analytic_shift_theorem_for_any_seed(seed in any::<u64>(), hbar in 0.3..2.0_f64, mass in 0.5..2.0_f64) {
        let g = corpus_grid(12);
        let pack = random_manufactured(seed, &g, 2, hbar, mass).pack(&g, StencilOrder::Second).unwrap();
        prop_assert!(shift_residual(&pack).relative() <= 1e-10);
    }

    #[test]
    fn conformal_substitution_for_any_seed(seed in any::<u64>(), amp in -2.0..2.0_f64) {
        let g = corpus_grid(12);
        let pack = random_manufactured(seed, &g, 2, 1.0, 1.0).pack(&g, StencilOrder::Second).unwrap();
        let v = VacuumField::new(Field::from_fn(g.clone(), |x| amp * (x[1] - 0.5 * x[0]).cos())).unwrap();
        let vm = vacuum_mass(&v, &pack, true, MassBranch::Plus).unwrap();
        let sub = mass_substituted_residual(&pack, vm.m2.values()).unwrap();
        let gen = general_kg_residual(&pack, &v.lambda).unwrap();
        let scale = gen.residual.scale.max(sub.residual.scale).max(f64::MIN_POSITIVE);
        for i in pack.interior() {
            prop_assert!((sub.field[i] - gen.field[i]).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn lambda_ode_is_linear(l0 in -5.0..5.0_f64, c in -4.0..4.0_f64) {
        let ln_rho = Profile::gaussian_log_density(1.0, 1.0);
        let ode = StaticLambdaOde::new(&ln_rho, 2.0, 1.0, -1.0).unwrap();
        let a = ode.integrate(0.7, l0, 2.0, 64).unwrap();
        let b = ode.integrate(0.7, c * l0, 2.0, 64).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-13 * (c * a).abs().max(f64::MIN_POSITIVE));
    }
}
