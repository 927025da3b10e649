//! Invariants over random inputs.

use gbdt_core::canonical::{
    fundamental_solution, j_monotonicity_defect, product_integral, richardson_limit, Sampled,
};
use gbdt_core::closed_form::Example51;
use gbdt_core::gbdt::{evolve, positivity_report, transfer};
use gbdt_core::matrix::{c, frobenius, identity, CMatrix};
use gbdt_core::sample::random_case;
use gbdt_core::triangular::{discretize, TriangularModel};
use proptest::prelude::*;

fn grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| if i + 1 == points { b } else { a + (b - a) * i as f64 / (points - 1) as f64 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_and_positivity_are_preserved(seed in 0u64..10_000) {
        let case = random_case(seed).unwrap();
        let t = evolve(&case.params, &case.system, &grid(0.0, 1.0, 33), 1e-10).unwrap();
        prop_assert!(t.identity_residual <= 1e-9);
        let r = positivity_report(&t).unwrap();
        prop_assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn transfer_functions_are_j_unitary_and_invertible(
        seed in 0u64..10_000, x in 0.0f64..1.0, re_z in -2.0f64..3.0, im_z in 0.3f64..3.0, lower in any::<bool>()
    ) {
        let case = random_case(seed).unwrap();
        let z = c(re_z, if lower { -im_z } else { im_z });
        let gap = gbdt_core::matrix::eigenvalues(&case.params.b).unwrap().iter()
            .map(|e| (z - e).norm().min((z - e.conj()).norm())).fold(f64::INFINITY, f64::min);
        prop_assume!(gap > 0.05);
        let t = evolve(&case.params, &case.system, &grid(0.0, 1.0, 9), 1e-11).unwrap();
        let e = transfer(&t, x, z).unwrap();
        prop_assert!(e.j_defect <= 1e-9 * e.cond_s);
        prop_assert!(e.w0_j_defect <= 1e-9 * e.cond_s);
        prop_assert!(e.w0_inverse_defect <= 1e-9 * e.cond_s);
        let at_conj = transfer(&t, x, z.conj()).unwrap();
        let n = e.v.nrows();
        prop_assert!(frobenius(&(&e.v * e.v_inverse(&at_conj, t.j()) - identity(n))) <= 1e-8 * e.cond_v.max(1.0));
    }

    #[test]
    fn solutions_are_j_expanding_in_the_upper_half_plane(re_z in -1.0f64..2.0, im_z in 0.1f64..3.0) {
        let sys = Example51::new(1.0).system();
        let f = fundamental_solution(&sys, c(re_z, im_z), &grid(0.0, 1.0, 11), 1e-11).unwrap();
        prop_assert!(j_monotonicity_defect(&f, sys.j()) <= 1e-8);
    }

    #[test]
    fn product_integral_agrees_with_ode(re_z in -1.0f64..2.0, im_z in 0.5f64..3.0) {
        let sys = Example51::new(1.0).system();
        let z = c(re_z, im_z);
        let ode = fundamental_solution(&sys, z, &grid(0.0, 1.0, 5), 1e-12).unwrap();
        let prod = product_integral(&sys, z, &grid(0.0, 1.0, 401)).unwrap();
        prop_assert!(frobenius(&(ode.last() - prod.last())) <= 1e-4);
    }

    #[test]
    fn node_identity_holds_for_any_beta(e in proptest::collection::vec(-1.0f64..1.0, 8), n in 4usize..40) {
        let beta = |x: f64| CMatrix::from_fn(1, 2, |_, k| c(e[2 * k] + e[4 + 2 * k] * x, e[2 * k + 1] * x * x));
        let j = CMatrix::from_fn(2, 2, |r, k| c(if r != k { 1.0 } else { 0.0 }, 0.0));
        let b = Sampled::from_fn(grid(0.0, 1.0, 41), beta).unwrap();
        let model = TriangularModel::new(j, b, 0.0, 1.0).unwrap();
        prop_assert!(discretize(&model, n).unwrap().node_identity_defect() <= 1e-12);
    }

    #[test]
    fn richardson_removes_polynomial_terms(a in -2.0f64..2.0, b in -2.0f64..2.0, d in -2.0f64..2.0) {
        let f = |eta: f64| Ok(identity(1) * c(a + b * eta + d * eta * eta, 0.0));
        let lim = richardson_limit(f, 0.1, 4).unwrap();
        prop_assert!((lim.value[(0, 0)] - c(a, 0.0)).norm() <= 1e-12);
    }
}
