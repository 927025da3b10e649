//! Values frozen from the independent high-precision integration in
//! `oracles/closed_form_oracle.py` (no closed forms involved).

use gbdt_core::canonical::fundamental_solution;
use gbdt_core::closed_form::{example51_w, DiagonalGbdt, Example51};
use gbdt_core::gbdt::{evolve, transfer};
use gbdt_core::matrix::{c, frobenius, from_rows, re, CMatrix, I};

fn m2(e: [(f64, f64); 4]) -> CMatrix {
    from_rows(&[[c(e[0].0, e[0].1), c(e[1].0, e[1].1)], [c(e[2].0, e[2].1), c(e[3].0, e[3].1)]])
}

fn w_oracles() -> [(f64, gbdt_core::C64, CMatrix); 2] {
    [
        (
            1.0,
            c(0.0, 2.0),
            m2([
                (0.88842822434289512, -0.46364760900080612),
                (0.46364760900080612, -0.11157177565710488),
                (0.46364760900080612, -0.11157177565710488),
                (1.1115717756571049, 0.46364760900080612),
            ]),
        ),
        (
            0.5,
            c(-1.0, 0.5),
            m2([
                (0.65342640972002735, -0.14189705460416392),
                (0.14189705460416392, -0.34657359027997265),
                (0.14189705460416392, -0.34657359027997265),
                (1.3465735902799727, 0.14189705460416392),
            ]),
        ),
    ]
}

#[test]
fn fundamental_solution_matches_high_precision_values() {
    let sys = Example51::new(1.0).system();
    for (x, z, expected) in w_oracles() {
        let f = fundamental_solution(&sys, z, &[0.0, x], 1e-12).unwrap();
        assert!(frobenius(&(f.last() - &expected)) < 1e-10);
        assert!(frobenius(&(example51_w(x, z, 1.0).unwrap() - &expected)) < 1e-12);
    }
}

#[test]
fn scalar_transfer_functions_match_high_precision_values() {
    let sys = Example51::new(1.0).system();
    let p = DiagonalGbdt::new(vec![I], vec![re(1.0)], vec![re(0.0)]).unwrap().params().unwrap();
    assert!((p.s0[(0, 0)] - re(std::f64::consts::FRAC_PI_2)).norm() < 1e-14);
    let t = evolve(&p, &sys, &[0.0, 0.5, 1.0], 1e-12).unwrap();
    let e = transfer(&t, 0.5, c(0.0, 2.0)).unwrap();
    let w0 = m2([
        (0.9670715954122936, -1.9341431908245872),
        (1.6868839835330281, 0.84344199176651406),
        (1.7746302408323465, 0.88731512041617327),
        (-0.5670715954122936, 1.1341431908245872),
    ]);
    let wa = m2([
        (1.9012147862368808, -3.8847505839430276),
        (2.9520469711827992, 2.5303259752995422),
        (3.1056029214566065, 2.6619453612485198),
        (-2.7012147862368808, 1.4847505839430276),
    ]);
    let v = m2([(2.0, 1.917678988530734), (-2.1086049794162851, 0.0), (-2.2182878010404332, 0.0), (2.0, -1.917678988530734)]);
    assert!(frobenius(&(&e.w0 - w0)) < 1e-9);
    assert!(frobenius(&(&e.wa - wa)) < 1e-9);
    assert!(frobenius(&(&e.v - v)) < 1e-9);
    let beta_t = from_rows(&[[c(0.079756474996120328, -0.15951294999224066), c(0.55274079270844091, 0.27637039635422045)]]);
    assert!(frobenius(&(Example51::beta() * &e.w0 - beta_t)) < 1e-9);
}
