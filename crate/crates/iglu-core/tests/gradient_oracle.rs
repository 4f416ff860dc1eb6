//! Finite-difference verification of every analytic derivative, using the
//! `gradcheck` module as the independent oracle.

use iglu_core::gates::{iglu_gate, iglu_gate_dsigma, iglu_gate_dx, Sharpness};
use iglu_core::gradcheck::{check_derivative, grid};
use iglu_core::Activation;

const TOL: f64 = 1e-6;

fn input_grid() -> Vec<f64> {
    grid(-20.0, 20.0, 401)
}

fn check_backward_x(act: Activation, points: &[f64], exclusions: &[(f64, f64)]) {
    let report =
        check_derivative(|x| act.eval(x), |x| act.deriv(x), points, TOL, exclusions).unwrap();
    assert!(
        report.passed,
        "{act}: max rel error {} at {}",
        report.max_rel_error, report.argmax_point
    );
}

#[test]
fn backward_x_matches_finite_differences() {
    let wide = input_grid();
    for s in [0.1, 1.0] {
        check_backward_x(Activation::Iglu { sigma: Sharpness::fixed(s) }, &wide, &[]);
        check_backward_x(Activation::IgluApprox { sigma: Sharpness::fixed(s) }, &wide, &[]);
    }
    // at sigma = 5 the exact gate's derivative falls below what central
    // differences can resolve beyond sigma*x ~ -25 (the analytic tail is
    // covered by gradient_never_exactly_zero tests); stay inside that range
    let narrow = grid(-5.0, 5.0, 401);
    check_backward_x(Activation::Iglu { sigma: Sharpness::fixed(5.0) }, &narrow, &[]);
    check_backward_x(Activation::IgluApprox { sigma: Sharpness::fixed(5.0) }, &wide, &[]);
    check_backward_x(Activation::GeluExact, &wide, &[]);
    check_backward_x(Activation::GeluTanh, &wide, &[]);
    check_backward_x(Activation::GeluA { a: 2.0 }, &wide, &[]);
    check_backward_x(Activation::Silu, &wide, &[]);
    check_backward_x(Activation::Mish, &wide, &[]);
    check_backward_x(Activation::Identity, &wide, &[]);
    check_backward_x(Activation::Relu, &wide, &[(0.0, 1e-4)]);
    check_backward_x(Activation::Hardswish, &wide, &[(-3.0, 1e-4), (3.0, 1e-4)]);
}

#[test]
fn gate_dx_matches_finite_differences() {
    for s in [0.1, 1.0, 5.0] {
        let sp = Sharpness::fixed(s);
        let report = check_derivative(
            move |x| iglu_gate(x, sp),
            move |x| iglu_gate_dx(x, sp),
            &input_grid(),
            TOL,
            &[],
        )
        .unwrap();
        assert!(report.passed, "sigma={s}: {}", report.max_rel_error);
    }
}

#[test]
fn gate_dsigma_matches_finite_differences() {
    // differentiate in sigma at fixed inputs, over a grid of sigma values
    let sigma_grid = grid(0.05, 6.0, 120);
    for &x in &[-3.0, -0.7, 0.0, 0.4, 2.0, 9.0] {
        let report = check_derivative(
            move |s| iglu_gate(x, Sharpness::fixed(s)),
            move |s| iglu_gate_dsigma(x, Sharpness::fixed(s)),
            &sigma_grid,
            TOL,
            &[],
        )
        .unwrap();
        assert!(report.passed, "x={x}: {}", report.max_rel_error);
    }
}

#[test]
fn backward_param_matches_finite_differences() {
    // learnable sigma: differentiate in the raw parameter
    let raw_grid = grid(-3.0, 3.0, 121);
    for &x in &[-4.0, -1.0, 0.5, 2.0, 7.5] {
        for approx in [false, true] {
            let report = check_derivative(
                move |raw| {
                    let sigma = Sharpness::from_raw(raw);
                    let act = if approx {
                        Activation::IgluApprox { sigma }
                    } else {
                        Activation::Iglu { sigma }
                    };
                    act.eval(x)
                },
                move |raw| {
                    let sigma = Sharpness::from_raw(raw);
                    let act = if approx {
                        Activation::IgluApprox { sigma }
                    } else {
                        Activation::Iglu { sigma }
                    };
                    act.param_deriv(x).unwrap()
                },
                &raw_grid,
                TOL,
                &[],
            )
            .unwrap();
            assert!(report.passed, "x={x} approx={approx}: {}", report.max_rel_error);
        }
    }

    // GELU_a: differentiate in a. Keep |a x| <= ~3.6: beyond that the
    // Gaussian gate's parameter derivative x^2 phi(a x) decays
    // super-exponentially below finite-difference resolution — the very
    // tail behavior the heavy-tailed gate above does not share.
    let a_grid = grid(0.05, 3.0, 100);
    for &x in &[-1.2, -0.5, 0.25, 1.0] {
        let report = check_derivative(
            move |a| Activation::GeluA { a }.eval(x),
            move |a| Activation::GeluA { a }.param_deriv(x).unwrap(),
            &a_grid,
            TOL,
            &[],
        )
        .unwrap();
        assert!(report.passed, "x={x}: {}", report.max_rel_error);
    }
}

#[test]
fn batched_backward_agrees_with_scalar_path() {
    let xs = input_grid();
    let act = Activation::Iglu { sigma: Sharpness::fixed(1.0) };
    let batched = act.backward_x(&xs).unwrap();
    for (&x, &d) in xs.iter().zip(&batched) {
        assert_eq!(d, act.deriv(x));
    }
}
