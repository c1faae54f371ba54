use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use nhgwp_core::{
    eval_b, potential_lha, LinearVectorPotential, NhgwpError, PolyTerm, PolynomialPotential,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cvec(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_row_slice(v)
}

#[test]
fn quadratic_expansion_is_exact() {
    // V = 1.5 - 0.3 x + 0.8 x^2 at complex center.
    let pot = PolynomialPotential::from_coeffs_1d(&[1.5, -0.3, 0.8]);
    let q = cvec(&[c(0.4, -0.7)]);
    let (v, grad, half_hess) = potential_lha(&pot, &q).unwrap();
    let x = q[0];
    assert!((v - (0.8 * x * x - 0.3 * x + 1.5)).norm() < 1e-14);
    assert!((grad[0] - (1.6 * x - 0.3)).norm() < 1e-14);
    assert!((half_hess[(0, 0)] - c(0.8, 0.0)).norm() < 1e-15);
}

#[test]
fn harmonic_curvature_matches_coherent_width() {
    // Half-Hessian of (1/2) m w^2 x^2 is m w^2 / 2, the coefficient whose
    // balance point is alpha = i m w / 2.
    let pot = PolynomialPotential::harmonic_1d(2.0, 3.0);
    let (_, _, half_hess) = potential_lha(&pot, &cvec(&[c(0.2, 0.1)])).unwrap();
    assert!((half_hess[(0, 0)] - c(9.0, 0.0)).norm() < 1e-14);
}

#[test]
fn real_center_reduces_to_real_evaluation() {
    let pot = PolynomialPotential::from_coeffs_1d(&[0.2, 0.0, 0.5, 0.0, 0.01]);
    let x = 1.3;
    let (v, _, _) = potential_lha(&pot, &cvec(&[c(x, 0.0)])).unwrap();
    let direct = pot.eval_real(&DVector::from_element(1, x)).unwrap();
    assert_eq!(v.im, 0.0);
    assert!((v.re - direct).abs() < 1e-14);
}

#[test]
fn coupled_2d_half_hessian() {
    let pot = PolynomialPotential::new(
        2,
        vec![
            PolyTerm { coeff: 0.5, powers: vec![2, 0] },
            PolyTerm { coeff: 0.45, powers: vec![0, 2] },
            PolyTerm { coeff: 0.3, powers: vec![1, 1] },
        ],
    )
    .unwrap();
    let q = cvec(&[c(0.3, -0.2), c(-0.5, 0.4)]);
    let (_, grad, hh) = potential_lha(&pot, &q).unwrap();
    assert!((hh[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    assert!((hh[(1, 1)] - c(0.45, 0.0)).norm() < 1e-15);
    assert!((hh[(0, 1)] - c(0.15, 0.0)).norm() < 1e-15);
    assert_eq!(hh[(0, 1)], hh[(1, 0)]);
    assert!((grad[0] - (q[0] + 0.3 * q[1])).norm() < 1e-14);
    assert!((grad[1] - (0.9 * q[1] + 0.3 * q[0])).norm() < 1e-14);
}

#[test]
fn local_expansion_error_is_third_order() {
    let pot = PolynomialPotential::from_coeffs_1d(&[0.0, 0.0, 0.5, 0.0, 0.01]);
    let q0 = 0.9;
    let (v, grad, hh) = potential_lha(&pot, &cvec(&[c(q0, 0.0)])).unwrap();
    let model_err = |delta: f64| -> f64 {
        let exact = pot.eval_real(&DVector::from_element(1, q0 + delta)).unwrap();
        let approx = v + grad[0] * delta + hh[(0, 0)] * delta * delta;
        (Complex64::new(exact, 0.0) - approx).norm()
    };
    let e1 = model_err(1e-2);
    let e2 = model_err(5e-3);
    let ratio = e1 / e2;
    assert!((6.5..9.5).contains(&ratio), "expansion error not O(d^3): ratio {ratio:.2}");
}

#[test]
fn dimension_mismatches_are_rejected() {
    let pot = PolynomialPotential::from_coeffs_1d(&[0.0, 1.0]);
    let q2 = cvec(&[c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(matches!(
        potential_lha(&pot, &q2),
        Err(NhgwpError::DimensionMismatch { expected: 1, got: 2 })
    ));
    let vp = LinearVectorPotential::constant_1d(1.0);
    assert!(matches!(
        eval_b(&vp, &q2),
        Err(NhgwpError::DimensionMismatch { expected: 1, got: 2 })
    ));
}

#[test]
fn linear_b_evaluation() {
    let vp = LinearVectorPotential::linear_1d(0.1, 1.0);
    let (b, b1) = eval_b(&vp, &cvec(&[c(-1.0 / 8.1, 0.0)])).unwrap();
    assert!((b[0].re - 0.987_654_320_987_654_3).abs() < 1e-14);
    assert_eq!(b[0].im, 0.0);
    assert_eq!(b1[0], 0.1);

    // Complex argument flows through the same affine map.
    let (bc, _) = eval_b(&vp, &cvec(&[c(0.5, -0.25)])).unwrap();
    assert!((bc[0] - c(1.05, -0.025)).norm() < 1e-15);
}

#[test]
fn constant_b_has_zero_slope_everywhere() {
    let vp = LinearVectorPotential::constant_1d(-2.5);
    assert!(vp.is_constant());
    assert!(!vp.is_zero());
    let (b, b1) = eval_b(&vp, &cvec(&[c(3.0, 1.0)])).unwrap();
    assert_eq!(b[0], c(-2.5, 0.0));
    assert_eq!(b1[0], 0.0);
}

proptest! {
    #[test]
    fn quadratics_have_no_expansion_error(
        a0 in -2.0..2.0f64,
        a1 in -2.0..2.0f64,
        a2 in -2.0..2.0f64,
        qre in -2.0..2.0f64,
        qim in -2.0..2.0f64,
        dre in -1.0..1.0f64,
        dim in -1.0..1.0f64,
    ) {
        let pot = PolynomialPotential::from_coeffs_1d(&[a0, a1, a2]);
        let q = cvec(&[c(qre, qim)]);
        let (v, grad, hh) = potential_lha(&pot, &q).unwrap();
        // The quadratic model reproduces the polynomial exactly at any
        // complex displacement.
        let delta = c(dre, dim);
        let x = q[0] + delta;
        let exact = a2 * x * x + a1 * x + a0;
        let approx = v + grad[0] * delta + hh[(0, 0)] * delta * delta;
        prop_assert!((exact - approx).norm() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences(
        coeff3 in -0.5..0.5f64,
        coeff4 in -0.1..0.1f64,
        q0 in -1.5..1.5f64,
    ) {
        let pot = PolynomialPotential::from_coeffs_1d(&[0.0, 0.3, 0.5, coeff3, coeff4]);
        let (_, grad, _) = potential_lha(&pot, &cvec(&[c(q0, 0.0)])).unwrap();
        let h = 1e-5;
        let vp = pot.eval_real(&DVector::from_element(1, q0 + h)).unwrap();
        let vm = pot.eval_real(&DVector::from_element(1, q0 - h)).unwrap();
        let fd = (vp - vm) / (2.0 * h);
        prop_assert!((grad[0].re - fd).abs() < 1e-7);
        prop_assert_eq!(grad[0].im, 0.0);
    }
}
