use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use nhgwp_core::{
    compute_real_center_constant, evaluate_wavepacket, guiding_ic_constant, guiding_ic_linear,
    propagate, shift_representation, to_real_phase_space, Grid1D, LinearVectorPotential,
    ModelSpec, NhgwpError, PolynomialPotential, WavepacketState, DEFAULT_EXP_CAP,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state_1d(alpha: Complex64, q: Complex64, p: Complex64, gamma: Complex64) -> WavepacketState {
    WavepacketState::new_1d(alpha, q, p, gamma).unwrap()
}

fn free_model(k: f64) -> ModelSpec {
    ModelSpec::new_1d(1.0, 1.0, PolynomialPotential::zero(1), LinearVectorPotential::constant_1d(k))
}

fn linear_model(slope: f64, offset: f64) -> ModelSpec {
    ModelSpec::new_1d(
        1.0,
        1.0,
        PolynomialPotential::zero(1),
        LinearVectorPotential::linear_1d(slope, offset),
    )
}

#[test]
fn real_inputs_are_their_own_center() {
    let state = state_1d(c(0.7, 2.5), c(0.4, 0.0), c(-1.3, 0.0), c(0.0, 0.0));
    let center = to_real_phase_space(&state).unwrap();
    assert_eq!(center.q[0], 0.4);
    assert_eq!(center.p[0], -1.3);
}

#[test]
fn imaginary_momentum_shifts_the_center() {
    // alpha = 4i, q = 0, p = -i: Q = (1/4)(1/2) = 1/8, P = 0.
    let state = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0));
    let center = to_real_phase_space(&state).unwrap();
    assert!((center.q[0] - 0.125).abs() < 1e-15);
    assert!(center.p[0].abs() < 1e-15);
}

#[test]
fn center_formulas_agree_at_t_zero() {
    let state = state_1d(c(0.0, 4.0), c(-0.125, 0.0), c(0.0, -1.0), c(0.0, 0.0));
    let center = to_real_phase_space(&state).unwrap();
    assert!(center.q[0].abs() < 1e-15);
    assert!(center.p[0].abs() < 1e-15);

    let model = free_model(1.0);
    let from_guiding = compute_real_center_constant(
        &DVector::from_element(1, -0.125),
        &DVector::from_element(1, 0.0),
        &DMatrix::from_element(1, 1, c(0.0, 4.0)),
        &model,
    )
    .unwrap();
    assert!((from_guiding.q[0] - center.q[0]).abs() < 1e-15);
    assert!((from_guiding.p[0] - center.p[0]).abs() < 1e-15);
}

#[test]
fn shift_to_same_momentum_is_identity() {
    let state = state_1d(c(0.3, 2.0), c(0.4, -0.2), c(-0.6, 0.5), c(0.1, 0.3));
    let out = shift_representation(&state, &state.p.clone()).unwrap();
    assert_eq!(out.q, state.q);
    assert_eq!(out.p, state.p);
    assert_eq!(out.gamma, state.gamma);
}

#[test]
fn shift_moves_center_and_adjusts_gamma() {
    let state = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let out = shift_representation(&state, &DVector::from_element(1, c(0.0, -1.0))).unwrap();
    assert!((out.q[0] - c(-0.125, 0.0)).norm() < 1e-15);
    assert!((out.gamma - c(0.0, 1.0 / 16.0)).norm() < 1e-15);

    // Both equivalence invariants are preserved.
    let inv1 = |s: &WavepacketState| -2.0 * s.alpha[(0, 0)] * s.q[0] + s.p[0];
    let inv2 = |s: &WavepacketState| s.gamma + s.alpha[(0, 0)] * s.q[0] * s.q[0] - s.p[0] * s.q[0];
    assert!((inv1(&state) - inv1(&out)).norm() < 1e-15);
    assert!((inv2(&state) - inv2(&out)).norm() < 1e-15);
}

#[test]
fn shift_is_invisible_on_the_grid() {
    let state = state_1d(c(0.2, 4.0), c(0.3, 0.0), c(-1.0, 0.0), c(0.0, 0.2));
    let shifted = shift_representation(&state, &DVector::from_element(1, c(-1.0, 0.7))).unwrap();
    let grid = Grid1D::new(1024, 20.0, 0.0).unwrap();
    let f1 = evaluate_wavepacket(&state, &grid, 1.0, DEFAULT_EXP_CAP).unwrap();
    let f2 = evaluate_wavepacket(&shifted, &grid, 1.0, DEFAULT_EXP_CAP).unwrap();
    let worst = f1
        .values
        .iter()
        .zip(&f2.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12, "pointwise deviation {worst:.3e}");
}

#[test]
fn constant_b_guiding_ics() {
    let model = free_model(1.0);
    for (p0, want_p) in [(0.0, c(0.0, -1.0)), (-10.0, c(-10.0, -1.0))] {
        let state0 = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(p0, 0.0), c(0.0, 0.0));
        let out = guiding_ic_constant(&state0, &model).unwrap();
        assert!((out.q[0] - c(-0.125, 0.0)).norm() < 1e-15);
        assert_eq!(out.q[0].im, 0.0);
        assert!((out.p[0] - want_p).norm() < 1e-15);
    }
}

#[test]
fn zero_k_guiding_is_identity() {
    let model = free_model(0.0);
    let state0 = state_1d(c(0.0, 4.0), c(0.3, 0.0), c(-0.7, 0.0), c(0.1, 0.2));
    let out = guiding_ic_constant(&state0, &model).unwrap();
    assert_eq!(out.q, state0.q);
    assert_eq!(out.p, state0.p);
    assert_eq!(out.gamma, state0.gamma);
}

#[test]
fn guiding_preconditions_are_enforced() {
    let model = free_model(1.0);
    let complex_q = state_1d(c(0.0, 4.0), c(0.0, 0.1), c(0.0, 0.0), c(0.0, 0.0));
    assert!(matches!(
        guiding_ic_constant(&complex_q, &model),
        Err(NhgwpError::PreconditionViolation(_))
    ));
    let tilted_alpha = state_1d(c(0.5, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    assert!(matches!(
        guiding_ic_constant(&tilted_alpha, &model),
        Err(NhgwpError::PreconditionViolation(_))
    ));
    let sloped = linear_model(0.1, 1.0);
    let fine = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    assert!(matches!(
        guiding_ic_constant(&fine, &sloped),
        Err(NhgwpError::PreconditionViolation(_))
    ));
}

#[test]
fn linear_b_guiding_matches_hand_values() {
    // b(x) = 0.1 x + 1.0, alpha0 = 4i: q~(0) = -1/8.1, p~(0) = -(8/8.1) i.
    let model = linear_model(0.1, 1.0);
    let state0 = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let out = guiding_ic_linear(&state0, &model).unwrap();
    assert!((out.q[0].re + 1.0 / 8.1).abs() < 1e-14);
    assert_eq!(out.q[0].im, 0.0);
    assert!((out.p[0] - c(0.0, -8.0 / 8.1)).norm() < 1e-14);
    // Velocity (p~ + i b(q~))/m is real: Im p~ = -b(q~).
    let b_at = 0.1 * out.q[0].re + 1.0;
    assert!((out.p[0].im + b_at).abs() < 1e-14);
}

#[test]
fn linear_b_guiding_reduces_to_constant() {
    let const_model = free_model(1.0);
    let slope0_model = linear_model(0.0, 1.0);
    let state0 = state_1d(c(0.0, 4.0), c(0.2, 0.0), c(-0.5, 0.0), c(0.0, 0.0));
    let a = guiding_ic_constant(&state0, &const_model).unwrap();
    let b = guiding_ic_linear(&state0, &slope0_model).unwrap();
    assert!((a.q[0] - b.q[0]).norm() < 1e-15);
    assert!((a.p[0] - b.p[0]).norm() < 1e-15);
    assert!((a.gamma - b.gamma).norm() < 1e-15);
}

#[test]
fn critical_slope_is_singular() {
    // slope = -2 Im alpha0 makes the shift diverge.
    let model = linear_model(-8.0, 1.0);
    let state0 = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    assert!(matches!(
        guiding_ic_linear(&state0, &model),
        Err(NhgwpError::SingularTransform(_))
    ));
}

#[test]
fn linear_b_guiding_rejects_off_diagonal_alpha() {
    let potential = PolynomialPotential::zero(2);
    let vecpot = LinearVectorPotential::new(
        DVector::from_vec(vec![0.1, 0.2]),
        DVector::from_vec(vec![1.0, 0.5]),
    )
    .unwrap();
    let model = ModelSpec::new(DVector::from_vec(vec![1.0, 1.0]), 1.0, potential, vecpot).unwrap();
    let alpha = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.2), c(0.0, 0.2), c(0.0, 1.0)]);
    let state = WavepacketState::new(
        alpha,
        DVector::from_element(2, c(0.0, 0.0)),
        DVector::from_element(2, c(0.0, 0.0)),
        c(0.0, 0.0),
        0.0,
    )
    .unwrap();
    assert!(matches!(
        guiding_ic_linear(&state, &model),
        Err(NhgwpError::PreconditionViolation(_))
    ));
}

#[test]
fn free_particle_center_from_either_representation() {
    // Propagate the plain complex-center run and the guided run of the same
    // packet; the two real-center recipes must agree along the way.
    let model = free_model(1.0);
    let state0 = state_1d(c(0.0, 4.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let plain = propagate(&state0, &model, 1.0, 1e-3, 10).unwrap();
    let guided0 = guiding_ic_constant(&state0, &model).unwrap();
    let guided = propagate(&guided0, &model, 1.0, 1e-3, 10).unwrap();

    assert_eq!(plain.samples.len(), guided.samples.len());
    for (a, b) in plain.samples.iter().zip(&guided.samples) {
        let direct = to_real_phase_space(a).unwrap();
        let v = (b.p[0] + c(0.0, 1.0)).re / 1.0;
        let from_guiding = compute_real_center_constant(
            &DVector::from_element(1, b.q[0].re),
            &DVector::from_element(1, v),
            &b.alpha,
            &model,
        )
        .unwrap();
        assert!((direct.q[0] - from_guiding.q[0]).abs() < 1e-10);
        assert!((direct.p[0] - from_guiding.p[0]).abs() < 1e-10);
        // Guided center stays real and the width relation pins Q - q~.
        assert!(b.q[0].im.abs() < 1e-10);
        let width_offset = 0.5 / b.alpha[(0, 0)].im;
        assert!((direct.q[0] - b.q[0].re - width_offset).abs() < 1e-10);
    }

    // t=1 closed forms: Q = 8, P = 8, alpha = (32 + 4i)/65.
    let last = plain.samples.last().unwrap();
    let center = to_real_phase_space(last).unwrap();
    assert!((center.q[0] - 8.0).abs() < 1e-8);
    assert!((center.p[0] - 8.0).abs() < 1e-8);
}

#[test]
fn zero_k_center_recipe_is_plain_newton() {
    let model = free_model(0.0);
    let center = compute_real_center_constant(
        &DVector::from_element(1, 0.4),
        &DVector::from_element(1, -0.7),
        &DMatrix::from_element(1, 1, c(0.3, 2.0)),
        &model,
    )
    .unwrap();
    assert_eq!(center.q[0], 0.4);
    assert_eq!(center.p[0], -0.7);
}

proptest! {
    #[test]
    fn representation_shift_preserves_invariants(
        are in -3.0..3.0f64,
        aim in 0.2..5.0f64,
        qre in -2.0..2.0f64,
        qim in -2.0..2.0f64,
        pre in -2.0..2.0f64,
        pim in -2.0..2.0f64,
        npre in -2.0..2.0f64,
        npim in -2.0..2.0f64,
    ) {
        let state = state_1d(c(are, aim), c(qre, qim), c(pre, pim), c(0.1, -0.2));
        let new_p = DVector::from_element(1, c(npre, npim));
        let out = shift_representation(&state, &new_p).unwrap();

        let inv1 = |s: &WavepacketState| -2.0 * s.alpha[(0,0)] * s.q[0] + s.p[0];
        let inv2 = |s: &WavepacketState| s.gamma + s.alpha[(0,0)] * s.q[0] * s.q[0] - s.p[0] * s.q[0];
        prop_assert!((inv1(&state) - inv1(&out)).norm() < 1e-12);
        prop_assert!((inv2(&state) - inv2(&out)).norm() < 1e-12);

        // Shifting back returns the original packet parameters.
        let back = shift_representation(&out, &state.p.clone()).unwrap();
        prop_assert!((back.q[0] - state.q[0]).norm() < 1e-12);
        prop_assert!((back.gamma - state.gamma).norm() < 1e-12);
    }

    #[test]
    fn real_center_of_random_real_packets_is_trivial(
        are in -3.0..3.0f64,
        aim in 0.2..5.0f64,
        q in -2.0..2.0f64,
        p in -2.0..2.0f64,
    ) {
        let state = state_1d(c(are, aim), c(q, 0.0), c(p, 0.0), c(0.0, 0.0));
        let center = to_real_phase_space(&state).unwrap();
        prop_assert_eq!(center.q[0], q);
        prop_assert_eq!(center.p[0], p);
    }

    #[test]
    fn guiding_transform_is_invisible_on_the_grid(
        aim in 0.5..5.0f64,
        q0 in -1.0..1.0f64,
        p0 in -1.0..1.0f64,
        k in -2.0..2.0f64,
    ) {
        let model = free_model(k);
        let state0 = state_1d(c(0.0, aim), c(q0, 0.0), c(p0, 0.0), c(0.0, 0.0));
        let guided = guiding_ic_constant(&state0, &model).unwrap();
        let grid = Grid1D::new(256, 20.0, 0.0).unwrap();
        let f1 = evaluate_wavepacket(&state0, &grid, 1.0, DEFAULT_EXP_CAP).unwrap();
        let f2 = evaluate_wavepacket(&guided, &grid, 1.0, DEFAULT_EXP_CAP).unwrap();
        for (a, b) in f1.values.iter().zip(&f2.values) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_preserves_invariants_in_2d(
        qre in -1.0..1.0f64,
        qim in -1.0..1.0f64,
        p0 in -1.0..1.0f64,
        p1 in -1.0..1.0f64,
        np0 in -1.0..1.0f64,
        np1 in -1.0..1.0f64,
    ) {
        let alpha = DMatrix::from_row_slice(2, 2, &[
            c(0.2, 1.3), c(-0.1, 0.15),
            c(-0.1, 0.15), c(0.4, 0.9),
        ]);
        let q = DVector::from_vec(vec![c(qre, qim), c(-qim, 0.3)]);
        let p = DVector::from_vec(vec![c(p0, 0.2), c(p1, -0.4)]);
        let state = WavepacketState::new(alpha, q, p, c(0.05, -0.15), 0.0).unwrap();
        let new_p = DVector::from_vec(vec![c(np0, 0.1), c(np1, -0.3)]);
        let out = shift_representation(&state, &new_p).unwrap();

        // -2 alpha q + p, componentwise.
        let lin = |s: &WavepacketState| {
            let aq = &s.alpha * &s.q;
            DVector::from_iterator(2, (0..2).map(|j| -2.0 * aq[j] + s.p[j]))
        };
        let quad = |s: &WavepacketState| {
            let aq = &s.alpha * &s.q;
            let mut acc = s.gamma;
            for j in 0..2 {
                acc += s.q[j] * aq[j] - s.p[j] * s.q[j];
            }
            acc
        };
        let l1 = lin(&state);
        let l2 = lin(&out);
        for j in 0..2 {
            prop_assert!((l1[j] - l2[j]).norm() < 1e-12);
        }
        prop_assert!((quad(&state) - quad(&out)).norm() < 1e-12);
    }
}
