use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NhgwpError, Result};
use crate::model::{eval_b, ModelSpec, WavepacketState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for reality assertions on transformed trajectories (integrator
/// roundoff accumulates); violations are errors, not silent truncations.
const REALITY_TOL: f64 = 1e-10;

/// Tolerance for the imaginary residue of the real-center formulas, which
/// cancel analytically.
const RESIDUE_TOL: f64 = 1e-12;

/// Physically observable phase-space center of the packet; strictly real.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPhasePoint {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

fn im_alpha_inverse(state: &WavepacketState) -> Result<DMatrix<f64>> {
    let im = state.im_alpha();
    if nalgebra::Cholesky::new(im.clone()).is_none() {
        return Err(NhgwpError::NonNormalizable { t: state.t });
    }
    im.try_inverse()
        .ok_or(NhgwpError::NonNormalizable { t: state.t })
}

/// Real phase-space center of an arbitrary complex-parameter packet:
///   Q = Re q + (Im alpha)^-1 (Re alpha Im q - Im p / 2)
///   P = Re(p + 2 alpha (Q - q))
/// The imaginary part of the momentum expression cancels analytically; its
/// numerical residue is asserted below RESIDUE_TOL and discarded.
pub fn to_real_phase_space(state: &WavepacketState) -> Result<RealPhasePoint> {
    let d = state.dim();
    let im_inv = im_alpha_inverse(state)?;

    let rhs = DVector::from_iterator(
        d,
        (0..d).map(|j| {
            let mut acc = -0.5 * state.p[j].im;
            for l in 0..d {
                acc += state.alpha[(j, l)].re * state.q[l].im;
            }
            acc
        }),
    );
    let corr = &im_inv * rhs;
    let q_center = DVector::from_iterator(d, (0..d).map(|j| state.q[j].re + corr[j]));

    let delta = DVector::from_iterator(
        d,
        (0..d).map(|j| Complex64::new(q_center[j], 0.0) - state.q[j]),
    );
    let p_complex = &state.p + (&state.alpha * delta).map(|z| 2.0 * z);
    let residue = p_complex.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > RESIDUE_TOL {
        return Err(NhgwpError::PreconditionViolation(format!(
            "imaginary residue {residue:.3e} of the real-momentum formula exceeds {RESIDUE_TOL:.0e}"
        )));
    }
    let p_center = p_complex.map(|z| z.re);
    Ok(RealPhasePoint { q: q_center, p: p_center })
}

/// Move the packet to an equivalent representation with momentum new_p.
/// The center moves to q + alpha^-1 (new_p - p) / 2 and gamma is adjusted
/// from the invariant gamma + q.alpha.q - p.q; the represented wavefunction
/// is unchanged pointwise.
pub fn shift_representation(
    state: &WavepacketState,
    new_p: &DVector<Complex64>,
) -> Result<WavepacketState> {
    let d = state.dim();
    if new_p.len() != d {
        return Err(NhgwpError::DimensionMismatch { expected: d, got: new_p.len() });
    }
    let alpha_inv = state.alpha.clone().try_inverse().ok_or_else(|| {
        NhgwpError::SingularTransform("alpha is singular; cannot shift representation".into())
    })?;

    let dp = new_p - &state.p;
    let new_q = &state.q + (alpha_inv * dp).map(|z| 0.5 * z);

    let quad = |q: &DVector<Complex64>, p: &DVector<Complex64>| {
        let aq = &state.alpha * q;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            acc += q[j] * aq[j] - p[j] * q[j];
        }
        acc
    };
    let gamma_shift = quad(&state.q, &state.p) - quad(&new_q, new_p);
    let new_gamma = state.gamma + gamma_shift;

    let mut out = state.clone();
    out.q = new_q;
    out.p = new_p.clone();
    out.gamma = new_gamma;
    Ok(out)
}

fn require_real_vec(v: &DVector<Complex64>, what: &str) -> Result<()> {
    let worst = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst > RESIDUE_TOL {
        return Err(NhgwpError::PreconditionViolation(format!(
            "{what} must be real (|Im| = {worst:.3e})"
        )));
    }
    Ok(())
}

fn require_imaginary_alpha(state: &WavepacketState) -> Result<()> {
    let worst = state.alpha.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if worst > RESIDUE_TOL {
        return Err(NhgwpError::PreconditionViolation(format!(
            "initial alpha must be purely imaginary (|Re| = {worst:.3e})"
        )));
    }
    Ok(())
}

/// Truncate the (asserted tiny) imaginary part of the transformed center so
/// the guiding position is exactly real going forward.
fn realify_q(state: &mut WavepacketState) -> Result<()> {
    let worst = state.q.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst > REALITY_TOL {
        return Err(NhgwpError::PreconditionViolation(format!(
            "transformed center is not real (|Im q| = {worst:.3e})"
        )));
    }
    state.q = state.q.map(|z| Complex64::new(z.re, 0.0));
    Ok(())
}

/// Guiding initial conditions for constant b = k: shift the momentum
/// representation to p - i k. The resulting center is real and the initial
/// velocity is the real p/m; the trajectory of the shifted packet then
/// stays in real configuration space.
pub fn guiding_ic_constant(state0: &WavepacketState, model: &ModelSpec) -> Result<WavepacketState> {
    if !model.vecpot.is_constant() {
        return Err(NhgwpError::PreconditionViolation(
            "constant-b guiding transform requires zero slope".into(),
        ));
    }
    require_real_vec(&state0.q, "initial q")?;
    require_real_vec(&state0.p, "initial p")?;
    require_imaginary_alpha(state0)?;

    let d = state0.dim();
    let new_p = DVector::from_iterator(
        d,
        (0..d).map(|j| state0.p[j] - I * model.vecpot.offset[j]),
    );
    let mut out = shift_representation(state0, &new_p)?;
    realify_q(&mut out)?;

    // Initial velocity (p~ + i b)/m has imaginary part (Im p~ + k)/m = 0.
    let (b, _) = eval_b(&model.vecpot, &out.q)?;
    let v_im = (0..d)
        .map(|j| (out.p[j].im + b[j].re).abs())
        .fold(0.0, f64::max);
    if v_im > REALITY_TOL {
        return Err(NhgwpError::PreconditionViolation(format!(
            "guiding velocity is not real (|Im v| = {v_im:.3e})"
        )));
    }
    Ok(out)
}

/// Guiding initial conditions for separable linear b_j = k_j x_j + c_j with
/// diagonal purely-imaginary alpha(0):
///   q~(0) = (2 Im alpha0 + K)^-1 (2 Im alpha0 q(0) - c)
///   p~(0) = p(0) - 2 alpha0 (2 Im alpha0 + K)^-1 b(q(0))
/// which is the unique representation shift that makes the initial velocity
/// real. Reduces to the constant-b transform when K = 0.
pub fn guiding_ic_linear(state0: &WavepacketState, model: &ModelSpec) -> Result<WavepacketState> {
    require_real_vec(&state0.q, "initial q")?;
    require_real_vec(&state0.p, "initial p")?;
    require_imaginary_alpha(state0)?;
    let d = state0.dim();
    for k in 0..d {
        for l in 0..d {
            if k != l && state0.alpha[(k, l)].norm() > RESIDUE_TOL {
                return Err(NhgwpError::PreconditionViolation(
                    "linear-b guiding transform requires diagonal alpha(0)".into(),
                ));
            }
        }
    }

    // A = 2 Im alpha0 + K, diagonal and real.
    let scale: f64 = (0..d)
        .map(|j| 2.0 * state0.alpha[(j, j)].im.abs() + model.vecpot.slope[j].abs())
        .fold(0.0, f64::max);
    let mut a_inv = DVector::zeros(d);
    for j in 0..d {
        let a_jj = 2.0 * state0.alpha[(j, j)].im + model.vecpot.slope[j];
        if a_jj.abs() <= 1e-12 * scale.max(1.0) {
            return Err(NhgwpError::SingularTransform(format!(
                "2 Im alpha0 + K vanishes on coordinate {j} (slope k = -2 Im alpha0)"
            )));
        }
        a_inv[j] = 1.0 / a_jj;
    }

    let (b0, _) = eval_b(&model.vecpot, &state0.q)?;
    let new_p = DVector::from_iterator(
        d,
        (0..d).map(|j| state0.p[j] - 2.0 * state0.alpha[(j, j)] * a_inv[j] * b0[j]),
    );
    let mut out = shift_representation(state0, &new_p)?;
    realify_q(&mut out)?;

    let (b, _) = eval_b(&model.vecpot, &out.q)?;
    let v_im = (0..d)
        .map(|j| (out.p[j].im + b[j].re).abs())
        .fold(0.0, f64::max);
    if v_im > REALITY_TOL {
        return Err(NhgwpError::PreconditionViolation(format!(
            "guiding velocity is not real (|Im v| = {v_im:.3e})"
        )));
    }
    Ok(out)
}

/// Real center from the guiding trajectory, constant b = k:
///   Q = q~ + (Im alpha)^-1 k / 2
///   P = m v + Re alpha (Im alpha)^-1 k
/// All-real arithmetic; no imaginary residue arises.
pub fn compute_real_center_constant(
    guiding_q: &DVector<f64>,
    guiding_v: &DVector<f64>,
    alpha_t: &DMatrix<Complex64>,
    model: &ModelSpec,
) -> Result<RealPhasePoint> {
    if !model.vecpot.is_constant() {
        return Err(NhgwpError::PreconditionViolation(
            "real-center-from-guiding formula requires constant b".into(),
        ));
    }
    let d = guiding_q.len();
    let im = alpha_t.map(|z| z.im);
    if nalgebra::Cholesky::new(im.clone()).is_none() {
        return Err(NhgwpError::NonNormalizable { t: f64::NAN });
    }
    let im_inv = im.try_inverse().ok_or(NhgwpError::NonNormalizable { t: f64::NAN })?;
    let re = alpha_t.map(|z| z.re);

    let w = &im_inv * &model.vecpot.offset;
    let q_center = DVector::from_iterator(d, (0..d).map(|j| guiding_q[j] + 0.5 * w[j]));
    let rw = &re * &w;
    let p_center = DVector::from_iterator(
        d,
        (0..d).map(|j| model.masses[j] * guiding_v[j] + rw[j]),
    );
    Ok(RealPhasePoint { q: q_center, p: p_center })
}
