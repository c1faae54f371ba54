use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NhgwpError, Result};
use crate::model::{eval_b, potential_lha, ModelSpec, WavepacketState};

/// Time derivative of every wavepacket parameter.
#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub dq: DVector<Complex64>,
    pub dp: DVector<Complex64>,
    pub dalpha: DMatrix<Complex64>,
    pub dgamma: Complex64,
}

/// Sampled propagation history. The first sample is the initial state and
/// sample times are strictly increasing.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<WavepacketState>,
    pub model: ModelSpec,
    pub dt: f64,
    pub sample_stride: usize,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Equations of motion:
///   dq_j = (p_j + i b_j) / m_j
///   dp_j = -dV/dx_j - (i b'_j / m_j)(p_j + i b_j)
///   dalpha = -[ V2 - diag(b'_j^2 / 2 m_j) + {2 i alpha b'/m}_sym + 2 alpha M^-1 alpha ]
///   dgamma = sum_j p_j^2 / 2 m_j - V + i hbar sum_j alpha_jj / m_j
///            + sum_j (b_j^2 - 2 hbar b'_j) / 2 m_j
/// with V2 half the Hessian. The b'/m width term is symmetrized as
/// i alpha_kl (b'_k/m_k + b'_l/m_l) so alpha stays symmetric; in 1D this is
/// the unmodified equation.
pub fn rhs(state: &WavepacketState, model: &ModelSpec) -> Result<StateDerivative> {
    let d = state.dim();
    let (v, grad, half_hess) = potential_lha(&model.potential, &state.q)?;
    let (b, b1) = eval_b(&model.vecpot, &state.q)?;

    // c_j = p_j + i b_j appears in every equation.
    let c = DVector::from_iterator(d, (0..d).map(|j| state.p[j] + I * b[j]));

    let dq = DVector::from_iterator(d, (0..d).map(|j| c[j] / model.masses[j]));
    let dp = DVector::from_iterator(
        d,
        (0..d).map(|j| -grad[j] - I * b1[j] / model.masses[j] * c[j]),
    );

    let mut dalpha = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    // 2 alpha M^-1 alpha.
    let am = {
        let mut am = state.alpha.clone();
        for l in 0..d {
            for k in 0..d {
                am[(k, l)] /= model.masses[l];
            }
        }
        &am * &state.alpha
    };
    for k in 0..d {
        for l in 0..d {
            let mut term = half_hess[(k, l)] + 2.0 * am[(k, l)];
            term += I * state.alpha[(k, l)]
                * (b1[k] / model.masses[k] + b1[l] / model.masses[l]);
            if k == l {
                term -= b1[k] * b1[k] / (2.0 * model.masses[k]);
            }
            dalpha[(k, l)] = -term;
        }
    }

    let mut dgamma = -v;
    for j in 0..d {
        let mj = model.masses[j];
        dgamma += state.p[j] * state.p[j] / (2.0 * mj);
        dgamma += I * model.hbar * state.alpha[(j, j)] / mj;
        dgamma += (b[j] * b[j] - 2.0 * model.hbar * b1[j]) / (2.0 * mj);
    }

    Ok(StateDerivative { dq, dp, dalpha, dgamma })
}

fn add_scaled(state: &WavepacketState, deriv: &StateDerivative, h: f64) -> WavepacketState {
    let mut out = state.clone();
    out.q += deriv.dq.map(|z| z * h);
    out.p += deriv.dp.map(|z| z * h);
    out.alpha += deriv.dalpha.map(|z| z * h);
    out.gamma += deriv.dgamma * h;
    out.t += h;
    out
}

/// One classical RK4 step over the full complex parameter set. alpha is
/// re-symmetrized afterwards and Im(alpha) must stay positive definite.
pub fn step_rk4(state: &WavepacketState, model: &ModelSpec, dt: f64) -> Result<WavepacketState> {
    let k1 = rhs(state, model)?;
    let s2 = add_scaled(state, &k1, 0.5 * dt);
    let k2 = rhs(&s2, model)?;
    let s3 = add_scaled(state, &k2, 0.5 * dt);
    let k3 = rhs(&s3, model)?;
    let s4 = add_scaled(state, &k3, dt);
    let k4 = rhs(&s4, model)?;

    let mut out = state.clone();
    let w = dt / 6.0;
    let d = state.dim();
    for j in 0..d {
        out.q[j] += w * (k1.dq[j] + 2.0 * k2.dq[j] + 2.0 * k3.dq[j] + k4.dq[j]);
        out.p[j] += w * (k1.dp[j] + 2.0 * k2.dp[j] + 2.0 * k3.dp[j] + k4.dp[j]);
    }
    for k in 0..d {
        for l in 0..d {
            out.alpha[(k, l)] += w
                * (k1.dalpha[(k, l)]
                    + 2.0 * k2.dalpha[(k, l)]
                    + 2.0 * k3.dalpha[(k, l)]
                    + k4.dalpha[(k, l)]);
        }
    }
    out.gamma += w * (k1.dgamma + 2.0 * k2.dgamma + 2.0 * k3.dgamma + k4.dgamma);
    out.t += dt;
    out.symmetrize_alpha();
    out.check_im_alpha_pd()?;
    Ok(out)
}

/// Fixed-step propagation from t=0 to t_final; the last step is shortened
/// so the trajectory lands exactly on t_final. Samples are recorded every
/// sample_stride steps, plus the initial and final states.
pub fn propagate(
    state0: &WavepacketState,
    model: &ModelSpec,
    t_final: f64,
    dt: f64,
    sample_stride: usize,
) -> Result<Trajectory> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(NhgwpError::PreconditionViolation(format!(
            "propagation needs t_final > 0 and dt > 0, got t_final {t_final}, dt {dt}"
        )));
    }
    let stride = sample_stride.max(1);
    let mut samples = vec![state0.clone()];
    let mut state = state0.clone();

    // Full steps land on exact multiples of dt; any remainder becomes one
    // shorter landing step so the trajectory ends exactly at t_final.
    let ratio = t_final / dt;
    let n_full = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    for step in 1..=n_full {
        state = step_rk4(&state, model, dt)?;
        state.t = step as f64 * dt;
        if step % stride == 0 && state.t < t_final {
            samples.push(state.clone());
        }
    }
    let remainder = t_final - n_full as f64 * dt;
    if remainder > 1e-12 * t_final.max(1.0) {
        state = step_rk4(&state, model, remainder)?;
    }
    state.t = t_final;
    samples.push(state);
    Ok(Trajectory { samples, model: model.clone(), dt, sample_stride: stride })
}

/// Residual of the first-order consistency identity connecting the center
/// and momentum derivatives,
///   [2 alpha dq - dp] - [V1 - b b'/m + 2 alpha M^-1 (p + i b) + i p b'/m],
/// which vanishes identically when dq, dp come from the classical equations.
pub fn eom1_residual(
    state: &WavepacketState,
    deriv: &StateDerivative,
    model: &ModelSpec,
) -> Result<DVector<Complex64>> {
    let d = state.dim();
    let (_, grad, _) = potential_lha(&model.potential, &state.q)?;
    let (b, b1) = eval_b(&model.vecpot, &state.q)?;

    let lhs = {
        let adq = &state.alpha * &deriv.dq;
        DVector::from_iterator(d, (0..d).map(|j| 2.0 * adq[j] - deriv.dp[j]))
    };

    let c = DVector::from_iterator(
        d,
        (0..d).map(|k| (state.p[k] + I * b[k]) / model.masses[k]),
    );
    let ac = &state.alpha * &c;
    let rhs_vec = DVector::from_iterator(
        d,
        (0..d).map(|j| {
            grad[j] - b[j] * b1[j] / model.masses[j]
                + 2.0 * ac[j]
                + I * state.p[j] * b1[j] / model.masses[j]
        }),
    );

    Ok(lhs - rhs_vec)
}
