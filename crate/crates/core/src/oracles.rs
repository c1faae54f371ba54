use num_complex::Complex64;

use crate::error::{NhgwpError, Result};

/// Closed-form scenario selector for the constant-b oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleScenario {
    FreeParticle,
    /// V(x) = beta x.
    LinearRamp { beta: f64 },
    /// V(x) = (1/2) m omega^2 x^2, omega > 0.
    Harmonic { omega: f64 },
}

/// Parameters of the 1D constant-b closed forms. sigma0_sq is the initial
/// squared amplitude width, sigma0_sq = hbar / (2 Im alpha0).
#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub m: f64,
    pub hbar: f64,
    pub k: f64,
    pub sigma0_sq: f64,
    pub q0: f64,
    pub p0: f64,
    pub scenario: OracleScenario,
}

impl OracleParams {
    pub fn alpha0(&self) -> Complex64 {
        Complex64::new(0.0, 0.5 * self.hbar / self.sigma0_sq)
    }

    /// Guided initial position: the representation shift p -> p - ik moves
    /// q to q0 - sigma0^2 k / hbar.
    pub fn qtilde0(&self) -> f64 {
        self.q0 - self.sigma0_sq * self.k / self.hbar
    }
}

/// Free particle (V = 0), constant b = k.
/// Returns (qtilde, alpha, Q, P) at time t.
pub fn free_particle(params: &OracleParams, t: f64) -> Result<(f64, Complex64, f64, f64)> {
    if params.scenario != OracleScenario::FreeParticle {
        return Err(NhgwpError::PreconditionViolation(
            "free_particle oracle called with a non-free scenario".into(),
        ));
    }
    let qtilde = params.qtilde0() + params.p0 * t / params.m;
    let alpha = free_alpha(params, t);
    let q_center = params.q0
        + params.p0 * t / params.m
        + params.hbar * params.k * t * t / (params.m * params.m * params.sigma0_sq);
    let p_center = params.p0 + params.hbar * params.k * t / (params.m * params.sigma0_sq);
    Ok((qtilde, alpha, q_center, p_center))
}

/// alpha(t) = m alpha0 / (2 alpha0 t + m); shared by the free and ramp
/// scenarios (a linear potential does not alter the width).
pub fn free_alpha(params: &OracleParams, t: f64) -> Complex64 {
    let a0 = params.alpha0();
    let m = Complex64::new(params.m, 0.0);
    m * a0 / (a0 * 2.0 * t + m)
}

/// Linear ramp V(x) = beta x, constant b = k.
/// Returns (p, qtilde, Q) at time t.
pub fn linear_ramp(params: &OracleParams, t: f64) -> Result<(f64, f64, f64)> {
    let beta = match params.scenario {
        OracleScenario::LinearRamp { beta } => beta,
        _ => {
            return Err(NhgwpError::PreconditionViolation(
                "linear_ramp oracle called with a non-ramp scenario".into(),
            ))
        }
    };
    let p = params.p0 - beta * t;
    let qtilde = params.qtilde0() + params.p0 * t / params.m - beta * t * t / (2.0 * params.m);
    let q_center = params.q0
        + params.p0 * t / params.m
        + (params.hbar * params.k / (params.m * params.m * params.sigma0_sq)
            - beta / (2.0 * params.m))
            * t
            * t;
    Ok((p, qtilde, q_center))
}

/// Ramp slope at which the t^2 term of Q(t) vanishes: beta = 2 hbar k / (m sigma0^2).
pub fn critical_beta(params: &OracleParams) -> f64 {
    2.0 * params.hbar * params.k / (params.m * params.sigma0_sq)
}

/// Harmonic V(x) = (1/2) m omega^2 x^2, constant b = k.
/// Returns (qtilde, alpha, Q) at time t.
///
/// alpha(t) is evaluated through the linear (Moebius) lift of its Riccati
/// equation: with u(t) = cos(wt) + (2 alpha0 / (m w)) sin(wt),
/// alpha(t) = (m/2) du/dt / u, which has no cot/tan singularities.
pub fn harmonic(params: &OracleParams, t: f64) -> Result<(f64, Complex64, f64)> {
    let omega = match params.scenario {
        OracleScenario::Harmonic { omega } if omega > 0.0 => omega,
        OracleScenario::Harmonic { .. } => {
            return Err(NhgwpError::PreconditionViolation(
                "harmonic oracle requires omega > 0".into(),
            ))
        }
        _ => {
            return Err(NhgwpError::PreconditionViolation(
                "harmonic oracle called with a non-harmonic scenario".into(),
            ))
        }
    };
    let (s, c) = (omega * t).sin_cos();
    let qtilde = params.qtilde0() * c + params.p0 / (params.m * omega) * s;
    let alpha = harmonic_alpha(params, omega, t);

    // Q(t) - qtilde(t) = sigma^2(t) k / hbar with
    // sigma^2(t) = (hbar^2 sin^2 + m^2 w^2 sigma0^4 cos^2) / (m^2 w^2 sigma0^2).
    let m2w2 = params.m * params.m * omega * omega;
    let width_term = (params.hbar * params.hbar * s * s
        + m2w2 * params.sigma0_sq * params.sigma0_sq * c * c)
        / (params.hbar * m2w2 * params.sigma0_sq);
    let q_center = qtilde + width_term * params.k;
    Ok((qtilde, alpha, q_center))
}

fn harmonic_alpha(params: &OracleParams, omega: f64, t: f64) -> Complex64 {
    let a0 = params.alpha0();
    let (s, c) = (omega * t).sin_cos();
    let mw = params.m * omega;
    let u = Complex64::new(c, 0.0) + a0 * (2.0 * s / mw);
    let du = Complex64::new(-omega * s, 0.0) + a0 * (2.0 * c / params.m);
    0.5 * params.m * du / u
}
