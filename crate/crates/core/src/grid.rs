use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::engine::Trajectory;
use crate::error::{NhgwpError, Result};
use crate::model::{ModelSpec, WavepacketState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default cap on the real part of the wavepacket exponent; exp(700) is
/// still representable in f64, anything past it is a runaway norm.
pub const DEFAULT_EXP_CAP: f64 = 700.0;

const WALL_FRACTION: f64 = 1e-8;

/// Uniform 1D grid: x_i = center - length/2 + i dx with dx = length/n
/// (periodic convention, shared by both propagation schemes; the implicit
/// scheme pins the two end points to zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub length: f64,
    pub center: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64, center: f64) -> Result<Self> {
        if n < 2 {
            return Err(NhgwpError::PreconditionViolation(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite() && center.is_finite()) {
            return Err(NhgwpError::PreconditionViolation(format!(
                "grid length must be positive and finite, got length {length}, center {center}"
            )));
        }
        Ok(Self { n, length, center })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.center - 0.5 * self.length + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Signed wavenumbers in DFT bin order.
    pub fn kappas(&self) -> Vec<f64> {
        let n = self.n;
        let dk = 2.0 * std::f64::consts::PI / self.length;
        (0..n)
            .map(|j| {
                let jj = if j < n.div_ceil(2) { j as i64 } else { j as i64 - n as i64 };
                jj as f64 * dk
            })
            .collect()
    }

    pub fn kappa_max(&self) -> f64 {
        std::f64::consts::PI / self.dx()
    }
}

/// Sampled complex field psi(t, x_i).
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub t: f64,
}

fn require_1d(dim: usize) -> Result<()> {
    if dim != 1 {
        return Err(NhgwpError::DimensionMismatch { expected: 1, got: dim });
    }
    Ok(())
}

/// Complex exponent of the packet at real x (1D):
///   E(x) = (i/hbar) (alpha (x-q)^2 + p (x-q) + gamma).
fn exponent_1d(state: &WavepacketState, hbar: f64, x: f64) -> Complex64 {
    let d = Complex64::new(x, 0.0) - state.q[0];
    (I / hbar) * (state.alpha[(0, 0)] * d * d + state.p[0] * d + state.gamma)
}

/// Sample psi(x) = exp(E(x)) on the grid. Complex q, p, gamma are handled
/// by direct complex arithmetic; exploding exponents are an error rather
/// than silent infs.
pub fn evaluate_wavepacket(
    state: &WavepacketState,
    grid: &Grid1D,
    hbar: f64,
    exp_cap: f64,
) -> Result<GridField> {
    require_1d(state.dim())?;
    state.check_im_alpha_pd()?;

    let exponents: Vec<Complex64> = (0..grid.n)
        .map(|i| exponent_1d(state, hbar, grid.x(i)))
        .collect();
    let max_exponent = exponents.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if max_exponent > exp_cap {
        return Err(NhgwpError::ExponentOverflow { max_exponent, cap: exp_cap });
    }
    Ok(GridField {
        grid: grid.clone(),
        values: exponents.into_iter().map(|e| e.exp()).collect(),
        t: state.t,
    })
}

/// ln of the squared norm of the packet, by completing the square of the
/// real exponent of |psi|^2 (valid for complex q, p, gamma, any dimension):
///   |psi|^2 = exp(-(2/hbar)(x.A.x + b.x + c)),  A = Im alpha,
///   b = Im(p - 2 alpha q),  c = Im(q.alpha.q - p.q + gamma)
///   ln ||psi||^2 = (D/2) ln(pi hbar / 2) - ln det A / 2
///                  + (b.A^-1.b / 2 - 2c) / hbar.
pub fn log_norm_squared(state: &WavepacketState, hbar: f64) -> Result<f64> {
    let d = state.dim();
    let a = state.im_alpha();
    let chol = nalgebra::Cholesky::new(a).ok_or(NhgwpError::NonNormalizable { t: state.t })?;

    let aq = &state.alpha * &state.q;
    let b = DVector::from_iterator(d, (0..d).map(|j| (state.p[j] - 2.0 * aq[j]).im));
    let mut c = state.gamma.im;
    for j in 0..d {
        c += (state.q[j] * aq[j] - state.p[j] * state.q[j]).im;
    }

    let ln_det = 2.0 * (0..d).map(|j| chol.l_dirty()[(j, j)].ln()).sum::<f64>();
    let quad = b.dot(&chol.solve(&b));
    Ok(0.5 * d as f64 * (std::f64::consts::PI * hbar / 2.0).ln() - 0.5 * ln_det
        + (0.5 * quad - 2.0 * c) / hbar)
}

/// Closed-form squared norm; overflows to inf honestly when the log form
/// exceeds f64 range.
pub fn norm_squared(state: &WavepacketState, hbar: f64) -> Result<f64> {
    Ok(log_norm_squared(state, hbar)?.exp())
}

/// Smooth high-wavenumber damping: rho = 1 for |kappa| <= kappa_c, then
/// exp(-((|kappa|-kappa_c)/width)^3).
#[derive(Debug, Clone)]
pub struct SpectralMask {
    pub kappa_c: f64,
    pub width: f64,
}

impl SpectralMask {
    fn eval(&self, kappa: f64) -> f64 {
        let a = kappa.abs();
        if a <= self.kappa_c {
            1.0
        } else {
            (-((a - self.kappa_c) / self.width).powi(3)).exp()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    /// Optional high-kappa mask; off by default.
    pub mask: Option<SpectralMask>,
    /// Largest tolerated per-step amplitude gain of any retained mode.
    pub growth_bound: f64,
    /// Initial spectral tail (relative to the spectral peak) above which
    /// propagation is refused.
    pub tail_threshold: f64,
    /// Fraction of kappa_max where the tail band starts.
    pub tail_band: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { mask: None, growth_bound: 1.1, tail_threshold: 1e-12, tail_band: 0.95 }
    }
}

/// Strang split-step propagation for constant b = k:
///   half potential phase, kinetic step with Fourier symbol
///   exp(-i dt (hbar kappa + i k)^2 / (2 m hbar)), half potential phase.
/// Non-unitary by design: modes with kappa k > 0 gain exp(dt kappa k / m)
/// per step, so the per-step gain of every retained mode is checked against
/// options.growth_bound, and the initial field must have no spectral weight
/// near kappa_max (roundoff there would be amplified ahead of the physics).
pub fn split_step_constant_b(
    field: &GridField,
    model: &ModelSpec,
    dt: f64,
    steps: usize,
    options: &SpectralOptions,
) -> Result<GridField> {
    require_1d(model.dim)?;
    if !model.vecpot.is_constant() {
        return Err(NhgwpError::PreconditionViolation(
            "split-step scheme requires constant b (zero slope)".into(),
        ));
    }
    let n = field.grid.n;
    if field.values.len() != n {
        return Err(NhgwpError::DimensionMismatch { expected: n, got: field.values.len() });
    }
    let k = model.vecpot.offset[0];
    let m = model.masses[0];
    let hbar = model.hbar;

    let kappas = field.grid.kappas();
    let symbol: Vec<Complex64> = kappas
        .iter()
        .map(|&kappa| {
            let hk = Complex64::new(hbar * kappa, k);
            let mut s = (-I * dt * hk * hk / (2.0 * m * hbar)).exp();
            if let Some(mask) = &options.mask {
                s *= mask.eval(kappa);
            }
            s
        })
        .collect();
    let gain = symbol.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if gain > options.growth_bound {
        return Err(NhgwpError::SpectralInstability { gain, bound: options.growth_bound });
    }

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut psi = field.values.clone();

    // Tail guard on the initial spectrum.
    let mut spec = psi.clone();
    fwd.process(&mut spec);
    let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        let band = options.tail_band * field.grid.kappa_max();
        let tail = spec
            .iter()
            .zip(&kappas)
            .filter(|(_, &kappa)| kappa.abs() >= band)
            .map(|(z, _)| z.norm())
            .fold(0.0, f64::max)
            / peak;
        if tail > options.tail_threshold {
            return Err(NhgwpError::SpectralTail { tail, threshold: options.tail_threshold });
        }
    }

    let half_phase: Option<Vec<Complex64>> = if model.potential.is_zero() {
        None
    } else {
        let mut phases = Vec::with_capacity(n);
        for i in 0..n {
            let x = DVector::from_element(1, field.grid.x(i));
            let v = model.potential.eval_real(&x)?;
            phases.push((-I * dt * v / (2.0 * hbar)).exp());
        }
        Some(phases)
    };

    let inv_n = 1.0 / n as f64;
    for _ in 0..steps {
        if let Some(ph) = &half_phase {
            for (z, f) in psi.iter_mut().zip(ph) {
                *z *= f;
            }
        }
        fwd.process(&mut psi);
        for (z, s) in psi.iter_mut().zip(&symbol) {
            *z *= s;
        }
        inv.process(&mut psi);
        for z in psi.iter_mut() {
            *z *= inv_n;
        }
        if let Some(ph) = &half_phase {
            for (z, f) in psi.iter_mut().zip(ph) {
                *z *= f;
            }
        }
    }

    Ok(GridField { grid: field.grid.clone(), values: psi, t: field.t + steps as f64 * dt })
}

/// Complex tridiagonal solve (Thomas algorithm); sub[0] and sup[n-1] unused.
fn solve_tridiagonal(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = rhs.len();
    let mut pivot = diag[0];
    if pivot.norm() < 1e-300 {
        return Err(NhgwpError::SingularTransform("tridiagonal pivot vanished".into()));
    }
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i] * scratch[i];
        if pivot.norm() < 1e-300 {
            return Err(NhgwpError::SingularTransform("tridiagonal pivot vanished".into()));
        }
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i + 1] * next;
    }
    Ok(())
}

/// Crank-Nicolson propagation for any linear b(x) = kx + c on a Dirichlet
/// box. The position-space operator
///   L = -hbar^2/2m d2 + hbar b/m d + hbar b'/2m - b^2/2m + V
/// is discretized with central differences, giving asymmetric hopping
///   sub_i = -hbar^2/(2m dx^2) - hbar b_i/(2m dx)
///   sup_i = -hbar^2/(2m dx^2) + hbar b_i/(2m dx)
/// and (1 + i dt L / 2 hbar) psi_new = (1 - i dt L / 2 hbar) psi.
/// The walls are pinned to zero; growth at the points next to them means
/// the box no longer contains the packet and the run is rejected.
pub fn crank_nicolson_linear_b(
    field: &GridField,
    model: &ModelSpec,
    dt: f64,
    steps: usize,
) -> Result<GridField> {
    require_1d(model.dim)?;
    let n = field.grid.n;
    if field.values.len() != n {
        return Err(NhgwpError::DimensionMismatch { expected: n, got: field.values.len() });
    }
    if n < 4 {
        return Err(NhgwpError::PreconditionViolation(format!(
            "implicit scheme needs at least 4 points, got {n}"
        )));
    }
    let m = model.masses[0];
    let hbar = model.hbar;
    let slope = model.vecpot.slope[0];
    let dx = field.grid.dx();

    let kin = hbar * hbar / (2.0 * m * dx * dx);
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for i in 0..n {
        let x = field.grid.x(i);
        let b = slope * x + model.vecpot.offset[0];
        let hop = hbar * b / (2.0 * m * dx);
        let v = model.potential.eval_real(&DVector::from_element(1, x))?;
        sub[i] = -kin - hop;
        sup[i] = -kin + hop;
        diag[i] = 2.0 * kin + hbar * slope / (2.0 * m) - b * b / (2.0 * m) + v;
    }

    let c = I * dt / (2.0 * hbar);
    let ni = n - 2; // interior unknowns 1..=n-2
    let a_sub: Vec<Complex64> = (0..ni).map(|j| c * sub[j + 1]).collect();
    let a_diag: Vec<Complex64> = (0..ni).map(|j| 1.0 + c * diag[j + 1]).collect();
    let a_sup: Vec<Complex64> = (0..ni).map(|j| c * sup[j + 1]).collect();

    let mut psi = field.values.clone();
    psi[0] = Complex64::new(0.0, 0.0);
    psi[n - 1] = Complex64::new(0.0, 0.0);

    let mut rhs = vec![Complex64::new(0.0, 0.0); ni];
    let mut scratch = vec![Complex64::new(0.0, 0.0); ni];
    for _ in 0..steps {
        for j in 0..ni {
            let i = j + 1;
            rhs[j] = psi[i] - c * (sub[i] * psi[i - 1] + diag[i] * psi[i] + sup[i] * psi[i + 1]);
        }
        solve_tridiagonal(&a_sub, &a_diag, &a_sup, &mut rhs, &mut scratch)?;
        psi[1..n - 1].copy_from_slice(&rhs);

        let max_abs = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let wall = psi[1].norm().max(psi[n - 2].norm());
        if max_abs > 0.0 && wall > WALL_FRACTION * max_abs {
            return Err(NhgwpError::BoundaryContamination {
                fraction: wall / max_abs,
                threshold: WALL_FRACTION,
            });
        }
    }

    Ok(GridField { grid: field.grid.clone(), values: psi, t: field.t + steps as f64 * dt })
}

/// Trapezoidal norm^2, centroid, and variance of |psi|^2.
pub fn density_observables(field: &GridField) -> Result<(f64, f64, f64)> {
    let n = field.grid.n;
    let dx = field.grid.dx();
    let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * dx } else { dx };

    let dens: Vec<f64> = field.values.iter().map(|z| z.norm_sqr()).collect();
    let norm2: f64 = dens.iter().enumerate().map(|(i, d)| w(i) * d).sum();
    if !norm2.is_finite() {
        return Err(NhgwpError::PreconditionViolation(format!(
            "field density is not finite (norm^2 = {norm2})"
        )));
    }
    if norm2 <= f64::MIN_POSITIVE {
        return Err(NhgwpError::ZeroNorm);
    }

    let centroid: f64 = dens
        .iter()
        .enumerate()
        .map(|(i, d)| w(i) * field.grid.x(i) * d)
        .sum::<f64>()
        / norm2;
    let variance: f64 = dens
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let dxc = field.grid.x(i) - centroid;
            w(i) * dxc * dxc * d
        })
        .sum::<f64>()
        / norm2;
    Ok((norm2, centroid, variance))
}

/// |psi(t, x)|^2 over a packet trajectory, globally scaled to max 1.
/// The densities are assembled in log space and shifted by the global
/// maximum before exponentiating, so trajectories whose raw density spans
/// hundreds of orders of magnitude normalize without overflow; rows far
/// below the global peak underflow to 0, which is what the scaling means.
pub fn heatmap_normalized(trajectory: &Trajectory, grid: &Grid1D) -> Result<Vec<Vec<f64>>> {
    if trajectory.samples.is_empty() {
        return Err(NhgwpError::PreconditionViolation("trajectory has no samples".into()));
    }
    let hbar = trajectory.model.hbar;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(trajectory.samples.len());
    let mut global = f64::NEG_INFINITY;
    for state in &trajectory.samples {
        require_1d(state.dim())?;
        let row: Vec<f64> = (0..grid.n)
            .map(|i| 2.0 * exponent_1d(state, hbar, grid.x(i)).re)
            .collect();
        for &v in &row {
            if v > global {
                global = v;
            }
        }
        rows.push(row);
    }
    if !global.is_finite() {
        return Err(NhgwpError::ZeroNorm);
    }
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            *v = (*v - global).exp();
        }
    }
    Ok(rows)
}

/// Same scaling for already-sampled grid fields.
pub fn heatmap_fields_normalized(fields: &[GridField]) -> Result<Vec<Vec<f64>>> {
    if fields.is_empty() {
        return Err(NhgwpError::PreconditionViolation("no fields given".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(fields.len());
    let mut global = 0.0_f64;
    for field in fields {
        let row: Vec<f64> = field.values.iter().map(|z| z.norm_sqr()).collect();
        for &v in &row {
            if v > global {
                global = v;
            }
        }
        rows.push(row);
    }
    if global <= 0.0 || !global.is_finite() {
        return Err(NhgwpError::ZeroNorm);
    }
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            *v /= global;
        }
    }
    Ok(rows)
}
