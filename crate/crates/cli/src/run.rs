//! Execute a parsed scenario: packet propagation, optional grid reference
//! propagation, oracle comparison, and CSV artifacts.
//!
//! CSV schemas (headers are part of the contract):
//!   trajectory.csv      t, Re/Im q_j, Re/Im p_j, Q_j, P_j,
//!                       Re/Im alpha_j_l (upper triangle), Re/Im gamma,
//!                       norm2, sigma2_j
//!   density.csv         t, x, psi2_normalized
//!   grid_trajectory.csv t, centroid_0, norm2, var_0
//!   report.csv          metric, value
//!   analytic.csv        t, Q_0, P_0, oracle_qtilde_0, oracle_Q_0
//! Numbers are written with 17 significant digits so a reader recovers the
//! exact doubles; identical scenarios produce byte-identical files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use nhgwp_core::error::NhgwpError;
use nhgwp_core::grid::{
    crank_nicolson_linear_b, density_observables, evaluate_wavepacket, heatmap_fields_normalized,
    heatmap_normalized, norm_squared, split_step_constant_b, Grid1D, GridField, SpectralMask,
    SpectralOptions, DEFAULT_EXP_CAP,
};
use nhgwp_core::model::{
    LinearVectorPotential, ModelSpec, PolyTerm, PolynomialPotential, WavepacketState,
};
use nhgwp_core::oracles::{free_particle, harmonic, linear_ramp, OracleParams, OracleScenario};
use nhgwp_core::transforms::to_real_phase_space;
use nhgwp_core::{propagate, Trajectory};

use crate::scenario::{
    Artifact, Center, Gamma0, GridSpec, Mode, PotentialSpec, Scenario, ScenarioError, Scheme,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical failure: {0}")]
    Numerics(#[from] NhgwpError),
}

pub type Result<T> = std::result::Result<T, RunError>;

fn invalid(key: &str, message: impl Into<String>) -> RunError {
    RunError::Scenario(ScenarioError::Validation { key: key.into(), message: message.into() })
}

/// Outcome summary. Deviations land in `metrics` (and report.csv); wall
/// time is reported here only, so CSV outputs stay deterministic.
#[derive(Debug)]
pub struct RunReport {
    pub mode: Mode,
    pub gwd_steps: usize,
    pub grid_steps: usize,
    pub wall_ms: u128,
    pub metrics: Vec<(String, f64)>,
    pub error_flags: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

pub fn build_model(s: &Scenario) -> Result<ModelSpec> {
    let potential = match &s.potential {
        PotentialSpec::None => PolynomialPotential::new(s.dim, Vec::new())?,
        PotentialSpec::Coeffs(c) => PolynomialPotential::from_coeffs_1d(c),
        PotentialSpec::Terms(terms) => {
            let poly = terms
                .iter()
                .map(|(powers, coeff)| PolyTerm { coeff: *coeff, powers: powers.clone() })
                .collect();
            PolynomialPotential::new(s.dim, poly)?
        }
    };
    let vecpot = LinearVectorPotential::new(
        DVector::from_vec(s.b_slope.clone()),
        DVector::from_vec(s.b_offset.clone()),
    )?;
    Ok(ModelSpec::new(DVector::from_vec(s.masses.clone()), s.hbar, potential, vecpot)?)
}

pub fn build_initial_state(s: &Scenario) -> Result<WavepacketState> {
    let d = s.dim;
    let alpha = DMatrix::from_row_slice(d, d, &s.alpha0);
    let q = DVector::from_iterator(d, s.q0.iter().map(|&x| Complex64::new(x, 0.0)));
    let p = DVector::from_iterator(d, s.p0.iter().map(|&x| Complex64::new(x, 0.0)));
    let gamma = match s.gamma0 {
        Gamma0::Zero => Complex64::new(0.0, 0.0),
        Gamma0::Explicit(z) => z,
        Gamma0::UnitNorm => {
            // Unit norm for real q0, p0: Im gamma = (hbar/4) ln((pi hbar / 2)^d / det Im alpha).
            let im = alpha.map(|z| z.im);
            let det = im.determinant();
            if det <= 0.0 {
                return Err(invalid("alpha0", "Im(alpha0) must be positive definite"));
            }
            let log_norm = (std::f64::consts::PI * s.hbar / 2.0).ln() * d as f64 - det.ln();
            Complex64::new(0.0, 0.25 * s.hbar * log_norm)
        }
    };
    WavepacketState::new(alpha, q, p, gamma, 0.0)
        .map_err(|_| invalid("alpha0", "Im(alpha0) must be positive definite"))
}

/// Step counts mirroring the propagator: full dt steps, plus one shortened
/// landing step when t_final is not a multiple of dt.
fn step_count(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    let n_full = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    let remainder = t_final - n_full as f64 * dt;
    n_full + usize::from(remainder > 1e-12 * t_final.max(1.0))
}

/// Sample times written by the propagator for this run configuration:
/// t = 0, every stride-th full step strictly before t_final, and t_final.
fn sample_schedule(t_final: f64, dt: f64, stride: usize) -> Vec<f64> {
    let ratio = t_final / dt;
    let n_full = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    let mut times = vec![0.0];
    for step in 1..=n_full {
        let t = step as f64 * dt;
        if step % stride == 0 && t < t_final {
            times.push(t);
        }
    }
    times.push(t_final);
    times
}

fn resolve_scheme(s: &Scenario, g: &GridSpec) -> Scheme {
    match g.scheme {
        Scheme::Auto => {
            let b_zero = s.b_slope.iter().all(|&x| x == 0.0) && s.b_offset.iter().all(|&x| x == 0.0);
            // Crank-Nicolson is the robust default whenever b is present:
            // the spectral kinetic symbol amplifies the packet's own
            // high-wavenumber tail exponentially over long horizons.
            if b_zero {
                Scheme::Spectral
            } else {
                Scheme::Cn
            }
        }
        other => other,
    }
}

/// Grid reference propagation sampled on `schedule`.
struct GridRun {
    times: Vec<f64>,
    norm2: Vec<f64>,
    centroid: Vec<f64>,
    var: Vec<f64>,
    fields: Vec<GridField>,
    steps: usize,
    max_wall_fraction: f64,
}

fn wall_fraction(field: &GridField) -> f64 {
    let peak = field.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let n = field.values.len();
    field.values[1].norm().max(field.values[n - 2].norm()) / peak
}

fn run_grid(
    state0: &WavepacketState,
    model: &ModelSpec,
    s: &Scenario,
    g: &GridSpec,
    center: f64,
    schedule: &[f64],
    want_fields: bool,
) -> Result<GridRun> {
    let grid = Grid1D::new(g.n, g.length, center)?;
    let scheme = resolve_scheme(s, g);
    let options = SpectralOptions {
        mask: g.mask.map(|(kappa_c, width)| SpectralMask { kappa_c, width }),
        ..Default::default()
    };
    let mut field = evaluate_wavepacket(state0, &grid, model.hbar, DEFAULT_EXP_CAP)?;
    let mut out = GridRun {
        times: Vec::with_capacity(schedule.len()),
        norm2: Vec::new(),
        centroid: Vec::new(),
        var: Vec::new(),
        fields: Vec::new(),
        steps: 0,
        max_wall_fraction: 0.0,
    };
    let record = |field: &GridField, out: &mut GridRun| -> Result<()> {
        let (norm2, centroid, var) = density_observables(field)?;
        out.times.push(field.t);
        out.norm2.push(norm2);
        out.centroid.push(centroid);
        out.var.push(var);
        out.max_wall_fraction = out.max_wall_fraction.max(wall_fraction(field));
        if want_fields {
            out.fields.push(field.clone());
        }
        Ok(())
    };
    record(&field, &mut out)?;
    for &target in &schedule[1..] {
        let advance = |field: &GridField, dt: f64, steps: usize| -> Result<GridField> {
            Ok(match scheme {
                Scheme::Cn => crank_nicolson_linear_b(field, model, dt, steps)?,
                _ => split_step_constant_b(field, model, dt, steps, &options)?,
            })
        };
        let delta = target - field.t;
        let n = (delta / s.dt + 1e-9).floor() as usize;
        if n > 0 {
            field = advance(&field, s.dt, n)?;
            out.steps += n;
        }
        let rem = target - field.t;
        if rem > 1e-12 * target.max(1.0) {
            field = advance(&field, rem, 1)?;
            out.steps += 1;
        }
        field.t = target;
        record(&field, &mut out)?;
    }
    Ok(out)
}

/// Closed-form reference if the scenario is one of the supported 1D
/// constant-b cases: V = 0, V = beta x, or V = (1/2) m omega^2 x^2 with a
/// purely imaginary alpha0.
pub fn detect_oracle(s: &Scenario, model: &ModelSpec) -> Option<OracleParams> {
    if s.dim != 1 || s.b_slope[0] != 0.0 {
        return None;
    }
    let alpha0 = s.alpha0[0];
    if alpha0.re != 0.0 || alpha0.im <= 0.0 {
        return None;
    }
    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for term in &model.potential.terms {
        match term.powers[0] {
            1 => linear += term.coeff,
            2 => quadratic += term.coeff,
            _ if term.coeff == 0.0 => {}
            _ => return None,
        }
    }
    let m = model.masses[0];
    let scenario = if linear == 0.0 && quadratic == 0.0 {
        OracleScenario::FreeParticle
    } else if quadratic == 0.0 {
        OracleScenario::LinearRamp { beta: linear }
    } else if linear == 0.0 && quadratic > 0.0 {
        OracleScenario::Harmonic { omega: (2.0 * quadratic / m).sqrt() }
    } else {
        return None;
    };
    Some(OracleParams {
        m,
        hbar: s.hbar,
        k: s.b_offset[0],
        sigma0_sq: s.hbar / (2.0 * alpha0.im),
        q0: s.q0[0],
        p0: s.p0[0],
        scenario,
    })
}

/// (qtilde, Q, P if the scenario provides it) at time t.
fn oracle_center(params: &OracleParams, t: f64) -> Result<(f64, f64, Option<f64>)> {
    Ok(match params.scenario {
        OracleScenario::FreeParticle => {
            let (qt, _, q_big, p_big) = free_particle(params, t)?;
            (qt, q_big, Some(p_big))
        }
        OracleScenario::LinearRamp { .. } => {
            let (_, qt, q_big) = linear_ramp(params, t)?;
            (qt, q_big, None)
        }
        OracleScenario::Harmonic { .. } => {
            let (qt, _, q_big) = harmonic(params, t)?;
            (qt, q_big, None)
        }
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(content.as_bytes())?;
    Ok(path)
}

/// Spatial variance of |psi|^2 per dimension: (hbar/4) (Im alpha)^-1_jj.
fn density_variances(state: &WavepacketState, hbar: f64) -> Result<Vec<f64>> {
    let inv = state
        .im_alpha()
        .try_inverse()
        .ok_or(NhgwpError::NonNormalizable { t: state.t })?;
    Ok((0..state.dim()).map(|j| 0.25 * hbar * inv[(j, j)]).collect())
}

fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let d = traj.samples[0].dim();
    let hbar = traj.model.hbar;
    let mut header: Vec<String> = vec!["t".into()];
    for j in 0..d {
        header.push(format!("Re_q_{j}"));
        header.push(format!("Im_q_{j}"));
    }
    for j in 0..d {
        header.push(format!("Re_p_{j}"));
        header.push(format!("Im_p_{j}"));
    }
    for j in 0..d {
        header.push(format!("Q_{j}"));
    }
    for j in 0..d {
        header.push(format!("P_{j}"));
    }
    for j in 0..d {
        for l in j..d {
            header.push(format!("Re_alpha_{j}_{l}"));
            header.push(format!("Im_alpha_{j}_{l}"));
        }
    }
    header.push("Re_gamma".into());
    header.push("Im_gamma".into());
    header.push("norm2".into());
    for j in 0..d {
        header.push(format!("sigma2_{j}"));
    }
    let mut out = header.join(",");
    out.push('\n');
    for state in &traj.samples {
        let real = to_real_phase_space(state)?;
        let norm2 = norm_squared(state, hbar)?;
        let var = density_variances(state, hbar)?;
        let mut row: Vec<String> = vec![fmt(state.t)];
        for j in 0..d {
            row.push(fmt(state.q[j].re));
            row.push(fmt(state.q[j].im));
        }
        for j in 0..d {
            row.push(fmt(state.p[j].re));
            row.push(fmt(state.p[j].im));
        }
        for j in 0..d {
            row.push(fmt(real.q[j]));
        }
        for j in 0..d {
            row.push(fmt(real.p[j]));
        }
        for j in 0..d {
            for l in j..d {
                row.push(fmt(state.alpha[(j, l)].re));
                row.push(fmt(state.alpha[(j, l)].im));
            }
        }
        row.push(fmt(state.gamma.re));
        row.push(fmt(state.gamma.im));
        row.push(fmt(norm2));
        for v in var {
            row.push(fmt(v));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn density_csv(times: &[f64], grid: &Grid1D, rows: &[Vec<f64>]) -> String {
    let mut out = String::from("t,x,psi2_normalized\n");
    for (ti, row) in rows.iter().enumerate() {
        let t = fmt(times[ti]);
        for (i, &v) in row.iter().enumerate() {
            out.push_str(&t);
            out.push(',');
            out.push_str(&fmt(grid.x(i)));
            out.push(',');
            out.push_str(&fmt(v));
            out.push('\n');
        }
    }
    out
}

fn grid_trajectory_csv(run: &GridRun) -> String {
    let mut out = String::from("t,centroid_0,norm2,var_0\n");
    for i in 0..run.times.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(run.times[i]),
            fmt(run.centroid[i]),
            fmt(run.norm2[i]),
            fmt(run.var[i])
        ));
    }
    out
}

fn report_csv(metrics: &[(String, f64)]) -> String {
    let mut out = String::from("metric,value\n");
    for (name, value) in metrics {
        out.push_str(&format!("{name},{}\n", fmt(*value)));
    }
    out
}

fn analytic_csv(traj: &Trajectory, params: &OracleParams) -> Result<String> {
    let mut out = String::from("t,Q_0,P_0,oracle_qtilde_0,oracle_Q_0\n");
    for state in &traj.samples {
        let real = to_real_phase_space(state)?;
        let (qt, q_big, _) = oracle_center(params, state.t).map_err(RunError::from)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(state.t),
            fmt(real.q[0]),
            fmt(real.p[0]),
            fmt(qt),
            fmt(q_big)
        ));
    }
    Ok(out)
}

fn max_rms(diffs: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut max = 0.0_f64;
    let mut sum = 0.0_f64;
    let mut n = 0usize;
    for d in diffs {
        max = max.max(d.abs());
        sum += d * d;
        n += 1;
    }
    (max, if n == 0 { 0.0 } else { (sum / n as f64).sqrt() })
}

fn producible_artifacts(mode: Mode, has_grid: bool) -> Vec<Artifact> {
    match mode {
        Mode::Gwd => {
            let mut v = vec![Artifact::Trajectory];
            if has_grid {
                v.push(Artifact::Density);
            }
            v
        }
        Mode::Grid => vec![Artifact::GridTrajectory, Artifact::Density],
        Mode::Compare => vec![
            Artifact::Trajectory,
            Artifact::GridTrajectory,
            Artifact::Density,
            Artifact::Report,
        ],
        Mode::Analytic => vec![Artifact::Trajectory, Artifact::Analytic, Artifact::Report],
    }
}

pub fn run(mode: Mode, s: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let model = build_model(s)?;
    let state0 = build_initial_state(s)?;

    let needs_grid = matches!(mode, Mode::Grid | Mode::Compare);
    if needs_grid && s.grid.is_none() {
        return Err(invalid("grid.n", format!("mode {} needs a grid block", mode.name())));
    }

    let producible = producible_artifacts(mode, s.grid.is_some());
    let selected: Vec<Artifact> = match &s.outputs {
        None => producible.clone(),
        Some(list) => {
            for a in list {
                if !producible.contains(a) {
                    return Err(invalid(
                        "outputs",
                        format!("artifact '{}' is not produced by mode {}", a.name(), mode.name()),
                    ));
                }
            }
            list.clone()
        }
    };

    let oracle = detect_oracle(s, &model);
    if mode == Mode::Analytic && oracle.is_none() {
        return Err(invalid(
            "mode",
            "analytic mode needs a 1D free, linear-ramp, or harmonic scenario with constant b and purely imaginary alpha0",
        ));
    }

    // The packet run is needed for its own artifacts and whenever the grid
    // box is auto-centered on the packet's travel.
    let auto_center = s.grid.as_ref().is_some_and(|g| g.center == Center::Auto);
    let needs_traj = mode != Mode::Grid || auto_center;
    let mut traj: Option<Trajectory> = None;
    let mut grid_run: Option<GridRun> = None;

    let schedule = sample_schedule(s.t_final, s.dt, s.sample_stride);
    let want_fields = needs_grid && selected.contains(&Artifact::Density);

    let explicit_center = match s.grid.as_ref().map(|g| g.center) {
        Some(Center::At(x)) => Some(x),
        _ => None,
    };
    if mode == Mode::Compare && explicit_center.is_some() {
        // Independent states; run both propagations concurrently.
        let g = s.grid.as_ref().unwrap();
        let center = explicit_center.unwrap();
        let (traj_res, grid_res) = std::thread::scope(|scope| {
            let handle =
                scope.spawn(|| run_grid(&state0, &model, s, g, center, &schedule, want_fields));
            let traj_res = propagate(&state0, &model, s.t_final, s.dt, s.sample_stride);
            (traj_res, handle.join().expect("grid propagation thread panicked"))
        });
        traj = Some(traj_res?);
        grid_run = Some(grid_res?);
    } else {
        if needs_traj {
            traj = Some(propagate(&state0, &model, s.t_final, s.dt, s.sample_stride)?);
        }
        if needs_grid {
            let g = s.grid.as_ref().unwrap();
            let center = match g.center {
                Center::At(x) => x,
                Center::Auto => {
                    let t = traj.as_ref().unwrap();
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for state in &t.samples {
                        let q_big = to_real_phase_space(state)?.q[0];
                        lo = lo.min(q_big);
                        hi = hi.max(q_big);
                    }
                    0.5 * (lo + hi)
                }
            };
            grid_run = Some(run_grid(&state0, &model, s, g, center, &schedule, want_fields)?);
        }
    }

    let gwd_steps = if traj.is_some() { step_count(s.t_final, s.dt) } else { 0 };
    let grid_steps = grid_run.as_ref().map_or(0, |g| g.steps);

    // Deterministic deviation metrics for report.csv.
    let mut metrics: Vec<(String, f64)> = Vec::new();
    if matches!(mode, Mode::Compare | Mode::Analytic) {
        metrics.push(("gwd_steps".into(), gwd_steps as f64));
        if needs_grid {
            metrics.push(("grid_steps".into(), grid_steps as f64));
        }
        let t = traj.as_ref().unwrap();
        let centers: Vec<(f64, f64)> = t
            .samples
            .iter()
            .map(|st| to_real_phase_space(st).map(|r| (r.q[0], r.p[0])))
            .collect::<nhgwp_core::Result<_>>()?;
        if let Some(g) = &grid_run {
            let (max_dq, rms_dq) =
                max_rms(centers.iter().zip(&g.centroid).map(|((q, _), c)| q - c));
            metrics.push(("max_abs_Q_gwd_vs_grid_0".into(), max_dq));
            metrics.push(("rms_Q_gwd_vs_grid_0".into(), rms_dq));
            let norms: Vec<f64> = t
                .samples
                .iter()
                .map(|st| norm_squared(st, model.hbar))
                .collect::<nhgwp_core::Result<_>>()?;
            let (max_dn, rms_dn) = max_rms(norms.iter().zip(&g.norm2).map(|(a, b)| a - b));
            metrics.push(("max_abs_norm2_gwd_vs_grid".into(), max_dn));
            metrics.push(("rms_norm2_gwd_vs_grid".into(), rms_dn));
            let vars: Vec<f64> = t
                .samples
                .iter()
                .map(|st| density_variances(st, model.hbar).map(|v| v[0]))
                .collect::<Result<_>>()?;
            let (max_dv, rms_dv) = max_rms(vars.iter().zip(&g.var).map(|(a, b)| a - b));
            metrics.push(("max_abs_var_gwd_vs_grid_0".into(), max_dv));
            metrics.push(("rms_var_gwd_vs_grid_0".into(), rms_dv));
        }
        if let Some(params) = &oracle {
            let mut oq = Vec::with_capacity(t.samples.len());
            let mut op = Vec::new();
            for st in &t.samples {
                let (_, q_big, p_big) = oracle_center(params, st.t)?;
                oq.push(q_big);
                if let Some(p_big) = p_big {
                    op.push(p_big);
                }
            }
            let (max_dq, rms_dq) = max_rms(centers.iter().zip(&oq).map(|((q, _), o)| q - o));
            metrics.push(("max_abs_Q_gwd_vs_oracle_0".into(), max_dq));
            metrics.push(("rms_Q_gwd_vs_oracle_0".into(), rms_dq));
            if op.len() == centers.len() {
                let (max_dp, rms_dp) = max_rms(centers.iter().zip(&op).map(|((_, p), o)| p - o));
                metrics.push(("max_abs_P_gwd_vs_oracle_0".into(), max_dp));
                metrics.push(("rms_P_gwd_vs_oracle_0".into(), rms_dp));
            }
        }
    }

    let mut error_flags = Vec::new();
    if let Some(g) = &grid_run {
        // Within a decade of the wall-contamination guard: the run finished
        // but the box deserves a second look.
        if g.max_wall_fraction > 1e-9 {
            error_flags.push(format!(
                "wall_amplitude_near_guard:{:.2e}",
                g.max_wall_fraction
            ));
        }
    }

    fs::create_dir_all(out_dir)?;
    let mut artifacts = Vec::new();
    for artifact in &selected {
        let path = match artifact {
            Artifact::Trajectory => {
                write_file(out_dir, artifact.filename(), &trajectory_csv(traj.as_ref().unwrap())?)?
            }
            Artifact::GridTrajectory => {
                write_file(out_dir, artifact.filename(), &grid_trajectory_csv(grid_run.as_ref().unwrap()))?
            }
            Artifact::Density => {
                let g = s.grid.as_ref().unwrap();
                let content = if needs_grid {
                    let run = grid_run.as_ref().unwrap();
                    let rows = heatmap_fields_normalized(&run.fields)?;
                    density_csv(&run.times, &run.fields[0].grid, rows.as_slice())
                } else {
                    // Packet-only density: evaluate the ansatz on the box.
                    let t = traj.as_ref().unwrap();
                    let center = match g.center {
                        Center::At(x) => x,
                        Center::Auto => {
                            let mut lo = f64::INFINITY;
                            let mut hi = f64::NEG_INFINITY;
                            for state in &t.samples {
                                let q_big = to_real_phase_space(state)?.q[0];
                                lo = lo.min(q_big);
                                hi = hi.max(q_big);
                            }
                            0.5 * (lo + hi)
                        }
                    };
                    let grid = Grid1D::new(g.n, g.length, center)?;
                    let rows = heatmap_normalized(t, &grid)?;
                    let times: Vec<f64> = t.samples.iter().map(|st| st.t).collect();
                    density_csv(&times, &grid, rows.as_slice())
                };
                write_file(out_dir, artifact.filename(), &content)?
            }
            Artifact::Report => write_file(out_dir, artifact.filename(), &report_csv(&metrics))?,
            Artifact::Analytic => write_file(
                out_dir,
                artifact.filename(),
                &analytic_csv(traj.as_ref().unwrap(), oracle.as_ref().unwrap())?,
            )?,
        };
        artifacts.push(path);
    }

    Ok(RunReport {
        mode,
        gwd_steps,
        grid_steps,
        wall_ms: start.elapsed().as_millis(),
        metrics,
        error_flags,
        artifacts,
    })
}
