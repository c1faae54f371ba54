pub mod engine;
pub mod error;
pub mod grid;
pub mod model;
pub mod oracles;
pub mod transforms;

pub use engine::{eom1_residual, propagate, rhs, step_rk4, StateDerivative, Trajectory};
pub use error::{NhgwpError, Result};
pub use grid::{
    crank_nicolson_linear_b, density_observables, evaluate_wavepacket, heatmap_fields_normalized,
    heatmap_normalized, log_norm_squared, norm_squared, split_step_constant_b, Grid1D, GridField,
    SpectralMask, SpectralOptions, DEFAULT_EXP_CAP,
};
pub use model::{
    eval_b, potential_lha, LinearVectorPotential, ModelSpec, PolyTerm, PolynomialPotential,
    WavepacketState,
};
pub use transforms::{
    compute_real_center_constant, guiding_ic_constant, guiding_ic_linear, shift_representation,
    to_real_phase_space, RealPhasePoint,
};
