use thiserror::Error;

#[derive(Debug, Error)]
pub enum NhgwpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Im(alpha) is no longer positive definite; the Gaussian has lost
    /// normalizability (dt too large or a genuinely runaway model).
    #[error("Im(alpha) not positive definite at t = {t}")]
    NonNormalizable { t: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("singular transform: {0}")]
    SingularTransform(String),

    /// Real exponent of the field exceeds the configured cap; evaluating
    /// exp() would overflow or drown everything else in the output.
    #[error("field exponent {max_exponent:.3e} exceeds cap {cap:.3e}")]
    ExponentOverflow { max_exponent: f64, cap: f64 },

    /// Per-step high-wavenumber gain of the split-step symbol exceeds the
    /// configured bound; the run would amplify grid-scale noise.
    #[error("per-step high-wavenumber gain {gain:.6} exceeds bound {bound:.6}")]
    SpectralInstability { gain: f64, bound: f64 },

    /// The packet's spectral tail at the grid's edge wavenumbers is too
    /// large for the propagation to be trustworthy.
    #[error("initial spectral tail {tail:.3e} of peak exceeds {threshold:.3e}")]
    SpectralTail { tail: f64, threshold: f64 },

    /// Amplitude next to a Dirichlet wall grew past the trust threshold.
    #[error("wall-adjacent amplitude fraction {fraction:.3e} exceeds {threshold:.3e}")]
    BoundaryContamination { fraction: f64, threshold: f64 },

    #[error("field has zero norm")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, NhgwpError>;
