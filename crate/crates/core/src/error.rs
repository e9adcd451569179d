use alloc::string::String;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frequency {re}{im:+}i lies outside the closed upper half plane")]
    LowerHalfPlane { re: f64, im: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("pole evaluation: |D(z)| = {magnitude:e} is below rounding of its terms")]
    PoleEvaluation { magnitude: f64 },

    #[error("non-rational kernel: {0}")]
    NonRationalKernel(&'static str),

    /// Bare mass is zero or negative. The value is carried so that
    /// demonstration runs can proceed with the flag attached.
    #[error("acausal cutoff: bare mass {bare_mass:e} <= 0 (cutoff exceeds 1/tau_e)")]
    AcausalCutoff { bare_mass: f64 },

    #[error(
        "quadrature failure: estimate {estimate:e} with error {error:e} (requested {requested:e})"
    )]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        requested: f64,
    },

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error(
        "grid too coarse: derivative error {error:e} exceeds {tolerance:e} at T = {temperature}"
    )]
    GridTooCoarse {
        temperature: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("grid not increasing")]
    GridNotIncreasing,

    #[error("no linear regime found: fit residual {residual:e}")]
    NoLinearRegime { residual: f64 },

    #[error("insufficient statistics: standard error {stderr:e} >= tested deviation {scale:e}")]
    InsufficientStatistics { stderr: f64, scale: f64 },

    #[error("kernel real part not integrable on (0, {omega_max}]")]
    NonIntegrableKernel { omega_max: f64 },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
