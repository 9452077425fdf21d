use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndexOutOfRange { index: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance matrix violates the uncertainty bound (margin {margin:.3e})")]
    Unphysical { margin: f64 },

    #[error(
        "reduced covariance matrix is not a valid two-mode state (discriminant {discriminant:.3e})"
    )]
    InvalidTwoModeState { discriminant: f64 },

    #[error("Bessel order {order} outside supported range |f| <= {max_order}")]
    BesselOrderOutOfRange { order: i32, max_order: i32 },

    #[error("Bessel argument {x} outside supported range |x| <= {max_x}")]
    BesselArgumentOutOfRange { x: f64, max_x: f64 },

    #[error("drive frequency is zero while drive amplitude is {amplitude} GHz")]
    ZeroDriveFrequency { amplitude: f64 },

    #[error("dark-mode construction requires g1 < g2 (got g1 = {g1}, g2 = {g2} rad/ns)")]
    DarkModeUndefined { g1: f64, g2: f64 },

    #[error("effective two-magnon model requires nonzero detunings (Delta_1 = {delta_1}, Delta_2 = {delta_2} rad/ns)")]
    ZeroDetuning { delta_1: f64, delta_2: f64 },

    #[error("drift matrix is not strictly Hurwitz (spectral margin {margin:.3e} rad/ns)")]
    NotHurwitz { margin: f64 },

    #[error("Lyapunov residual {residual:.3e} exceeds tolerance {tolerance:.1e} (near-marginal stability)")]
    LyapunovResidual { residual: f64, tolerance: f64 },

    #[error("step size {dt} ns exceeds the cap {cap} ns for the fastest drift entry")]
    StepSizeTooLarge { dt: f64, cap: f64 },

    #[error("propagation produced a non-finite covariance entry at t = {t} ns")]
    NonFinite { t: f64 },

    #[error("physicality margin {margin:.3e} below -1e-6 at t = {t} ns (step size failure)")]
    PhysicalityLost { t: f64, margin: f64 },

    #[error("closed-form entanglement requires gamma > 0 (got {gamma})")]
    NonPositiveGamma { gamma: f64 },

    #[error("invalid model configuration: {0}")]
    ModelInvalid(String),

    #[error("invalid grid specification: {0}")]
    GridInvalid(String),

    #[error(
        "Routh-Hurwitz and eigenvalue verdicts disagree at cell ({i}, {j}) \
         (margin {margin:.3e}, beyond the boundary band)"
    )]
    StabilityCrossCheck { i: usize, j: usize, margin: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailed,
}

pub type Result<T> = std::result::Result<T, Error>;
