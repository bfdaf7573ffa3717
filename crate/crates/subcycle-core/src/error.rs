use thiserror::Error;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("time window too narrow: |tau^-1(t_max) - t_max| = {deviation_fs:e} fs")]
    GridTooNarrow { deviation_fs: f64 },

    #[error("frequency grid touches zero (omega_min = {omega_min})")]
    SingularFrequency { omega_min: f64 },

    #[error("Bloch-Messiah phase alignment failed for mode {mode} (|u^T P v|/cosh r = {ratio})")]
    DecompositionFailed { mode: usize, ratio: f64 },

    #[error("gate projection exceeds unity: sum |theta_j|^2 = {total} at t_d = {t_d_fs} fs")]
    GateTooWide { total: f64, t_d_fs: f64 },

    #[error("oracle mode spacing violates 1 >> dw*delta_d >> 1/N (dw*delta_d = {product}, N = {modes})")]
    SpacingViolation { product: f64, modes: usize },

    #[error("photon subtraction needs a squeezed mode (r = 0)")]
    DegenerateSubtraction,

    #[error("characteristic function has not decayed at the grid edge (max edge value {edge:e})")]
    GridTruncation { edge: f64 },

    #[error("grids differ in extent or resolution")]
    GridMismatch,

    #[error("marginal has {mass:e} negative probability mass")]
    NegativeMarginal { mass: f64 },

    #[error("phases {first} and {second} coincide modulo pi")]
    DuplicatePhases { first: usize, second: usize },

    #[error("order {order} needs at least {needed} phases, got {got}")]
    InsufficientPhases { order: usize, needed: usize, got: usize },

    #[error("inverse Radon transform needs at least {needed} phases, got {got}")]
    TooFewPhases { needed: usize, got: usize },

    #[error("no squeezing detected at any delay")]
    NoSqueezingDetected,

    #[error("covariance below the uncertainty bound (V_max V_min = {product})")]
    UnphysicalCovariance { product: f64 },

    #[error("spectral filter removes the entire probe spectrum")]
    EmptyPassband,
}

pub type Result<T> = core::result::Result<T, Error>;
