use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure modes each
/// operation documents; the CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GravitasError {
    #[error("configuration shape: {0}")]
    ConfigShape(String),
    #[error("leg {leg} is off-shell: |p^2 + m^2| = {residual:e} exceeds tolerance")]
    OffShell { leg: usize, residual: f64 },
    #[error("four-momentum not conserved: relative residual {residual:e}")]
    NotConserved { residual: f64 },
    #[error("boost speed |beta| = {beta} is not below 1")]
    SuperluminalBoost { beta: f64 },
    #[error("below threshold: sqrt(s) = {sqrt_s} < {threshold}")]
    BelowThreshold { sqrt_s: f64, threshold: f64 },
    #[error("propagator pole hit: |denominator| = {denominator:e}")]
    Pole { denominator: f64 },
    #[error("closed-form numerator {closed:e} disagrees with tensor contraction {contracted:e}")]
    ContractMismatch { closed: f64, contracted: f64 },
    #[error("spectator momenta differ; the disconnected delta vanishes")]
    SpectatorMismatch,
    #[error("path does not cross the pole on [{lo}, {hi}]")]
    NoPoleCrossing { lo: f64, hi: f64 },
    #[error("separation must be positive, got {0}")]
    NonpositiveSeparation(f64),
    #[error("gamma*dt = {gamma_dt} exceeds the accuracy guard 0.1")]
    StepSize { gamma_dt: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, GravitasError>;
