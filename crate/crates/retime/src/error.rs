use thiserror::Error;

/// Errors produced by the toolkit.
///
/// `NonFinite` is an expected outcome of the explicit-instability
/// demonstrations, not a bug; it always carries the failing step.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite state component at step {step}")]
    NonFinite { step: usize },

    #[error("step size underflow: h = {h:.3e} < h_min = {h_min:.3e} at t = {t:.6e}")]
    StepSizeUnderflow { h: f64, h_min: f64, t: f64 },

    #[error("exceeded {max_steps} steps at t = {t:.6e}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(String),

    #[error("abscissa not strictly increasing at index {index}")]
    NonMonotoneAbscissa { index: usize },

    #[error("time map not monotone: {0}")]
    NonMonotoneTimeMap(String),

    #[error("speed-profile optimizer diverged: {0}")]
    OptimizerDiverged(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown system '{0}' (expected one of: sls, vdp, hires)")]
    UnknownSystem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
