//! Error type shared across the crate, with the CLI exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, parameters, or command-line input. The message
    /// names the offending key or flag.
    #[error("configuration error: {0}")]
    Config(String),

    /// The integrator's norm drift exceeded tolerance; the state can no
    /// longer be trusted. Carries the time at which the check tripped.
    #[error(
        "integration diverged at t = {t_s:.6e} s: |norm - 1| = {norm_err:.3e} \
         exceeds tolerance {tolerance:.1e}"
    )]
    Diverged { t_s: f64, norm_err: f64, tolerance: f64 },

    /// An unwrapped phase track advanced too far between output samples, so
    /// the fold into (-pi, pi] is no longer trustworthy.
    #[error(
        "phase sampling too coarse at t = {t_s:.6e} s: {what} advanced \
         {step_rad:.3} rad between consecutive samples; reduce stride_ps"
    )]
    PhaseAliasing { t_s: f64, what: String, step_rad: f64 },

    /// The requested target phase was never crossed within the horizon.
    /// This is an answer, not a tool failure; it still gets a distinct exit
    /// code so scripts can branch on it.
    #[error(
        "target phase {target_rad:.6} rad not reached within {horizon_ns:.4} ns \
         (theta spanned [{theta_min_rad:.6}, {theta_max_rad:.6}] rad)"
    )]
    NotReached {
        target_rad: f64,
        horizon_ns: f64,
        theta_min_rad: f64,
        theta_max_rad: f64,
    },

    /// No (r, frequency-convention) candidate reproduced the target gate
    /// time acceptably. The message lists the best near-misses.
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit codes documented in the CLI help and README:
    /// 2 config error, 3 integration divergence or phase aliasing,
    /// 4 target phase not reached, 5 calibration failed, 1 I/O or other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Diverged { .. } | Error::PhaseAliasing { .. } => 3,
            Error::NotReached { .. } => 4,
            Error::CalibrationFailed(_) => 5,
            Error::Io(_) => 1,
        }
    }
}
