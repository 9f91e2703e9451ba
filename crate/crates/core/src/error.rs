use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("eigenvalues {level_a} and {level_b} are degenerate (split {split:e} Hz)")]
    Degenerate {
        level_a: usize,
        level_b: usize,
        split: f64,
    },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integrator gave up after {steps} steps at t = {t:e} s")]
    StepLimit { steps: usize, t: f64 },

    #[error("integration produced a non-finite state at t = {t:e} s")]
    NonFinite { t: f64 },

    #[error("no design point satisfies the constraints: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) => 2,
            Error::Degenerate { .. }
            | Error::StepUnderflow { .. }
            | Error::StepLimit { .. }
            | Error::NonFinite { .. } => 3,
            Error::Infeasible(_) => 4,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
