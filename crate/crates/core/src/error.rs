use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fixed point did not converge (last residual {residual:.3e})")]
    FixedPoint { residual: f64 },

    #[error("instability detected at t = {time:.6e} s: {reason}")]
    Instability { time: f64, reason: String },

    #[error("no periodic closure after {periods} periods (closure gap {gap:.3e})")]
    NonConvergence { periods: usize, gap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular linear system ({0})")]
    Singular(String),

    #[error("above parametric threshold: alpha = {alpha} >= 2 gamma / omega0 = {threshold}")]
    AboveThreshold { alpha: f64, threshold: f64 },

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::Json(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}
