use std::path::PathBuf;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("infeasible configuration: {0}")]
    InfeasibleConfiguration(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("problem size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance has no feasible states")]
    EmptyFeasibleSet,

    #[error("no root of mu*(lambda) = {target} in [{lo}, {hi}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("chi is undefined because P(0) = {0}")]
    UndefinedChi(f64),

    #[error("probability series is corrupt: {0}")]
    DataCorruption(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("integration failed at s = {s} with step {step}: norm drift {drift:e}")]
    IntegrationFailure { s: f64, step: f64, drift: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolve(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidArgument(_) => 2,
            Error::InfeasibleConfiguration(_) => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
