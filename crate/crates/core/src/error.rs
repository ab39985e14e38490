use thiserror::Error;

/// Errors produced by the simulator and its analysis tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("uniaxial projection undefined (eigenvalue gap {gap:.3e})")]
    ProjectionUndefined { gap: f64 },

    #[error("solver failure after {steps} steps: {reason} (residual {residual:.3e}, dt {dt:.3e})")]
    SolverFailure {
        reason: String,
        steps: usize,
        residual: f64,
        dt: f64,
    },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("loop sample at ({rho:.4}, {z:.4}) is not uniaxial enough to project")]
    BadLoop { rho: f64, z: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverFailure { .. } | Error::NumericFailure(_) => 2,
            Error::Format { .. } | Error::UnsupportedVersion { .. } => 4,
            _ => 3,
        }
    }
}
