use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Several configuration problems found at once (config files report all of them).
    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    ConfigList(Vec<String>),

    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },

    /// A combination that exists in principle but is not supported here.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical divergence at step {step}: {what}")]
    Divergence { step: usize, what: String },

    #[error("no convergence after {iterations} iterations (last energy {last_energy})")]
    Convergence { iterations: usize, last_energy: f64 },

    /// Caller passed mismatched shapes or too little data.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 config, 3 numerical, 4 unsupported, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigList(_) | Error::Syntax { .. } | Error::Usage(_) => 2,
            Error::Divergence { .. } | Error::Convergence { .. } => 3,
            Error::Unsupported(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
