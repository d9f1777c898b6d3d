use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("did not converge: {what}")]
    NonConvergence { what: String, best: Vec<Complex64> },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("inconsistent state: {0}")]
    Internal(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl DynError {
    /// Stable short tag for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            DynError::Domain(_) => "domain",
            DynError::Parse { .. } => "parse",
            DynError::UnboundParameter(_) => "unbound_parameter",
            DynError::NonConvergence { .. } => "non_convergence",
            DynError::Budget(_) => "budget",
            DynError::Singular(_) => "singular",
            DynError::Internal(_) => "internal",
            DynError::Input(_) => "input",
        }
    }
}

pub type Result<T> = std::result::Result<T, DynError>;
