use thiserror::Error;

/// Errors raised by the pricing engines and their configuration layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("`{name}` = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("unstable grid: max σ²k/h² = {ratio:.6e} exceeds 1/(1-θ) = {bound:.6e} (θ = {theta})")]
    UnstableGrid { ratio: f64, bound: f64, theta: f64 },

    #[error("tridiagonal system is not diagonally dominant at row {row}")]
    NotDiagonallyDominant { row: usize },

    #[error("no analytic reference is available for {0}")]
    MissingOracle(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Domain { .. } => "domain",
            Error::UnstableGrid { .. } => "unstable_grid",
            Error::NotDiagonallyDominant { .. } => "not_diagonally_dominant",
            Error::MissingOracle(_) => "missing_oracle",
            Error::Io(_) => "io",
            Error::Config(_) => "config",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
