use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// More than one stationary mode, so the steady state is not unique.
    #[error("ambiguous steady state: null space has dimension {null_dim}")]
    AmbiguousSteadyState { null_dim: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable machine-readable category, used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Unsupported(_) => "unsupported-input",
            Error::AmbiguousSteadyState { .. } => "ambiguous-steady-state",
            Error::Numerical(_) => "numerical-failure",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
