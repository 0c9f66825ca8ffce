use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A covariance matrix violates symmetry, positivity or the uncertainty principle.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A mode index or mode count does not match the state.
    #[error("mode error: {0}")]
    Mode(String),

    /// The equal-power constraint cannot be met with the requested source parameters.
    #[error("infeasible power constraint: {0}")]
    Infeasible(String),

    /// A correlation matrix does not have the expected block structure.
    #[error("correlation structure error: {0}")]
    Structure(String),

    /// A state has zero variance in some quadrature.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// The reference state is (numerically) pure on some mode, so the
    /// relative entropy is infinite.
    #[error("support error: {0}")]
    Support(String),

    /// A first-order approximation is evaluated outside the region where it is defined.
    #[error("regime error: {0}")]
    Regime(String),

    /// A Fock-space truncation is too coarse for the requested accuracy.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
