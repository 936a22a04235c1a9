use thiserror::Error;

/// Errors produced by the consensus toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The second-smallest Laplacian eigenvalue is not positive.
    #[error("graph is disconnected (lambda_2 = {lambda2:e})")]
    DisconnectedGraph { lambda2: f64 },

    /// A round function could not reach its tolerance. Carries the
    /// residual that exceeded `theta`.
    #[error("optimization failed: residual {residual:e} >= theta {theta:e}")]
    OptimizationFailed { residual: f64, theta: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
