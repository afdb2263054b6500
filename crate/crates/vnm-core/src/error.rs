use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("stability envelope exceeded: {0}")]
    Envelope(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Quadrature refinement stalled; carries the best estimate reached so the
    /// caller can decide whether it is still usable.
    #[error(
        "quadrature did not converge: relative change {achieved:.3e} above tolerance \
         {tolerance:.3e} (achieved estimate {estimate:.17e})"
    )]
    QuadratureNoConvergence {
        estimate: f64,
        achieved: f64,
        tolerance: f64,
    },

    #[error("dimension guard: {0}")]
    DimensionGuard(String),

    #[error("linear algebra backend failure: {0}")]
    Linalg(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
