use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration; nothing was computed.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation does not apply to the requested defect.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Adaptive quadrature hit its refinement cap before reaching the target.
    #[error(
        "quadrature did not converge: error estimate {estimate:.3e} > target {target:.3e} \
         after {intervals} subintervals"
    )]
    Quadrature {
        estimate: f64,
        target: f64,
        intervals: usize,
    },

    /// A matrix entry could not be assembled.
    #[error("assembly failed at entry ({row}, {col}): {source}")]
    Assembly {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    /// The eigensolver failed or the input matrix was not Hermitian enough.
    #[error("spectral error: {0}")]
    Spectral(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the caller's configuration rather than by numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_) | Error::Unsupported(_))
    }
}
