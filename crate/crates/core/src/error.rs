use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("quadrature did not converge on [{lower}, {upper}]: estimated error {error:e} after {intervals} intervals")]
    QuadratureNonConvergence {
        lower: f64,
        upper: f64,
        error: f64,
        intervals: usize,
    },

    #[error("inconsistent plot: {0}")]
    Plot(String),

    #[error("malformed step log: {0}")]
    StepLog(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
