use thiserror::Error;

use crate::constants::LadderRung;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("circulant embedding has eigenvalue {min_eigenvalue:e} below tolerance (largest {max_eigenvalue:e}, size {size})")]
    Embedding {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
        size: usize,
    },

    #[error("coordinate {index}: {source}")]
    Coordinate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: String },

    #[error("Pareto frontier of {frontier} points in dimension {dim} exceeds the inclusion-exclusion cap of {cap}")]
    FrontierTooLarge { dim: usize, frontier: usize, cap: usize },

    #[error("horizon ladder did not converge after {} rungs", .ladder.len())]
    NonConvergence { ladder: Vec<LadderRung> },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),

    #[error("no closed form available: {0}")]
    NoClosedForm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_coordinate(self, index: usize) -> Self {
        Error::Coordinate {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
