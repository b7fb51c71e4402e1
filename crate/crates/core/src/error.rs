use thiserror::Error;

use crate::lp::{BackendError, SolveStatus};
use crate::problem::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("problem failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{context}: solver returned {status:?}")]
    Solve {
        context: String,
        status: SolveStatus,
    },
    #[error("monolithic program has {nonzeros} nonzeros, above the cap of {cap}")]
    TooLarge { nonzeros: usize, cap: usize },
    #[error("oracle query outside the seeded domain: {0}")]
    OracleDomain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn solve(context: impl Into<String>, status: SolveStatus) -> Self {
        Error::Solve {
            context: context.into(),
            status,
        }
    }

    pub(crate) fn at(self, iteration: usize) -> Self {
        match self {
            e @ Error::AtIteration { .. } => e,
            e => Error::AtIteration {
                iteration,
                source: Box::new(e),
            },
        }
    }
}
