use thiserror::Error;

pub type Result<T, E = PowerError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("invalid data: {0}")]
    Data(String),
    #[error("invalid tree: {0}")]
    Tree(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error(transparent)]
    Solver(#[from] benders_core::Error),
}

impl PowerError {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        PowerError::Data(msg.into())
    }
}
