use benders_power::PowerError;
use thiserror::Error;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Engine(#[from] benders_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Unreadable or malformed trace or summary.
    #[error("{path}: {message}")]
    Artifact { path: String, message: String },
    #[error("{engine} stopped after {iterations} iterations with gap {gap:.3e}")]
    NotConverged {
        engine: String,
        iterations: usize,
        gap: f64,
    },
    #[error("{0} run(s) failed")]
    RunsFailed(usize),
    #[error("verification failed:\n{}", .0.join("\n"))]
    Verify(Vec<String>),
}

/// Process exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const INVALID: i32 = 4;
    pub const SOLVER: i32 = 5;
    pub const NOT_CONVERGED: i32 = 6;
    pub const VERIFY: i32 = 7;
}

fn engine_code(e: &benders_core::Error) -> i32 {
    use benders_core::Error as E;
    match e {
        E::Config(_) => exit::USAGE,
        E::Invalid(_) | E::Dimension { .. } | E::TooLarge { .. } => exit::INVALID,
        E::AtIteration { source, .. } => engine_code(source),
        _ => exit::SOLVER,
    }
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => exit::USAGE,
            BenchError::Power(e) => match e {
                PowerError::Parse { .. } | PowerError::Csv { .. } | PowerError::Io { .. } => exit::INPUT,
                PowerError::Data(_) | PowerError::Tree(_) => exit::INVALID,
                PowerError::Solver(inner) => engine_code(inner),
            },
            BenchError::Engine(e) => engine_code(e),
            BenchError::Artifact { .. } => exit::INPUT,
            BenchError::Io { .. } => exit::OTHER,
            BenchError::RunsFailed(_) => exit::SOLVER,
            BenchError::NotConverged { .. } => exit::NOT_CONVERGED,
            BenchError::Verify(_) => exit::VERIFY,
        }
    }

    pub(crate) fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
        move |source| BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn artifact(path: &std::path::Path, message: impl std::fmt::Display) -> BenchError {
        BenchError::Artifact {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }
}
