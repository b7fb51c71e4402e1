//! Benders decomposition for block-structured linear programs: exact cuts,
//! adaptive oracles and level-set stabilisation.

pub mod adaptive;
pub mod cuts;
pub mod error;
pub mod level_set;
pub mod lp;
pub mod master;
pub mod oracles;
pub mod problem;
pub mod run;
pub mod sparse;
pub mod standard;
pub mod subproblem;

pub use adaptive::{run_adaptive, run_adaptive_with_store, EngineConfig};
pub use error::{Error, Result};
pub use level_set::StabilisationConfig;
pub use lp::{backend_from_env, HighsBackend, LinearProgram, LpBackend, SolverOptions};
pub use problem::{assemble_monolithic, DecisionNode, MasterBlock, StructuredProblem, SubproblemTemplate};
pub use run::{IterationRecord, RunResult, RunStatus};
pub use sparse::SparseMatrix;
pub use standard::{run_standard, StandardConfig};
