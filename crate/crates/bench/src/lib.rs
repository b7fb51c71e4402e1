//! Experiment runner behind the `benders-bench` CLI: engine runs, trace and
//! summary artifacts, comparisons and the trace verifier.

pub mod artifacts;
pub mod error;
pub mod experiment;
pub mod verify;

pub use artifacts::{read_summary, read_trace, write_run, RunSummary};
pub use error::{exit, BenchError, Result};
pub use experiment::{compare, run_engine, CompareRow, Engine, RunSpec};
pub use verify::{check_records, check_summary, verify_path, VerifyReport};
