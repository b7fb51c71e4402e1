//! Multi-horizon stochastic power-system investment planning as a
//! block-structured problem for the Benders engines.

pub mod cases;
pub mod data;
pub mod error;
pub mod io;
pub mod model;
pub mod tree;
pub mod vss;

pub use cases::{generate_synthetic, generate_toy_case, SyntheticSpec, ToyCase, ToyParams};
pub use data::{Economics, GridTopology, OperationalProfile, TechKind, TechnologyData};
pub use error::{PowerError, Result};
pub use io::{load_instance, write_instance};
pub use model::{build_model, PowerInstance, PowerModel};
pub use tree::{build_tree, MultiHorizonTree, TreeSpec};
pub use vss::{compute_vss, VssReport};
