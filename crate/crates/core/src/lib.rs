//! Data-parallel evolutionary multi-objective optimization.
//!
//! Every operator works on whole populations at once: objective matrices
//! are `N × m` arrays, decisions are `N × d` arrays, and per-individual
//! control flow is replaced by masks and batched maps (see [`tensor`]).

pub mod error;
pub mod tensor;
pub mod rng;
pub mod problems;
pub mod reference;
pub mod variation;
pub mod ndsort;
pub mod nsga3;
pub mod moead;
pub mod hype;
pub mod rvea;
pub mod indicators;
pub mod sequential;
pub mod harness;

pub use error::{Error, Result};
pub use rng::RngStream;
