//! Model-merging toolkit: checkpoint container, task-vector merging, parameter
//! conflict metrics, hidden-state mergeability diagnostics, minimum enclosing
//! ball distortion bounds and the significance tests used to relate them to
//! merging loss.

pub mod cli;
pub mod conflict_metrics;
pub mod error;
pub mod merge_engine;
pub mod numeric;
pub mod repr_diag;
pub mod stats;
pub mod tensor_store;
pub mod theory;

pub use error::{Error, Result};
