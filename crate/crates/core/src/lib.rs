//! Out-of-core graph processing over destination-sorted sub-shards.

pub mod cost_model;
pub mod engine;
pub mod error;
pub mod graph_model;
pub mod kernels;
pub mod preprocess;
pub mod storage;
pub mod synth;

pub use error::{Error, Result};
