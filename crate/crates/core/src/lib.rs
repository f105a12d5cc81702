//! Cycle-level simulator and analytical cost model for a GNN inference
//! accelerator with a dense matrix engine and a graph aggregation engine.

pub mod config;
pub mod costmodel;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod matrix;
pub mod memory;
pub mod network;
pub mod report;
pub mod schedule;
pub mod shard;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, NodeId};
pub use matrix::{FeatureMatrix, Matrix};
pub use config::HardwareConfig;
pub use network::{NetworkKind, NetworkSpec};
pub use shard::TraversalOrder;
pub use sim::{run, run_with, DataflowConfig, DataflowMode, OrderChoice, RunOptions, SimReport};
