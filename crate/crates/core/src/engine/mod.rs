//! Timing and functional models of the two compute engines.

pub mod dense;
pub mod graph;

pub use dense::{dense_cycles, dense_execute, dense_weight_traffic, DenseConfig, MatmulJob};
pub use graph::{shard_compute, shard_fetch_cycles, shard_writeback_cycles, GraphEngineConfig, ShardJob};
