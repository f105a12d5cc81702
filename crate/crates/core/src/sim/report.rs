use serde::Serialize;

use crate::matrix::Matrix;
use crate::memory::DramStats;
use crate::schedule::SweepCounts;
use crate::shard::{ShardCoord, TraversalOrder};

/// Cycle breakdown of one engine; the four fields sum to the run length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EngineStats {
    /// Computing.
    pub busy: u64,
    /// Waiting on its own transfers.
    pub memory_stall: u64,
    /// Waiting on the other engine.
    pub sync_stall: u64,
    /// No work left in the current layer.
    pub idle: u64,
}

impl EngineStats {
    pub fn total(&self) -> u64 {
        self.busy + self.memory_stall + self.sync_stall + self.idle
    }

    pub fn stalls(&self) -> u64 {
        self.memory_stall + self.sync_stall
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerReport {
    pub index: usize,
    pub order: TraversalOrder,
    pub width: usize,
    pub passes: usize,
    pub nodes_per_block: usize,
    pub num_blocks: usize,
    pub start_cycle: u64,
    pub end_cycle: u64,
    /// Shard-set transfers summed over the layer's passes.
    pub src_set_loads: u64,
    pub dst_reloads: u64,
    pub dst_stores: u64,
    pub input_sets: u64,
}

impl LayerReport {
    pub fn counts(&self) -> SweepCounts {
        SweepCounts {
            src_set_loads: self.src_set_loads,
            dst_reloads: self.dst_reloads,
            dst_stores: self.dst_stores,
        }
    }

    pub fn cycles(&self) -> u64 {
        self.end_cycle - self.start_cycle
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShardTrace {
    pub layer: usize,
    pub pass: usize,
    pub coord: ShardCoord,
    pub edges: u64,
    pub edge_bytes: u64,
    pub src_bytes: u64,
    pub reload_bytes: u64,
    pub store_bytes: u64,
    pub final_store: bool,
    pub fetch_issue: u64,
    pub fetch_done: u64,
    pub compute_start: u64,
    pub compute_done: u64,
    pub writeback_done: u64,
}

impl ShardTrace {
    pub fn compute_cycles(&self) -> u64 {
        self.compute_done - self.compute_start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseJobKind {
    /// Per-node transform ahead of aggregation.
    Pool,
    /// Post-aggregation feature extraction.
    Extract,
}

impl DenseJobKind {
    pub fn name(self) -> &'static str {
        match self {
            DenseJobKind::Pool => "pool",
            DenseJobKind::Extract => "extract",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DenseTrace {
    pub layer: usize,
    pub kind: DenseJobKind,
    pub pass: usize,
    pub block: usize,
    pub m: u64,
    pub k: u64,
    pub n: u64,
    pub accumulate: bool,
    pub input_bytes: u64,
    pub weight_bytes: u64,
    pub partial_bytes: u64,
    pub output_bytes: u64,
    pub load_issue: u64,
    pub load_done: u64,
    pub compute_start: u64,
    pub compute_done: u64,
    pub store_done: u64,
}

impl ShardTrace {
    pub(crate) fn new(layer: usize, pass: usize, coord: ShardCoord) -> Self {
        Self {
            layer,
            pass,
            coord,
            edges: 0,
            edge_bytes: 0,
            src_bytes: 0,
            reload_bytes: 0,
            store_bytes: 0,
            final_store: false,
            fetch_issue: 0,
            fetch_done: 0,
            compute_start: 0,
            compute_done: 0,
            writeback_done: 0,
        }
    }
}

/// When a destination block's aggregates for one pass reached memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnTrace {
    pub layer: usize,
    pub pass: usize,
    pub block: usize,
    pub complete: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub total_cycles: u64,
    pub clock_ghz: f64,
    pub graph_engine: EngineStats,
    pub dense_engine: EngineStats,
    pub dram: DramStats,
    pub layers: Vec<LayerReport>,
    /// Final-layer features; `None` when run without values.
    pub output: Option<Matrix>,
    pub shards: Vec<ShardTrace>,
    pub dense_jobs: Vec<DenseTrace>,
    pub columns: Vec<ColumnTrace>,
}

impl SimReport {
    pub fn seconds(&self) -> f64 {
        self.total_cycles as f64 / (self.clock_ghz * 1e9)
    }

    /// Graph-engine feature bytes read and written.
    pub fn feature_bytes(&self) -> u64 {
        let f = self.dram.stream(crate::memory::Stream::Features);
        f.read + f.write
    }

    pub fn offchip_bytes(&self) -> u64 {
        self.dram.read_bytes + self.dram.write_bytes
    }
}
