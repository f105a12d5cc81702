//! Top-level simulation of a network over a sharded graph.

mod controller;
mod report;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::HardwareConfig;
use crate::costmodel::{best_order, nodes_per_block as capacity_nodes, CostInputs};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::FeatureMatrix;
use crate::network::{LayerSpec, NetworkSpec};
use crate::shard::{build_shard_grid, ShardGrid, SweepPattern, TraversalOrder};

pub use report::{
    ColumnTrace, DenseJobKind, DenseTrace, EngineStats, LayerReport, ShardTrace, SimReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataflowMode {
    /// Whole feature vectors resident; one pass per layer.
    #[default]
    Conventional,
    /// Features split into blocks of `block_size` dimensions.
    Blocked,
}

impl fmt::Display for DataflowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataflowMode::Conventional => "conventional",
            DataflowMode::Blocked => "blocked",
        })
    }
}

impl FromStr for DataflowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conventional" => Ok(DataflowMode::Conventional),
            "blocked" => Ok(DataflowMode::Blocked),
            _ => Err(Error::Config(format!("unknown dataflow {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderChoice {
    Src,
    Dst,
    /// Cheaper order by the closed-form model, per layer.
    #[default]
    Auto,
}

impl OrderChoice {
    pub fn resolve(self, shards: u64, input_sets: u64) -> TraversalOrder {
        match self {
            OrderChoice::Src => TraversalOrder::SourceStationary,
            OrderChoice::Dst => TraversalOrder::DestinationStationary,
            OrderChoice::Auto => best_order(&CostInputs::new(shards, input_sets)),
        }
    }
}

impl From<TraversalOrder> for OrderChoice {
    fn from(o: TraversalOrder) -> Self {
        match o {
            TraversalOrder::SourceStationary => OrderChoice::Src,
            TraversalOrder::DestinationStationary => OrderChoice::Dst,
        }
    }
}

impl fmt::Display for OrderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderChoice::Src => "src",
            OrderChoice::Dst => "dst",
            OrderChoice::Auto => "auto",
        })
    }
}

impl FromStr for OrderChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "src" => Ok(OrderChoice::Src),
            "dst" => Ok(OrderChoice::Dst),
            "auto" => Ok(OrderChoice::Auto),
            _ => Err(Error::Config(format!("unknown order {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataflowConfig {
    pub mode: DataflowMode,
    /// Dimensions per block; required when blocked, ignored otherwise.
    pub block_size: Option<usize>,
    pub order: OrderChoice,
    /// Nodes per shard block; `None` picks the largest that fits.
    pub nodes_per_block: Option<usize>,
    /// Source feature sets each source-set load brings on chip. Sets beyond
    /// the first model extra per-node inputs: they cost bytes and scratchpad
    /// space but do not enter the aggregation.
    pub input_sets: u64,
    pub sweep: SweepPattern,
}

impl Default for DataflowConfig {
    fn default() -> Self {
        Self {
            mode: DataflowMode::Conventional,
            block_size: None,
            order: OrderChoice::Auto,
            nodes_per_block: None,
            input_sets: 1,
            sweep: SweepPattern::Serpentine,
        }
    }
}

impl DataflowConfig {
    pub fn conventional() -> Self {
        Self::default()
    }

    pub fn blocked(block_size: usize) -> Self {
        Self {
            mode: DataflowMode::Blocked,
            block_size: Some(block_size),
            ..Self::default()
        }
    }

    pub fn with_order(self, order: impl Into<OrderChoice>) -> Self {
        Self {
            order: order.into(),
            ..self
        }
    }

    pub fn with_nodes_per_block(self, n: usize) -> Self {
        Self {
            nodes_per_block: Some(n),
            ..self
        }
    }

    /// Checks the block size against the first layer's aggregated width.
    pub fn validate(&self, net: &NetworkSpec) -> Result<()> {
        if self.input_sets == 0 {
            return Err(Error::Config("input_sets must be at least 1".into()));
        }
        if self.nodes_per_block == Some(0) {
            return Err(Error::Config("nodes_per_block must be at least 1".into()));
        }
        if self.mode == DataflowMode::Blocked {
            let dim = net.layers.first().map_or(0, LayerSpec::agg_dim);
            match self.block_size {
                Some(b) if b >= 1 && b <= dim => {}
                Some(b) => {
                    return Err(Error::Config(format!("block size {b} outside 1..={dim}")));
                }
                None => return Err(Error::Config("blocked dataflow needs a block size".into())),
            }
        }
        Ok(())
    }

    /// Resident width for a layer: the whole aggregated feature when
    /// conventional, otherwise the block size capped at that width.
    pub fn layer_width(&self, layer: &LayerSpec) -> usize {
        let dim = layer.agg_dim();
        match (self.mode, self.block_size) {
            (DataflowMode::Blocked, Some(b)) => b.min(dim),
            _ => dim,
        }
    }
}

/// How one layer is laid out on the hardware.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerGeometry {
    pub width: usize,
    /// Aggregated dimensions per pass.
    pub passes: Vec<Range<usize>>,
    /// Self-feature dimensions concatenated into each pass's extraction.
    pub self_ranges: Vec<Range<usize>>,
    pub nodes_per_block: usize,
    pub num_blocks: usize,
    pub order: TraversalOrder,
}

/// Contiguous blocks of `width`; the last may be short.
fn dim_blocks(dim: usize, width: usize) -> Vec<Range<usize>> {
    (0..dim.div_ceil(width))
        .map(|b| b * width..((b + 1) * width).min(dim))
        .collect()
}

fn edges_fit(graph: &Graph, n: usize, hw: &HardwareConfig) -> Result<bool> {
    let grid = build_shard_grid(graph, n)?;
    Ok(grid.max_shard_edges() as u64 * hw.graph.edge_bytes <= hw.graph.edge_bank_bytes())
}

pub fn layer_geometry(graph: &Graph, layer: &LayerSpec, hw: &HardwareConfig, df: &DataflowConfig) -> Result<LayerGeometry> {
    let width = df.layer_width(layer);
    let bank = hw.graph.feature_bank_bytes() as usize;
    let max_n = capacity_nodes(bank, width, df.input_sets as usize);
    if max_n == 0 {
        return Err(Error::Capacity(format!(
            "a {bank}-byte feature bank cannot hold one node at width {width}"
        )));
    }
    let num_nodes = graph.num_nodes().max(1);
    let n = match df.nodes_per_block {
        Some(n) if n > max_n => {
            return Err(Error::Capacity(format!(
                "{n} nodes per block exceed the {max_n} that fit at width {width}"
            )))
        }
        Some(n) => {
            if !edges_fit(graph, n, hw)? {
                return Err(Error::Capacity(format!("shards of {n} nodes overflow the edge bank")));
            }
            n
        }
        None => {
            // Largest n whose densest shard also fits the edge bank. Shard
            // density is not strictly monotone in n; the search treats it as
            // such and the result is re-checked.
            let hi = max_n.min(num_nodes);
            let n = if edges_fit(graph, hi, hw)? {
                hi
            } else {
                let (mut lo, mut hi) = (0, hi);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if edges_fit(graph, mid, hw)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            if n == 0 || !edges_fit(graph, n, hw)? {
                return Err(Error::Capacity("no block size fits the edge bank".into()));
            }
            n
        }
    };
    let num_blocks = num_nodes.div_ceil(n);
    let passes = dim_blocks(layer.agg_dim(), width);
    // Self dimensions follow the same blocks; any beyond the last
    // aggregated pass join it.
    let p = passes.len();
    let self_ranges = (0..p)
        .map(|b| {
            if !layer.concat_self {
                return 0..0;
            }
            let lo = (b * width).min(layer.in_dim);
            let hi = if b + 1 == p { layer.in_dim } else { ((b + 1) * width).min(layer.in_dim) };
            lo..hi
        })
        .collect();
    Ok(LayerGeometry {
        width,
        self_ranges,
        passes,
        nodes_per_block: n,
        num_blocks,
        order: df.order.resolve(num_blocks as u64, df.input_sets),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Compute feature values; timing and traffic never depend on them.
    pub functional: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { functional: true }
    }
}

fn validate_inputs(graph: &Graph, h: &FeatureMatrix, net: &NetworkSpec, hw: &HardwareConfig, df: &DataflowConfig) -> Result<()> {
    if graph.num_nodes() == 0 {
        return Err(Error::Validation("graph has no nodes".into()));
    }
    if net.layers.is_empty() {
        return Err(Error::Validation("network has no layers".into()));
    }
    net.validate()?;
    hw.validate()?;
    df.validate(net)?;
    if h.num_nodes() != graph.num_nodes() || Some(h.dim()) != net.in_dim() {
        return Err(Error::Shape(format!(
            "features are {}x{}, expected {}x{}",
            h.num_nodes(),
            h.dim(),
            graph.num_nodes(),
            net.in_dim().unwrap_or(0)
        )));
    }
    Ok(())
}

pub fn run(graph: &Graph, h: &FeatureMatrix, net: &NetworkSpec, hw: &HardwareConfig, df: &DataflowConfig) -> Result<SimReport> {
    run_with(graph, h, net, hw, df, RunOptions::default())
}

pub fn run_with(
    graph: &Graph,
    h: &FeatureMatrix,
    net: &NetworkSpec,
    hw: &HardwareConfig,
    df: &DataflowConfig,
    opts: RunOptions,
) -> Result<SimReport> {
    validate_inputs(graph, h, net, hw, df)?;
    let mut layouts: Vec<(LayerGeometry, ShardGrid)> = Vec::with_capacity(net.layers.len());
    for layer in &net.layers {
        let geo = layer_geometry(graph, layer, hw, df)?;
        let grid = build_shard_grid(graph, geo.nodes_per_block)?;
        layouts.push((geo, grid));
    }
    controller::simulate(graph, h, net, hw, df, &layouts, opts)
}
