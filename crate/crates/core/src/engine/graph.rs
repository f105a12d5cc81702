//! Graph engine: shard fetch, GPE compute, writeback.
//!
//! Edges go to GPE `dst mod G`, so each destination's partial sum is owned by
//! one GPE. A GPE spends one cycle fetching an edge record and then
//! `ceil(B / simd_width)` cycles of apply/reduce over the resident dimensions.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::matrix::Matrix;
use crate::memory::{Dram, Request, Requestor, Stream};
use crate::network::Aggregator;
use crate::shard::{ShardCoord, ShardGrid};

const MIB: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphEngineConfig {
    pub num_gpes: u64,
    pub simd_width: u64,
    pub feature_scratch: u64,
    pub edge_scratch: u64,
    /// Bytes per edge record.
    pub edge_bytes: u64,
}

impl Default for GraphEngineConfig {
    fn default() -> Self {
        Self {
            num_gpes: 32,
            simd_width: 32,
            feature_scratch: 16 * MIB,
            edge_scratch: 8 * MIB,
            edge_bytes: 8,
        }
    }
}

impl GraphEngineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_gpes", self.num_gpes),
            ("simd_width", self.simd_width),
            ("feature_scratch", self.feature_scratch),
            ("edge_scratch", self.edge_scratch),
            ("edge_bytes", self.edge_bytes),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("graph.{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn feature_bank_bytes(&self) -> u64 {
        self.feature_scratch / 2
    }

    pub fn edge_bank_bytes(&self) -> u64 {
        self.edge_scratch / 2
    }

    /// Cycles one GPE spends on one edge at the given resident width.
    pub fn edge_cost(&self, width: usize) -> u64 {
        1 + (width as u64).div_ceil(self.simd_width)
    }
}

/// One shard's worth of graph-engine work within a dimension block.
#[derive(Clone, Debug)]
pub struct ShardJob<'a> {
    pub coord: ShardCoord,
    /// Edge indices into the grid, in edge-list order.
    pub edges: &'a [u32],
    /// Resident feature dimensions.
    pub dims: Range<usize>,
    pub aggregator: Aggregator,
    pub needs_partial_reload: bool,
    /// Nodes whose own feature is folded in after the edges (diagonal shards).
    pub self_nodes: Option<Range<NodeId>>,
}

impl ShardJob<'_> {
    pub fn width(&self) -> usize {
        self.dims.len()
    }
}

/// Bytes one shard fetch moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FetchBytes {
    pub edges: u64,
    pub features: u64,
}

impl FetchBytes {
    /// Edge records plus `(src_nodes + dst_nodes) · B · 4` feature bytes.
    pub fn for_job(cfg: &GraphEngineConfig, job: &ShardJob<'_>, src_nodes: u64, dst_nodes: u64) -> Self {
        Self {
            edges: job.edges.len() as u64 * cfg.edge_bytes,
            features: (src_nodes + dst_nodes) * job.width() as u64 * 4,
        }
    }

    pub fn check_fits(&self, cfg: &GraphEngineConfig) -> Result<()> {
        if self.edges > cfg.edge_bank_bytes() || self.features > cfg.feature_bank_bytes() {
            return Err(Error::Capacity(format!(
                "shard needs {} edge and {} feature bytes; banks hold {} and {}",
                self.edges,
                self.features,
                cfg.edge_bank_bytes(),
                cfg.feature_bank_bytes()
            )));
        }
        Ok(())
    }
}

fn issue_and_wait(dram: &mut Dram, reqs: &[Request]) -> Result<u64> {
    let start = dram.now();
    let mut pending = Vec::new();
    for r in reqs.iter().filter(|r| r.bytes > 0) {
        pending.push(dram.request(*r)?);
    }
    while !pending.is_empty() {
        let done = dram.tick();
        pending.retain(|id| !done.contains(id));
    }
    Ok(dram.now() - start)
}

/// Issues the edge and feature transfers together and waits for both.
pub fn shard_fetch_cycles(cfg: &GraphEngineConfig, bytes: &FetchBytes, dram: &mut Dram) -> Result<u64> {
    bytes.check_fits(cfg)?;
    issue_and_wait(
        dram,
        &[
            Request::read(Requestor::GRAPH_FETCH, bytes.edges, Stream::Edges),
            Request::read(Requestor::GRAPH_FETCH, bytes.features, Stream::Features),
        ],
    )
}

/// Writes `dst_nodes` partial rows of the resident width.
pub fn shard_writeback_cycles(dst_nodes: u64, width: usize, dram: &mut Dram) -> Result<u64> {
    issue_and_wait(
        dram,
        &[Request::write(Requestor::GRAPH_WRITEBACK, dst_nodes * width as u64 * 4, Stream::Features)],
    )
}

/// Slowest GPE's cycle count; self terms cost one edge each.
pub fn compute_cycles(cfg: &GraphEngineConfig, grid: &ShardGrid, job: &ShardJob<'_>) -> u64 {
    let gpes = cfg.num_gpes as usize;
    let cost = cfg.edge_cost(job.width());
    let mut load = vec![0u64; gpes];
    for &i in job.edges {
        load[grid.edge(i).dst as usize % gpes] += cost;
    }
    if let Some(nodes) = &job.self_nodes {
        for v in nodes.clone() {
            load[v as usize % gpes] += cost;
        }
    }
    load.into_iter().max().unwrap_or(0)
}

/// Reduces every edge's source features into its destination's partials,
/// then folds in the self terms; returns the compute cycles.
pub fn shard_compute(
    cfg: &GraphEngineConfig,
    grid: &ShardGrid,
    job: &ShardJob<'_>,
    features: &Matrix,
    partials: &mut Matrix,
) -> Result<u64> {
    if job.dims.end > features.cols() || job.dims.end > partials.cols() || job.dims.is_empty() {
        return Err(Error::Protocol(format!(
            "dims {:?} outside the resident {} columns",
            job.dims,
            features.cols().min(partials.cols())
        )));
    }
    let agg = job.aggregator;
    let dims = job.dims.clone();
    let fold = |partials: &mut Matrix, u: NodeId, v: NodeId| {
        let src = &features.row(u as usize)[dims.clone()];
        let dst = &mut partials.row_mut(v as usize)[dims.clone()];
        for (p, &x) in dst.iter_mut().zip(src) {
            *p = agg.reduce(*p, x);
        }
    };
    for &i in job.edges {
        let e = grid.edge(i);
        if grid.block_of(e.src) != job.coord.src || grid.block_of(e.dst) != job.coord.dst {
            return Err(Error::Protocol(format!("edge {i} does not belong to shard {:?}", job.coord)));
        }
        fold(partials, e.src, e.dst);
    }
    if let Some(nodes) = &job.self_nodes {
        for v in nodes.clone() {
            fold(partials, v, v);
        }
    }
    Ok(compute_cycles(cfg, grid, job))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, random_features, Graph};
    use crate::memory::DramConfig;
    use crate::shard::build_shard_grid;
    use proptest::prelude::*;

    fn cfg(gpes: u64, simd: u64) -> GraphEngineConfig {
        GraphEngineConfig {
            num_gpes: gpes,
            simd_width: simd,
            ..GraphEngineConfig::default()
        }
    }

    fn job<'a>(grid: &'a ShardGrid, coord: ShardCoord, dims: Range<usize>) -> ShardJob<'a> {
        ShardJob {
            coord,
            edges: grid.shard(coord),
            dims,
            aggregator: Aggregator::MeanIncludeSelf,
            needs_partial_reload: false,
            self_nodes: None,
        }
    }

    fn dram() -> Dram {
        Dram::new(DramConfig {
            bandwidth_bytes_per_cycle: 64,
            base_latency: 0,
        })
        .unwrap()
    }

    #[test]
    fn one_edge_full_simd_is_two_cycles() {
        let g = Graph::from_pairs(2, &[(0, 1)]).unwrap();
        let grid = build_shard_grid(&g, 2).unwrap();
        let j = job(&grid, ShardCoord::new(0, 0), 0..32);
        assert_eq!(compute_cycles(&cfg(4, 32), &grid, &j), 2);
    }

    #[test]
    fn slowest_gpe_bounds_compute() {
        // Destinations 0, 2, 4 map to GPE 0 and 1 maps to GPE 1.
        let g = Graph::from_pairs(6, &[(5, 0), (5, 2), (5, 4), (5, 1)]).unwrap();
        let grid = build_shard_grid(&g, 6).unwrap();
        let j = job(&grid, ShardCoord::new(0, 0), 0..8);
        assert_eq!(compute_cycles(&cfg(2, 8), &grid, &j), 3 * 2);
    }

    #[test]
    fn fetch_bytes_and_cycles() {
        let g = Graph::from_pairs(4, &[(0, 2), (1, 3)]).unwrap();
        let grid = build_shard_grid(&g, 4).unwrap();
        let j = job(&grid, ShardCoord::new(0, 0), 0..16);
        let c = cfg(1, 16);
        let b = FetchBytes::for_job(&c, &j, 2, 2);
        assert_eq!(b, FetchBytes { edges: 16, features: 256 });
        let mut d = dram();
        assert_eq!(shard_fetch_cycles(&c, &b, &mut d).unwrap(), (256 + 16u64).div_ceil(64));
        assert_eq!(shard_fetch_cycles(&c, &FetchBytes::default(), &mut d).unwrap(), 0);
        let tiny = GraphEngineConfig { feature_scratch: 256, ..c };
        assert!(matches!(shard_fetch_cycles(&tiny, &b, &mut d), Err(Error::Capacity(_))));
    }

    #[test]
    fn writeback_bytes() {
        let mut d = dram();
        assert_eq!(shard_writeback_cycles(0, 16, &mut d).unwrap(), 0);
        assert_eq!(shard_writeback_cycles(4, 16, &mut d).unwrap(), 4);
        assert_eq!(d.stats().write_bytes, 256);
    }

    #[test]
    fn dims_outside_residency_rejected() {
        let g = Graph::from_pairs(2, &[(0, 1)]).unwrap();
        let grid = build_shard_grid(&g, 2).unwrap();
        let h = random_features(2, 4, 0);
        let mut p = Matrix::zeros(2, 4);
        let j = job(&grid, ShardCoord::new(0, 0), 2..6);
        assert!(matches!(shard_compute(&cfg(1, 1), &grid, &j, &h, &mut p), Err(Error::Protocol(_))));
    }

    #[test]
    fn compute_reduces_block_dims_only() {
        let g = Graph::from_pairs(3, &[(0, 2), (1, 2)]).unwrap();
        let grid = build_shard_grid(&g, 3).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, 10.0], vec![2.0, 20.0], vec![4.0, 40.0]]).unwrap();
        let mut p = Matrix::zeros(3, 2);
        let mut j = job(&grid, ShardCoord::new(0, 0), 1..2);
        j.self_nodes = Some(0..3);
        shard_compute(&cfg(1, 1), &grid, &j, &h, &mut p).unwrap();
        assert_eq!(p.row(2), &[0.0, 70.0]);
        assert_eq!(p.row(0), &[0.0, 10.0]);
    }

    proptest! {
        #[test]
        fn more_gpes_or_lanes_never_slower(n in 1usize..80, deg in 0.0f64..8.0, seed in any::<u64>(), g in 1u64..16, s in 1u64..64, w in 1usize..200) {
            let graph = erdos_renyi(n, deg, seed).unwrap();
            let grid = build_shard_grid(&graph, n).unwrap();
            let mut j = job(&grid, ShardCoord::new(0, 0), 0..w);
            j.self_nodes = Some(0..n as NodeId);
            let base = compute_cycles(&cfg(g, s), &grid, &j);
            prop_assert!(compute_cycles(&cfg(2 * g, s), &grid, &j) <= base);
            prop_assert!(compute_cycles(&cfg(g, s + 1), &grid, &j) <= base);
            let total: u64 = (graph.num_edges() + n) as u64 * cfg(1, s).edge_cost(w);
            prop_assert_eq!(compute_cycles(&cfg(1, s), &grid, &j), total);
        }
    }
}
