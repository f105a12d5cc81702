//! 2D edge sharding.
//!
//! Nodes are split into contiguous blocks of `n`; edge `(u, v)` lands in shard
//! `(u / n, v / n)`. Shards keep their edges in original edge-list order.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ShardCoord {
    pub src: usize,
    pub dst: usize,
}

impl ShardCoord {
    pub const fn new(src: usize, dst: usize) -> Self {
        Self { src, dst }
    }

    pub fn is_diagonal(&self) -> bool {
        self.src == self.dst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraversalOrder {
    /// Keep a row's source block resident and sweep destinations.
    SourceStationary,
    /// Keep a column's destination block resident and sweep sources.
    DestinationStationary,
}

impl std::fmt::Display for TraversalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TraversalOrder::SourceStationary => "src",
            TraversalOrder::DestinationStationary => "dst",
        })
    }
}

/// How the inner axis is swept between consecutive rows/columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPattern {
    /// Inner index ascends in every row/column.
    Ascending,
    /// Inner direction alternates, so consecutive rows/columns meet at the
    /// same inner block and its resident set carries over.
    #[default]
    Serpentine,
}

/// One cell of a traversal sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Visit {
    pub coord: ShardCoord,
    pub empty: bool,
}

#[derive(Clone, Debug)]
pub struct ShardGrid {
    nodes_per_block: usize,
    num_nodes: usize,
    num_blocks: usize,
    /// Row-major `src * num_blocks + dst`, edge indices into the graph.
    shards: Vec<Vec<u32>>,
    edges: Vec<Edge>,
}

pub fn build_shard_grid(graph: &Graph, nodes_per_block: usize) -> Result<ShardGrid> {
    if nodes_per_block == 0 {
        return Err(Error::Parameter("nodes per block must be at least 1".into()));
    }
    let num_blocks = graph.num_nodes().div_ceil(nodes_per_block).max(1);
    let mut shards = vec![Vec::new(); num_blocks * num_blocks];
    for (i, e) in graph.edges().iter().enumerate() {
        let s = e.src as usize / nodes_per_block;
        let d = e.dst as usize / nodes_per_block;
        shards[s * num_blocks + d].push(i as u32);
    }
    Ok(ShardGrid {
        nodes_per_block,
        num_nodes: graph.num_nodes(),
        num_blocks,
        shards,
        edges: graph.edges().to_vec(),
    })
}

impl ShardGrid {
    #[inline]
    pub fn nodes_per_block(&self) -> usize {
        self.nodes_per_block
    }

    /// Grid side length.
    #[inline]
    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Node id range of a block; the last block may be short.
    pub fn block_nodes(&self, block: usize) -> std::ops::Range<NodeId> {
        let start = (block * self.nodes_per_block).min(self.num_nodes);
        let end = ((block + 1) * self.nodes_per_block).min(self.num_nodes);
        start as NodeId..end as NodeId
    }

    pub fn block_of(&self, node: NodeId) -> usize {
        node as usize / self.nodes_per_block
    }

    /// Edge indices of one shard, in edge-list order.
    pub fn shard(&self, coord: ShardCoord) -> &[u32] {
        &self.shards[coord.src * self.num_blocks + coord.dst]
    }

    pub fn shard_edges(&self, coord: ShardCoord) -> impl Iterator<Item = Edge> + '_ {
        self.shard(coord).iter().map(move |&i| self.edges[i as usize])
    }

    pub fn edge(&self, index: u32) -> Edge {
        self.edges[index as usize]
    }

    pub fn max_shard_edges(&self) -> usize {
        self.shards.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when every shard holds at least one edge.
    pub fn is_complete(&self) -> bool {
        self.shards.iter().all(|s| !s.is_empty())
    }

    /// All shards in ascending sweep order.
    pub fn traversal(&self, order: TraversalOrder) -> Vec<Visit> {
        self.traversal_with(order, SweepPattern::Ascending)
    }

    pub fn traversal_with(&self, order: TraversalOrder, sweep: SweepPattern) -> Vec<Visit> {
        let s = self.num_blocks;
        let mut out = Vec::with_capacity(s * s);
        for outer in 0..s {
            let reverse = sweep == SweepPattern::Serpentine && outer % 2 == 1;
            for step in 0..s {
                let inner = if reverse { s - 1 - step } else { step };
                let coord = match order {
                    TraversalOrder::SourceStationary => ShardCoord::new(outer, inner),
                    TraversalOrder::DestinationStationary => ShardCoord::new(inner, outer),
                };
                out.push(Visit {
                    coord,
                    empty: self.shard(coord).is_empty(),
                });
            }
        }
        out
    }

    /// Edge counts as a text matrix, one row per source block.
    pub fn occupancy_dump(&self) -> String {
        let mut out = String::new();
        for s in 0..self.num_blocks {
            let row: Vec<String> = (0..self.num_blocks)
                .map(|d| self.shard(ShardCoord::new(s, d)).len().to_string())
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;
    use proptest::prelude::*;

    fn coords(v: &[Visit]) -> Vec<(usize, usize)> {
        v.iter().map(|x| (x.coord.src, x.coord.dst)).collect()
    }

    #[test]
    fn cycle_partition() {
        let g = Graph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let grid = build_shard_grid(&g, 2).unwrap();
        let edges = |s, d| grid.shard_edges(ShardCoord::new(s, d)).collect::<Vec<_>>();
        assert_eq!(edges(0, 0), vec![Edge::new(0, 1)]);
        assert_eq!(edges(0, 1), vec![Edge::new(1, 2)]);
        assert_eq!(edges(1, 1), vec![Edge::new(2, 3)]);
        assert_eq!(edges(1, 0), vec![Edge::new(3, 0)]);
    }

    #[test]
    fn oversized_block_is_single_shard() {
        let g = erdos_renyi(30, 3.0, 2).unwrap();
        let grid = build_shard_grid(&g, 30).unwrap();
        assert_eq!(grid.num_blocks(), 1);
        assert_eq!(grid.shard(ShardCoord::new(0, 0)).len(), g.num_edges());
        assert_eq!(build_shard_grid(&g, 100).unwrap().num_blocks(), 1);
    }

    #[test]
    fn zero_block_size_rejected() {
        let g = Graph::from_pairs(2, &[]).unwrap();
        assert!(matches!(build_shard_grid(&g, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn traversal_orders() {
        let g = Graph::from_pairs(4, &[(0, 1)]).unwrap();
        let grid = build_shard_grid(&g, 2).unwrap();
        assert_eq!(
            coords(&grid.traversal(TraversalOrder::DestinationStationary)),
            vec![(0, 0), (1, 0), (0, 1), (1, 1)]
        );
        assert_eq!(
            coords(&grid.traversal(TraversalOrder::SourceStationary)),
            vec![(0, 0), (0, 1), (1, 0), (1, 1)]
        );
        let t = grid.traversal(TraversalOrder::SourceStationary);
        assert!(!t[0].empty && t[1].empty);

        let single = build_shard_grid(&g, 4).unwrap();
        for order in [TraversalOrder::SourceStationary, TraversalOrder::DestinationStationary] {
            assert_eq!(coords(&single.traversal(order)), vec![(0, 0)]);
        }
    }

    #[test]
    fn serpentine_turns_at_shared_block() {
        let g = Graph::from_pairs(6, &[]).unwrap();
        let grid = build_shard_grid(&g, 2).unwrap();
        assert_eq!(
            coords(&grid.traversal_with(TraversalOrder::DestinationStationary, SweepPattern::Serpentine)),
            vec![(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (0, 1), (0, 2), (1, 2), (2, 2)]
        );
    }

    #[test]
    fn occupancy_text() {
        let g = Graph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 3)]).unwrap();
        let grid = build_shard_grid(&g, 2).unwrap();
        assert_eq!(grid.occupancy_dump(), "1 2\n1 1\n");
    }

    proptest! {
        #[test]
        fn partition_covers_each_edge_once(n in 1usize..120, deg in 0.0f64..6.0, seed in any::<u64>(), frac in 0.0f64..1.0) {
            let g = erdos_renyi(n, deg, seed).unwrap();
            let block = 1 + (frac * n as f64) as usize; // 1..=n+1
            let grid = build_shard_grid(&g, block).unwrap();
            let mut seen = vec![0u32; g.num_edges()];
            for s in 0..grid.num_blocks() {
                for d in 0..grid.num_blocks() {
                    let c = ShardCoord::new(s, d);
                    let mut srcs = std::collections::BTreeSet::new();
                    let mut dsts = std::collections::BTreeSet::new();
                    let mut prev = None;
                    for &i in grid.shard(c) {
                        let e = g.edges()[i as usize];
                        prop_assert_eq!((e.src as usize / block, e.dst as usize / block), (s, d));
                        prop_assert!(prev.map_or(true, |p| p < i));
                        prev = Some(i);
                        srcs.insert(e.src);
                        dsts.insert(e.dst);
                        seen[i as usize] += 1;
                    }
                    prop_assert!(srcs.len() <= block && dsts.len() <= block);
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }

        #[test]
        fn traversal_visits_every_cell_once(n in 1usize..60, block in 1usize..20, serp in any::<bool>(), src in any::<bool>()) {
            let g = Graph::from_pairs(n, &[]).unwrap();
            let grid = build_shard_grid(&g, block).unwrap();
            let order = if src { TraversalOrder::SourceStationary } else { TraversalOrder::DestinationStationary };
            let sweep = if serp { SweepPattern::Serpentine } else { SweepPattern::Ascending };
            let t = grid.traversal_with(order, sweep);
            let s = grid.num_blocks();
            prop_assert_eq!(t.len(), s * s);
            let mut cells: Vec<_> = coords(&t);
            cells.sort();
            cells.dedup();
            prop_assert_eq!(cells.len(), s * s);
        }
    }
}
