//! Static shard schedule for one sweep of the grid.
//!
//! The graph engine keeps one source set and one destination set of partial
//! aggregates resident. Walking the traversal, a new source block costs a
//! source-set load; leaving a destination block stores its partials, and
//! returning to a block stored earlier reloads them. Empty off-diagonal
//! shards are skipped. Diagonal shards always run because they fold in each
//! node's own feature from the resident source set.

use crate::shard::{ShardCoord, ShardGrid, SweepPattern, TraversalOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Store {
    pub block: usize,
    /// Last store of this block in the sweep: partials are finalized.
    pub is_final: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub coord: ShardCoord,
    /// A different source block than the previous step.
    pub src_set_load: bool,
    /// Source nodes not yet resident that this step reads.
    pub src_nodes: u64,
    /// Step whose store must land before the partials are read back.
    pub reload_after: Option<usize>,
    /// Rows in the destination block.
    pub dst_nodes: u64,
    pub store: Option<Store>,
}

impl Step {
    pub fn self_term(&self) -> bool {
        self.coord.is_diagonal()
    }
}

/// Event counts comparable with the closed-form model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepCounts {
    pub src_set_loads: u64,
    pub dst_reloads: u64,
    pub dst_stores: u64,
}

impl SweepCounts {
    /// Shard-sized transfers read, with `input_sets` sets per source load.
    pub fn reads(&self, input_sets: u64) -> u64 {
        self.src_set_loads * input_sets + self.dst_reloads
    }

    pub fn writes(&self) -> u64 {
        self.dst_stores
    }
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub order: TraversalOrder,
    pub steps: Vec<Step>,
}

impl SweepPlan {
    pub fn counts(&self) -> SweepCounts {
        let mut c = SweepCounts::default();
        for s in &self.steps {
            c.src_set_loads += s.src_set_load as u64;
            c.dst_reloads += s.reload_after.is_some() as u64;
            c.dst_stores += s.store.is_some() as u64;
        }
        c
    }
}

pub fn plan_sweep(grid: &ShardGrid, order: TraversalOrder, sweep: SweepPattern) -> SweepPlan {
    let mut steps: Vec<Step> = Vec::new();
    let mut src_block: Option<usize> = None;
    let mut resident = Vec::new();
    let mut dst_block: Option<usize> = None;
    let mut last_store: Vec<Option<usize>> = vec![None; grid.num_blocks()];

    for visit in grid.traversal_with(order, sweep) {
        let coord = visit.coord;
        if visit.empty && !coord.is_diagonal() {
            continue;
        }
        let src_range = grid.block_nodes(coord.src);
        let src_set_load = src_block != Some(coord.src);
        if src_set_load {
            src_block = Some(coord.src);
            resident.clear();
            resident.resize(src_range.len(), false);
        }
        let mut src_nodes = 0;
        let mut need = |u: u32| {
            let slot = &mut resident[(u - src_range.start) as usize];
            if !*slot {
                *slot = true;
                src_nodes += 1;
            }
        };
        for e in grid.shard_edges(coord) {
            need(e.src);
        }
        if coord.is_diagonal() {
            src_range.clone().for_each(&mut need);
        }

        let mut reload_after = None;
        if dst_block != Some(coord.dst) {
            if let (Some(prev), Some(last)) = (dst_block, steps.last_mut()) {
                last.store = Some(Store { block: prev, is_final: false });
                last_store[prev] = Some(steps.len() - 1);
            }
            dst_block = Some(coord.dst);
            reload_after = last_store[coord.dst];
        }
        steps.push(Step {
            coord,
            src_set_load,
            src_nodes,
            reload_after,
            dst_nodes: grid.block_nodes(coord.dst).len() as u64,
            store: None,
        });
    }
    if let (Some(prev), Some(last)) = (dst_block, steps.last_mut()) {
        last.store = Some(Store { block: prev, is_final: false });
        last_store[prev] = Some(steps.len() - 1);
    }
    for idx in last_store.into_iter().flatten() {
        if let Some(store) = steps[idx].store.as_mut() {
            store.is_final = true;
        }
    }
    SweepPlan { order, steps }
}
