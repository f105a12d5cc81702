//! Closed-form off-chip cost of sweeping a shard grid.
//!
//! Costs are counted in shard-sized feature-set transfers. Reads are source
//! set loads (each bringing `I` input feature sets) plus reloads of partially
//! aggregated destination sets; writes are destination set stores. The
//! counts assume the serpentine sweep, where consecutive rows (columns) share
//! their turning block:
//!
//! | order        | reads                 | writes      |
//! |--------------|-----------------------|-------------|
//! | source-stat. | `S·I + (S−1)·S − S + 1` | `S² − S + 1` |
//! | dest.-stat.  | `(S² − S + 1)·I`        | `S`         |

use crate::error::{Error, Result};
use crate::shard::TraversalOrder;

pub const BYTES_PER_VALUE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostInputs {
    /// Shard grid side.
    pub shards: u64,
    /// Input feature sets a stationary step needs on chip.
    pub input_sets: u64,
    pub read_weight: f64,
    pub write_weight: f64,
}

impl CostInputs {
    pub fn new(shards: u64, input_sets: u64) -> Self {
        Self {
            shards,
            input_sets,
            read_weight: 1.0,
            write_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shards == 0 || self.input_sets == 0 {
            return Err(Error::Parameter(format!(
                "shard count {} and input sets {} must be at least 1",
                self.shards, self.input_sets
            )));
        }
        if !(self.read_weight > 0.0 && self.write_weight > 0.0) {
            return Err(Error::Parameter("cost weights must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    pub reads: u64,
    pub writes: u64,
    pub weighted_total: f64,
}

impl CostEstimate {
    fn weighted(reads: u64, writes: u64, inputs: &CostInputs) -> Self {
        Self {
            reads,
            writes,
            weighted_total: reads as f64 * inputs.read_weight + writes as f64 * inputs.write_weight,
        }
    }
}

pub fn cost(order: TraversalOrder, inputs: &CostInputs) -> CostEstimate {
    let s = inputs.shards;
    let i = inputs.input_sets;
    // Both orders skip one reload per turn of the sweep: S - 1 turns.
    let (reads, writes) = match order {
        TraversalOrder::SourceStationary => (s * i + (s - 1) * s + 1 - s, s * s + 1 - s),
        TraversalOrder::DestinationStationary => ((s * s + 1 - s) * i, s),
    };
    CostEstimate::weighted(reads, writes, inputs)
}

/// Order with the smaller weighted total; ties go to destination-stationary,
/// which never writes more.
pub fn best_order(inputs: &CostInputs) -> TraversalOrder {
    let src = cost(TraversalOrder::SourceStationary, inputs).weighted_total;
    let dst = cost(TraversalOrder::DestinationStationary, inputs).weighted_total;
    if src < dst {
        TraversalOrder::SourceStationary
    } else {
        TraversalOrder::DestinationStationary
    }
}

/// Largest block size whose shard fits one scratchpad bank: `I` source sets
/// plus one destination set of `dims` values per node.
pub fn nodes_per_block(bank_bytes: usize, dims: usize, input_sets: usize) -> usize {
    bank_bytes / ((input_sets + 1) * dims.max(1) * BYTES_PER_VALUE)
}

/// Inputs for the capacity-derived blocked estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockedCostInputs {
    pub num_nodes: usize,
    /// Bytes in one bank of the double-buffered feature scratchpad.
    pub bank_bytes: usize,
    pub input_sets: u64,
    pub read_weight: f64,
    pub write_weight: f64,
}

impl BlockedCostInputs {
    pub fn new(num_nodes: usize, bank_bytes: usize, input_sets: u64) -> Self {
        Self {
            num_nodes,
            bank_bytes,
            input_sets,
            read_weight: 1.0,
            write_weight: 1.0,
        }
    }

    /// `(n, S)` when only `block` dimensions are resident.
    pub fn grid_for(&self, block: usize) -> Result<(usize, u64)> {
        let n = nodes_per_block(self.bank_bytes, block, self.input_sets as usize);
        if n == 0 {
            return Err(Error::Capacity(format!(
                "a {}-byte bank cannot hold one node at block size {block}",
                self.bank_bytes
            )));
        }
        let n = n.min(self.num_nodes.max(1));
        Ok((n, self.num_nodes.div_ceil(n).max(1) as u64))
    }

    pub fn cost_inputs(&self, block: usize) -> Result<CostInputs> {
        let (_, shards) = self.grid_for(block)?;
        Ok(CostInputs {
            shards,
            input_sets: self.input_sets,
            read_weight: self.read_weight,
            write_weight: self.write_weight,
        })
    }
}

fn check_block(dim: usize, block: usize) -> Result<()> {
    if block == 0 || block > dim {
        return Err(Error::Parameter(format!("block size {block} outside 1..={dim}")));
    }
    Ok(())
}

/// Shard transfers for `ceil(dim / block)` passes over the grid implied by
/// holding `block` of `dim` dimensions on chip.
pub fn blocked_cost(order: TraversalOrder, inputs: &BlockedCostInputs, dim: usize, block: usize) -> Result<CostEstimate> {
    check_block(dim, block)?;
    let ci = inputs.cost_inputs(block)?;
    ci.validate()?;
    let per_pass = cost(order, &ci);
    let passes = dim.div_ceil(block) as u64;
    Ok(CostEstimate::weighted(per_pass.reads * passes, per_pass.writes * passes, &ci))
}

/// Byte form of [`blocked_cost`], assuming full node blocks; the last pass
/// moves only the remaining `dim mod block` dimensions.
pub fn blocked_traffic_bytes(
    order: TraversalOrder,
    inputs: &BlockedCostInputs,
    dim: usize,
    block: usize,
) -> Result<(u64, u64)> {
    check_block(dim, block)?;
    let (n, _) = inputs.grid_for(block)?;
    let per_pass = cost(order, &inputs.cost_inputs(block)?);
    let (mut reads, mut writes) = (0u64, 0u64);
    let mut lo = 0;
    while lo < dim {
        let width = block.min(dim - lo);
        let set_bytes = (n * width * BYTES_PER_VALUE) as u64;
        reads += per_pass.reads * set_bytes;
        writes += per_pass.writes * set_bytes;
        lo += width;
    }
    Ok((reads, writes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use TraversalOrder::{DestinationStationary as Dst, SourceStationary as Src};

    /// Table values evaluated by hand.
    #[test]
    fn formula_values() {
        for i in 1..5 {
            for order in [Src, Dst] {
                let c = cost(order, &CostInputs::new(1, i));
                assert_eq!((c.reads, c.writes), (i, 1));
            }
        }
        let c = cost(Src, &CostInputs::new(4, 1));
        assert_eq!((c.reads, c.writes), (13, 13));
        let c = cost(Dst, &CostInputs::new(4, 1));
        assert_eq!((c.reads, c.writes), (13, 4));
        assert_eq!(c.weighted_total, 17.0);
    }

    #[test]
    fn best_order_examples() {
        assert_eq!(best_order(&CostInputs::new(4, 1)), Dst);
        assert_eq!(best_order(&CostInputs::new(1, 1)), Dst);
        let cheap_writes = CostInputs {
            write_weight: 0.01,
            ..CostInputs::new(4, 8)
        };
        // src: 32+9=41 reads, dst: 13*8=104 reads
        assert_eq!(best_order(&cheap_writes), Src);
    }

    #[test]
    fn best_order_is_brute_force_argmin() {
        for s in 1..=64 {
            for i in 1..=8 {
                let ci = CostInputs::new(s, i);
                let src = (s * i + (s - 1) * s - s + 1) + (s * s - s + 1);
                let dst = (s * s - s + 1) * i + s;
                let want = if src < dst { Src } else { Dst };
                assert_eq!(best_order(&ci), want, "S={s} I={i}");
            }
        }
    }

    #[test]
    fn validation() {
        assert!(CostInputs::new(0, 1).validate().is_err());
        assert!(CostInputs::new(1, 0).validate().is_err());
        assert!(CostInputs { read_weight: 0.0, ..CostInputs::new(1, 1) }.validate().is_err());
    }

    #[test]
    fn blocked_equals_plain_when_block_is_full_width() {
        let bi = BlockedCostInputs::new(1000, 64 * 1024, 1);
        for order in [Src, Dst] {
            let plain = cost(order, &bi.cost_inputs(64).unwrap());
            assert_eq!(blocked_cost(order, &bi, 64, 64).unwrap(), plain);
        }
    }

    #[test]
    fn blocked_hand_evaluation() {
        // 1000 nodes, 32 KiB bank, I=1: n = 32768 / (2*B*4)
        //   B=64 -> n=64,  S=16;  B=32 -> n=128, S=8;  B=16 -> n=256, S=4
        let bi = BlockedCostInputs::new(1000, 32 * 1024, 1);
        assert_eq!(bi.grid_for(64).unwrap(), (64, 16));
        assert_eq!(bi.grid_for(32).unwrap(), (128, 8));
        assert_eq!(bi.grid_for(16).unwrap(), (256, 4));
        // dst reads per pass (S^2-S+1), writes S; passes 1, 2, 4
        let d = |b| blocked_cost(Dst, &bi, 64, b).unwrap();
        assert_eq!((d(64).reads, d(64).writes), (241, 16));
        assert_eq!((d(32).reads, d(32).writes), (2 * 57, 2 * 8));
        assert_eq!((d(16).reads, d(16).writes), (4 * 13, 4 * 4));
        // src reads S + (S-1)^2, writes S^2-S+1
        let s = |b| blocked_cost(Src, &bi, 64, b).unwrap();
        assert_eq!((s(64).reads, s(64).writes), (16 + 225, 241));
        assert_eq!((s(16).reads, s(16).writes), (4 * 13, 4 * 13));
        // bytes: dst at B=32 reads 114 sets of 128 nodes x 32 dims x 4 bytes
        assert_eq!(blocked_traffic_bytes(Dst, &bi, 64, 32).unwrap().0, 114 * 128 * 32 * 4);
    }

    #[test]
    fn blocked_errors() {
        let bi = BlockedCostInputs::new(100, 1024, 1);
        assert!(matches!(blocked_cost(Dst, &bi, 64, 0), Err(Error::Parameter(_))));
        assert!(matches!(blocked_cost(Dst, &bi, 64, 65), Err(Error::Parameter(_))));
        let tiny = BlockedCostInputs::new(100, 16, 1);
        assert!(matches!(blocked_cost(Dst, &tiny, 64, 64), Err(Error::Capacity(_))));
    }

    proptest! {
        #[test]
        fn reads_monotone(s in 1u64..200, i in 1u64..16) {
            for order in [Src, Dst] {
                let base = cost(order, &CostInputs::new(s, i)).reads;
                prop_assert!(cost(order, &CostInputs::new(s + 1, i)).reads >= base);
                prop_assert!(cost(order, &CostInputs::new(s, i + 1)).reads >= base);
            }
        }

        #[test]
        fn best_order_scale_invariant(s in 1u64..100, i in 1u64..10, r in 0.01f64..10.0, w in 0.01f64..10.0, k in 0.01f64..100.0) {
            let a = CostInputs { read_weight: r, write_weight: w, ..CostInputs::new(s, i) };
            let b = CostInputs { read_weight: r * k, write_weight: w * k, ..a };
            prop_assert_eq!(best_order(&a), best_order(&b));
        }

        #[test]
        fn halving_block_never_grows_grid(nodes in 1usize..5000, bank in 1024usize..1_000_000, b in 2usize..256) {
            let bi = BlockedCostInputs::new(nodes, bank, 1);
            if let (Ok((_, big)), Ok((_, small))) = (bi.grid_for(b), bi.grid_for(b / 2)) {
                prop_assert!(small <= big);
            }
        }
    }
}
