//! Text renderings of a [`SimReport`]: a `key=value` summary and
//! comma-separated traces.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::memory::Stream;
use crate::sim::{DataflowConfig, DataflowMode, EngineStats, SimReport};

/// SHA-256 over the shape (two little-endian u64) and the row-major f32
/// bits; `none` for timing-only runs.
pub fn output_hash(output: Option<&Matrix>) -> String {
    let Some(m) = output else {
        return "none".into();
    };
    let mut h = Sha256::new();
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// What was run, for the summary header.
#[derive(Clone, Debug)]
pub struct RunLabel {
    pub network: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub feature_dim: usize,
    pub dataflow: DataflowConfig,
}

fn engine_lines(out: &mut String, name: &str, e: &EngineStats) {
    let _ = writeln!(out, "{name}_busy={}", e.busy);
    let _ = writeln!(out, "{name}_memory_stall={}", e.memory_stall);
    let _ = writeln!(out, "{name}_sync_stall={}", e.sync_stall);
    let _ = writeln!(out, "{name}_idle={}", e.idle);
}

pub fn summary(label: &RunLabel, r: &SimReport) -> String {
    let mut out = String::new();
    let df = &label.dataflow;
    let _ = writeln!(out, "network={}", label.network);
    let _ = writeln!(out, "nodes={}", label.num_nodes);
    let _ = writeln!(out, "edges={}", label.num_edges);
    let _ = writeln!(out, "feature_dim={}", label.feature_dim);
    let _ = writeln!(out, "dataflow={}", df.mode);
    if df.mode == DataflowMode::Blocked {
        let _ = writeln!(out, "block_size={}", df.block_size.unwrap_or(0));
    }
    let _ = writeln!(out, "order={}", df.order);
    let _ = writeln!(out, "input_sets={}", df.input_sets);
    let _ = writeln!(out, "total_cycles={}", r.total_cycles);
    let _ = writeln!(out, "time_us={:.3}", r.seconds() * 1e6);
    engine_lines(&mut out, "graph", &r.graph_engine);
    engine_lines(&mut out, "dense", &r.dense_engine);
    let d = &r.dram;
    let _ = writeln!(out, "dram_read_bytes={}", d.read_bytes);
    let _ = writeln!(out, "dram_write_bytes={}", d.write_bytes);
    let _ = writeln!(out, "dram_busy_cycles={}", d.busy_cycles);
    let _ = writeln!(out, "dram_transactions={}", d.transactions);
    for s in Stream::ALL {
        let b = d.stream(s);
        let _ = writeln!(out, "{}_read_bytes={}", s.name(), b.read);
        let _ = writeln!(out, "{}_write_bytes={}", s.name(), b.write);
    }
    for (req, stall) in &d.stall_cycles {
        let _ = writeln!(out, "requestor{}_stall_cycles={stall}", req.0);
    }
    for l in &r.layers {
        let i = l.index;
        let _ = writeln!(out, "layer{i}_order={}", l.order);
        let _ = writeln!(out, "layer{i}_width={}", l.width);
        let _ = writeln!(out, "layer{i}_passes={}", l.passes);
        let _ = writeln!(out, "layer{i}_nodes_per_block={}", l.nodes_per_block);
        let _ = writeln!(out, "layer{i}_blocks={}", l.num_blocks);
        let _ = writeln!(out, "layer{i}_cycles={}", l.cycles());
        let _ = writeln!(out, "layer{i}_src_set_loads={}", l.src_set_loads);
        let _ = writeln!(out, "layer{i}_dst_reloads={}", l.dst_reloads);
        let _ = writeln!(out, "layer{i}_dst_stores={}", l.dst_stores);
    }
    let _ = writeln!(out, "output_sha256={}", output_hash(r.output.as_ref()));
    out
}

pub fn shards_csv(r: &SimReport) -> String {
    let mut out = String::from(
        "layer,pass,src_block,dst_block,edges,edge_bytes,src_bytes,reload_bytes,store_bytes,final_store,\
         fetch_issue,fetch_done,compute_start,compute_done,writeback_done\n",
    );
    for s in &r.shards {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.layer,
            s.pass,
            s.coord.src,
            s.coord.dst,
            s.edges,
            s.edge_bytes,
            s.src_bytes,
            s.reload_bytes,
            s.store_bytes,
            u8::from(s.final_store),
            s.fetch_issue,
            s.fetch_done,
            s.compute_start,
            s.compute_done,
            s.writeback_done
        );
    }
    out
}

pub fn dense_jobs_csv(r: &SimReport) -> String {
    let mut out = String::from(
        "layer,kind,pass,block,m,k,n,accumulate,input_bytes,weight_bytes,partial_bytes,output_bytes,\
         load_issue,load_done,compute_start,compute_done,store_done\n",
    );
    for d in &r.dense_jobs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.layer,
            d.kind.name(),
            d.pass,
            d.block,
            d.m,
            d.k,
            d.n,
            u8::from(d.accumulate),
            d.input_bytes,
            d.weight_bytes,
            d.partial_bytes,
            d.output_bytes,
            d.load_issue,
            d.load_done,
            d.compute_start,
            d.compute_done,
            d.store_done
        );
    }
    out
}

/// Writes `summary.txt`, `shards.csv` and `dense_jobs.csv` into `dir`,
/// creating it if needed.
pub fn write_run(dir: &Path, label: &RunLabel, r: &SimReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for (name, text) in [
        ("summary.txt", summary(label, r)),
        ("shards.csv", shards_csv(r)),
        ("dense_jobs.csv", dense_jobs_csv(r)),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_covers_shape_and_bits() {
        let a = Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let b = Matrix::from_vec(2, 1, vec![1.0, 2.0]).unwrap();
        let c = Matrix::from_vec(1, 2, vec![1.0, -2.0]).unwrap();
        let ha = output_hash(Some(&a));
        assert_eq!(ha.len(), 64);
        assert_eq!(ha, output_hash(Some(&a.clone())));
        assert_ne!(ha, output_hash(Some(&b)));
        assert_ne!(ha, output_hash(Some(&c)));
        assert_eq!(output_hash(None), "none");
    }
}
