//! Weight-stationary systolic array.
//!
//! Each `R x C` weight tile is loaded in `R` cycles, then `M` input rows
//! stream through and drain in `M + R + C - 2` cycles. Inputs are `M x K`,
//! weights `K x N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::Activation;

const MIB: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenseConfig {
    pub rows: u64,
    pub cols: u64,
    pub input_buf: u64,
    pub weight_buf: u64,
    pub output_buf: u64,
    pub macs_per_pe_per_cycle: u64,
    /// Identical arrays sharing the buffers; input rows are split across them.
    pub arrays: u64,
    /// Bytes per cycle the output buffer returns when reloading partial sums.
    pub output_port_bytes: u64,
}

impl Default for DenseConfig {
    fn default() -> Self {
        Self {
            rows: 64,
            cols: 64,
            input_buf: 2 * MIB,
            weight_buf: 2 * MIB,
            output_buf: 2 * MIB,
            macs_per_pe_per_cycle: 1,
            arrays: 1,
            output_port_bytes: 256,
        }
    }
}

impl DenseConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rows", self.rows),
            ("cols", self.cols),
            ("input_buf", self.input_buf),
            ("weight_buf", self.weight_buf),
            ("output_buf", self.output_buf),
            ("macs_per_pe_per_cycle", self.macs_per_pe_per_cycle),
            ("arrays", self.arrays),
            ("output_port_bytes", self.output_port_bytes),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("dense.{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Peak multiply-accumulates per cycle.
    pub fn peak_macs(&self) -> u64 {
        self.rows * self.cols * self.macs_per_pe_per_cycle * self.arrays
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatmulJob {
    pub m: u64,
    pub k: u64,
    pub n: u64,
    /// Add previously computed partial sums to the product.
    pub accumulate: bool,
}

impl MatmulJob {
    pub fn new(m: u64, k: u64, n: u64, accumulate: bool) -> Self {
        Self { m, k, n, accumulate }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.n == 0 {
            return Err(Error::Shape(format!(
                "matmul {}x{}x{} has an empty dimension",
                self.m, self.k, self.n
            )));
        }
        Ok(())
    }
}

pub fn dense_cycles(cfg: &DenseConfig, job: &MatmulJob) -> u64 {
    let (r, c) = (cfg.rows, cfg.cols);
    let m = job.m.div_ceil(cfg.arrays * cfg.macs_per_pe_per_cycle);
    let tiles = job.k.div_ceil(r) * job.n.div_ceil(c);
    let mut cycles = tiles * (r + m + r + c - 2);
    if job.accumulate {
        cycles += (job.m * job.n * 4).div_ceil(cfg.output_port_bytes);
    }
    cycles
}

/// `activation(inputs · weights + partial)`, summing `k` in ascending order
/// from zero and adding the partial sum last. Cycles include draining one
/// output column per cycle through the activation unit.
pub fn dense_execute(
    cfg: &DenseConfig,
    job: &MatmulJob,
    inputs: &Matrix,
    weights: &Matrix,
    partial: Option<&Matrix>,
    activation: Activation,
) -> Result<(Matrix, u64)> {
    job.validate()?;
    let (m, k, n) = (job.m as usize, job.k as usize, job.n as usize);
    if inputs.rows() != m || inputs.cols() != k || weights.rows() != k || weights.cols() != n {
        return Err(Error::Shape(format!(
            "job {m}x{k}x{n} given inputs {}x{} and weights {}x{}",
            inputs.rows(),
            inputs.cols(),
            weights.rows(),
            weights.cols()
        )));
    }
    match (job.accumulate, partial) {
        (true, Some(p)) if p.rows() == m && p.cols() == n => {}
        (false, None) => {}
        _ => {
            return Err(Error::Shape(format!(
                "partial sums must be {m}x{n} exactly when accumulating"
            )))
        }
    }
    let mut out = inputs.matmul_acc(weights, partial)?;
    for r in 0..m {
        for o in out.row_mut(r) {
            *o = activation.apply(*o);
        }
    }
    Ok((out, dense_cycles(cfg, job) + job.n.div_ceil(cfg.cols)))
}

/// Weight bytes one job loads; weights stay put while its rows stream.
pub fn dense_weight_traffic(_cfg: &DenseConfig, job: &MatmulJob) -> u64 {
    job.k * job.n * 4
}
