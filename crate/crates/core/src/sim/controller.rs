//! Event-driven cycle loop coordinating both engines through shared DRAM.
//!
//! Each engine is a three-stage pipeline: a load stage filling the shadow
//! buffer, a compute stage reading the active buffer, and a store stage.
//! Time jumps between events: a DRAM completion or queue-head change, or a
//! compute finishing. Engine states are constant in between, so the cycle
//! breakdown is charged per interval.
//!
//! Producer/consumer rules: in dense-first layers a shard fetch waits until
//! the pool job for its source block has been stored; in every layer an
//! extraction job waits until its destination block's aggregates for that
//! pass are stored, and until the previous pass's partial sums are stored.

use std::collections::HashMap;

use crate::config::HardwareConfig;
use crate::engine::dense::{dense_cycles, dense_execute, dense_weight_traffic, MatmulJob};
use crate::engine::graph::{compute_cycles, shard_compute, ShardJob};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{FeatureMatrix, Matrix};
use crate::memory::{Dram, Request, Requestor, Scratchpad, Stream, TxnId};
use crate::network::{Activation, Aggregator, LayerSpec, NetworkSpec};
use crate::schedule::{plan_sweep, Step, SweepPlan};
use crate::shard::ShardGrid;

use super::report::{ColumnTrace, DenseJobKind, DenseTrace, EngineStats, LayerReport, ShardTrace, SimReport};
use super::{DataflowConfig, LayerGeometry, RunOptions};

#[derive(Clone, Copy, Debug)]
enum Owner {
    Fetch(usize),
    Store(usize),
    Load(usize),
    Output(usize),
}

struct Machine {
    dram: Dram,
    owners: HashMap<TxnId, Owner>,
    graph_stats: EngineStats,
    dense_stats: EngineStats,
    shards: Vec<ShardTrace>,
    dense_jobs: Vec<DenseTrace>,
    columns: Vec<ColumnTrace>,
}

impl Machine {
    fn now(&self) -> u64 {
        self.dram.now()
    }

    fn issue(&mut self, req: Request, owner: Owner) -> Result<()> {
        let id = self.dram.request(req)?;
        self.owners.insert(id, owner);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct DenseJob {
    kind: DenseJobKind,
    pass: usize,
    block: usize,
    job: MatmulJob,
    last_pass: bool,
}

/// Which stage of a three-stage engine is occupied.
#[derive(Default)]
struct Pipeline {
    /// Job being loaded and its outstanding transfers.
    load: Option<(usize, u32)>,
    /// Loaded and waiting for compute.
    loaded: Option<usize>,
    /// Job computing and its finish cycle.
    compute: Option<(usize, u64)>,
    /// Computed, waiting for the store stage.
    hold: Option<usize>,
    store: Option<usize>,
    retired: usize,
}

impl Pipeline {
    fn charge(&self, stats: &mut EngineStats, remaining: bool, cycles: u64) {
        if self.compute.is_some() {
            stats.busy += cycles;
        } else if self.load.is_some() || self.hold.is_some() || self.store.is_some() {
            stats.memory_stall += cycles;
        } else if remaining {
            stats.sync_stall += cycles;
        } else {
            stats.idle += cycles;
        }
    }
}

struct LayerRun<'a> {
    index: usize,
    spec: &'a LayerSpec,
    geo: &'a LayerGeometry,
    grid: &'a ShardGrid,
    plan: SweepPlan,
    hw: &'a HardwareConfig,
    input_sets: u64,
    functional: bool,
    h: &'a Matrix,
    pooled: Matrix,
    agg: Matrix,
    out: Matrix,
    scales: Vec<f32>,
    partials_on_chip: bool,

    graph: Pipeline,
    next_fetch: usize,
    store_done: Vec<bool>,
    column_done: Vec<bool>,
    pad: Scratchpad,
    shard_trace: Vec<ShardTrace>,

    dense: Pipeline,
    jobs: Vec<DenseJob>,
    issued: Vec<bool>,
    first_unissued: usize,
    job_done: Vec<bool>,
    pool_job: Vec<usize>,
    extract_job: Vec<usize>,
    dense_trace: Vec<DenseTrace>,
}

impl<'a> LayerRun<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        index: usize,
        graph: &Graph,
        spec: &'a LayerSpec,
        geo: &'a LayerGeometry,
        grid: &'a ShardGrid,
        hw: &'a HardwareConfig,
        df: &DataflowConfig,
        h: &'a Matrix,
        functional: bool,
    ) -> Self {
        let plan = plan_sweep(grid, geo.order, df.sweep);
        let nodes = graph.num_nodes();
        let s = geo.num_blocks;
        let passes = geo.passes.len();
        let pool = spec.pool_weights.is_some();
        let agg_dim = spec.agg_dim();

        let mut jobs = Vec::new();
        let mut pool_job = vec![usize::MAX; passes * s];
        let mut extract_job = vec![usize::MAX; passes * s];
        for (b, dims) in geo.passes.iter().enumerate() {
            let last_pass = b + 1 == passes;
            if pool {
                for blk in 0..s {
                    pool_job[b * s + blk] = jobs.len();
                    jobs.push(DenseJob {
                        kind: DenseJobKind::Pool,
                        pass: b,
                        block: blk,
                        job: MatmulJob::new(grid.block_nodes(blk).len() as u64, spec.in_dim as u64, dims.len() as u64, false),
                        last_pass,
                    });
                }
            }
            let k = dims.len() + geo.self_ranges[b].len();
            for blk in 0..s {
                extract_job[b * s + blk] = jobs.len();
                jobs.push(DenseJob {
                    kind: DenseJobKind::Extract,
                    pass: b,
                    block: blk,
                    job: MatmulJob::new(grid.block_nodes(blk).len() as u64, k as u64, spec.out_dim as u64, b > 0),
                    last_pass,
                });
            }
        }

        let scales = match spec.aggregator {
            Aggregator::MeanIncludeSelf => graph
                .in_degrees()
                .into_iter()
                .map(|d| spec.mean_denominator.scale(d))
                .collect(),
            Aggregator::MaxIncludeSelf => Vec::new(),
        };
        let (agg, pooled, out) = if functional {
            (
                Matrix::filled(nodes, agg_dim, spec.aggregator.identity()),
                if pool { Matrix::zeros(nodes, agg_dim) } else { Matrix::zeros(0, 0) },
                Matrix::zeros(nodes, spec.out_dim),
            )
        } else {
            (Matrix::zeros(0, 0), Matrix::zeros(0, 0), Matrix::zeros(0, 0))
        };
        let total_steps = passes * plan.steps.len();
        let mut shard_trace = Vec::with_capacity(total_steps);
        for b in 0..passes {
            for st in &plan.steps {
                shard_trace.push(ShardTrace::new(index, b, st.coord));
            }
        }
        let dense_trace = jobs
            .iter()
            .map(|j| DenseTrace {
                layer: index,
                kind: j.kind,
                pass: j.pass,
                block: j.block,
                m: j.job.m,
                k: j.job.k,
                n: j.job.n,
                accumulate: j.job.accumulate,
                input_bytes: 0,
                weight_bytes: 0,
                partial_bytes: 0,
                output_bytes: 0,
                load_issue: 0,
                load_done: 0,
                compute_start: 0,
                compute_done: 0,
                store_done: 0,
            })
            .collect();
        let partials_on_chip = (nodes * spec.out_dim * 4) as u64 <= hw.dense.output_buf / 2;
        Self {
            index,
            spec,
            geo,
            grid,
            plan,
            hw,
            input_sets: df.input_sets,
            functional,
            h,
            pooled,
            agg,
            out,
            scales,
            partials_on_chip,
            graph: Pipeline::default(),
            next_fetch: 0,
            store_done: vec![false; total_steps],
            column_done: vec![false; passes * s],
            pad: Scratchpad::new(hw.graph.feature_scratch),
            shard_trace,
            dense: Pipeline::default(),
            issued: vec![false; jobs.len()],
            first_unissued: 0,
            job_done: vec![false; jobs.len()],
            jobs,
            pool_job,
            extract_job,
            dense_trace,
        }
    }

    fn steps_per_pass(&self) -> usize {
        self.plan.steps.len()
    }

    fn total_steps(&self) -> usize {
        self.store_done.len()
    }

    fn step(&self, flat: usize) -> (usize, &Step) {
        let l = self.steps_per_pass();
        (flat / l, &self.plan.steps[flat % l])
    }

    fn width(&self, pass: usize) -> u64 {
        self.geo.passes[pass].len() as u64
    }

    fn done(&self) -> bool {
        self.graph.retired == self.total_steps() && self.dense.retired == self.jobs.len()
    }

    // Graph engine.

    fn fetch_ready(&self, flat: usize) -> bool {
        let (pass, st) = self.step(flat);
        if self.spec.pool_weights.is_some() {
            let pool = self.pool_job[pass * self.geo.num_blocks + st.coord.src];
            if !self.job_done[pool] {
                return false;
            }
        }
        match st.reload_after {
            Some(j) => self.store_done[pass * self.steps_per_pass() + j],
            None => true,
        }
    }

    fn issue_fetch(&mut self, m: &mut Machine, flat: usize) -> Result<()> {
        let (pass, st) = self.step(flat);
        let st = st.clone();
        let w = self.width(pass);
        let cfg = &self.hw.graph;
        let edges = self.grid.shard(st.coord).len() as u64;
        let edge_bytes = edges * cfg.edge_bytes;
        let src_bytes = st.src_nodes * self.input_sets * w * 4;
        let reload_bytes = if st.reload_after.is_some() { st.dst_nodes * w * 4 } else { 0 };
        if edge_bytes > cfg.edge_bank_bytes() {
            return Err(Error::Capacity(format!(
                "shard {:?} holds {edges} edges, more than the edge bank",
                st.coord
            )));
        }
        let src_block = self.grid.block_nodes(st.coord.src).len() as u64;
        self.pad.begin_fill((src_block * self.input_sets + st.dst_nodes) * w * 4)?;

        let now = m.now();
        let t = &mut self.shard_trace[flat];
        t.edges = edges;
        t.edge_bytes = edge_bytes;
        t.src_bytes = src_bytes;
        t.reload_bytes = reload_bytes;
        t.fetch_issue = now;
        let reqs = [
            Request::read(Requestor::GRAPH_FETCH, edge_bytes, Stream::Edges),
            Request::read(Requestor::GRAPH_FETCH, src_bytes, Stream::Features),
            Request::read(Requestor::GRAPH_FETCH, reload_bytes, Stream::Features),
        ];
        let mut pending = 0;
        for r in reqs.into_iter().filter(|r| r.bytes > 0) {
            m.issue(r, Owner::Fetch(flat))?;
            pending += 1;
        }
        if pending == 0 {
            self.finish_fetch(now, flat)?;
        } else {
            self.graph.load = Some((flat, pending));
        }
        Ok(())
    }

    fn finish_fetch(&mut self, now: u64, flat: usize) -> Result<()> {
        self.pad.complete_fill()?;
        self.graph.load = None;
        self.graph.loaded = Some(flat);
        self.shard_trace[flat].fetch_done = now;
        Ok(())
    }

    fn start_compute(&mut self, now: u64, flat: usize) -> Result<()> {
        self.pad.swap_banks()?;
        let (pass, st) = self.step(flat);
        let coord = st.coord;
        let job = ShardJob {
            coord,
            edges: self.grid.shard(coord),
            dims: self.geo.passes[pass].clone(),
            aggregator: self.spec.aggregator,
            needs_partial_reload: st.reload_after.is_some(),
            self_nodes: coord.is_diagonal().then(|| self.grid.block_nodes(coord.dst)),
        };
        let cycles = if self.functional {
            let features = if self.spec.pool_weights.is_some() { &self.pooled } else { self.h };
            shard_compute(&self.hw.graph, self.grid, &job, features, &mut self.agg)?
        } else {
            compute_cycles(&self.hw.graph, self.grid, &job)
        };
        let end = now + cycles.max(1);
        self.graph.compute = Some((flat, end));
        self.shard_trace[flat].compute_start = now;
        self.shard_trace[flat].compute_done = end;
        Ok(())
    }

    fn start_writeback(&mut self, m: &mut Machine, flat: usize) -> Result<()> {
        self.pad.release_active();
        let (pass, st) = self.step(flat);
        let Some(store) = st.store else {
            self.shard_trace[flat].writeback_done = m.now();
            self.graph.retired += 1;
            return Ok(());
        };
        let bytes = st.dst_nodes * self.width(pass) * 4;
        if store.is_final && self.functional && !self.scales.is_empty() {
            let dims = self.geo.passes[pass].clone();
            for v in self.grid.block_nodes(store.block) {
                let scale = self.scales[v as usize];
                for x in &mut self.agg.row_mut(v as usize)[dims.clone()] {
                    *x *= scale;
                }
            }
        }
        let t = &mut self.shard_trace[flat];
        t.store_bytes = bytes;
        t.final_store = store.is_final;
        m.issue(Request::write(Requestor::GRAPH_WRITEBACK, bytes, Stream::Features), Owner::Store(flat))?;
        self.graph.store = Some(flat);
        Ok(())
    }

    fn step_graph(&mut self, m: &mut Machine) -> Result<bool> {
        let now = m.now();
        let mut changed = false;
        if let Some((flat, end)) = self.graph.compute {
            if end <= now {
                self.graph.compute = None;
                self.graph.hold = Some(flat);
                changed = true;
            }
        }
        if let (Some(flat), None) = (self.graph.hold, self.graph.store) {
            self.graph.hold = None;
            self.start_writeback(m, flat)?;
            changed = true;
        }
        if self.graph.compute.is_none() && self.graph.hold.is_none() {
            if let Some(flat) = self.graph.loaded.take() {
                self.start_compute(now, flat)?;
                changed = true;
            }
        }
        if self.graph.load.is_none()
            && self.graph.loaded.is_none()
            && self.next_fetch < self.total_steps()
            && self.pad.can_fill()
            && self.fetch_ready(self.next_fetch)
        {
            let flat = self.next_fetch;
            self.next_fetch += 1;
            self.issue_fetch(m, flat)?;
            changed = true;
        }
        Ok(changed)
    }

    // Dense engine.

    fn job_ready(&self, j: usize) -> bool {
        let job = &self.jobs[j];
        match job.kind {
            DenseJobKind::Pool => true,
            DenseJobKind::Extract => {
                let s = self.geo.num_blocks;
                self.column_done[job.pass * s + job.block]
                    && (job.pass == 0 || self.job_done[self.extract_job[(job.pass - 1) * s + job.block]])
            }
        }
    }

    fn issue_load(&mut self, m: &mut Machine, j: usize) -> Result<()> {
        let job = self.jobs[j];
        let mm = job.job;
        let input_bytes = mm.m * mm.k * 4;
        let weight_bytes = dense_weight_traffic(&self.hw.dense, &mm);
        let partial_bytes = if mm.accumulate && !self.partials_on_chip { mm.m * mm.n * 4 } else { 0 };
        let now = m.now();
        let t = &mut self.dense_trace[j];
        t.input_bytes = input_bytes;
        t.weight_bytes = weight_bytes;
        t.partial_bytes = partial_bytes;
        t.load_issue = now;
        let reqs = [
            Request::read(Requestor::DENSE_LOAD, input_bytes, Stream::Activations),
            Request::read(Requestor::DENSE_LOAD, weight_bytes, Stream::Weights),
            Request::read(Requestor::DENSE_LOAD, partial_bytes, Stream::PartialSums),
        ];
        let mut pending = 0;
        for r in reqs.into_iter().filter(|r| r.bytes > 0) {
            m.issue(r, Owner::Load(j))?;
            pending += 1;
        }
        self.issued[j] = true;
        while self.first_unissued < self.jobs.len() && self.issued[self.first_unissued] {
            self.first_unissued += 1;
        }
        self.dense.load = Some((j, pending));
        Ok(())
    }

    /// Runs the job's arithmetic and returns its cycle count.
    fn execute_dense(&mut self, j: usize) -> Result<u64> {
        let job = self.jobs[j];
        let mm = job.job;
        if !self.functional {
            return Ok(dense_cycles(&self.hw.dense, &mm) + mm.n.div_ceil(self.hw.dense.cols));
        }
        let rows = self.grid.block_nodes(job.block);
        let rows = rows.start as usize..rows.end as usize;
        let dims = self.geo.passes[job.pass].clone();
        match job.kind {
            DenseJobKind::Pool => {
                let wp = self.spec.pool_weights.as_ref().expect("pool layer has pool weights");
                let x = self.h.slice(rows.clone(), 0..self.spec.in_dim);
                let w = wp.slice(0..self.spec.in_dim, dims.clone());
                let (y, cycles) = dense_execute(&self.hw.dense, &mm, &x, &w, None, Activation::Relu)?;
                self.pooled.set_block(rows.start, dims.start, &y);
                Ok(cycles)
            }
            DenseJobKind::Extract => {
                let out_dim = self.spec.out_dim;
                let self_dims = self.geo.self_ranges[job.pass].clone();
                let mut x = self.agg.slice(rows.clone(), dims.clone());
                let mut w = self.spec.weights.slice(dims.clone(), 0..out_dim);
                if !self_dims.is_empty() {
                    let agg_dim = self.spec.agg_dim();
                    x = x.hstack(&self.h.slice(rows.clone(), self_dims.clone()))?;
                    w = w.vstack(&self.spec.weights.slice(agg_dim + self_dims.start..agg_dim + self_dims.end, 0..out_dim))?;
                }
                let partial = mm.accumulate.then(|| self.out.slice(rows.clone(), 0..out_dim));
                let act = if job.last_pass { self.spec.activation } else { Activation::None };
                let (y, cycles) = dense_execute(&self.hw.dense, &mm, &x, &w, partial.as_ref(), act)?;
                self.out.set_block(rows.start, 0, &y);
                Ok(cycles)
            }
        }
    }

    fn start_output(&mut self, m: &mut Machine, j: usize) -> Result<()> {
        let job = self.jobs[j];
        let bytes = job.job.m * job.job.n * 4;
        let stream = match job.kind {
            DenseJobKind::Pool => Some(Stream::Activations),
            DenseJobKind::Extract if job.last_pass => Some(Stream::Activations),
            DenseJobKind::Extract if self.partials_on_chip => None,
            DenseJobKind::Extract => Some(Stream::PartialSums),
        };
        match stream {
            Some(stream) => {
                self.dense_trace[j].output_bytes = bytes;
                m.issue(Request::write(Requestor::DENSE_STORE, bytes, stream), Owner::Output(j))?;
                self.dense.store = Some(j);
            }
            None => self.finish_output(m.now(), j),
        }
        Ok(())
    }

    fn finish_output(&mut self, now: u64, j: usize) {
        self.dense.store = None;
        self.job_done[j] = true;
        self.dense.retired += 1;
        self.dense_trace[j].store_done = now;
    }

    fn step_dense(&mut self, m: &mut Machine) -> Result<bool> {
        let now = m.now();
        let mut changed = false;
        if let Some((j, end)) = self.dense.compute {
            if end <= now {
                self.dense.compute = None;
                self.dense.hold = Some(j);
                changed = true;
            }
        }
        if let (Some(j), None) = (self.dense.hold, self.dense.store) {
            self.dense.hold = None;
            self.start_output(m, j)?;
            changed = true;
        }
        if self.dense.compute.is_none() && self.dense.hold.is_none() {
            if let Some(j) = self.dense.loaded.take() {
                let cycles = self.execute_dense(j)?;
                let end = now + cycles.max(1);
                self.dense.compute = Some((j, end));
                self.dense_trace[j].compute_start = now;
                self.dense_trace[j].compute_done = end;
                changed = true;
            }
        }
        if self.dense.load.is_none() && self.dense.loaded.is_none() {
            let next = (self.first_unissued..self.jobs.len()).find(|&j| !self.issued[j] && self.job_ready(j));
            if let Some(j) = next {
                self.issue_load(m, j)?;
                if self.dense.load == Some((j, 0)) {
                    self.dense.load = None;
                    self.dense.loaded = Some(j);
                    self.dense_trace[j].load_done = now;
                }
                changed = true;
            }
        }
        Ok(changed)
    }

    fn on_complete(&mut self, m: &mut Machine, owner: Owner) -> Result<()> {
        let now = m.now();
        match owner {
            Owner::Fetch(flat) => {
                let (f, pending) = self.graph.load.expect("fetch in flight");
                debug_assert_eq!(f, flat);
                if pending == 1 {
                    self.finish_fetch(now, flat)?;
                } else {
                    self.graph.load = Some((f, pending - 1));
                }
            }
            Owner::Store(flat) => {
                self.graph.store = None;
                self.graph.retired += 1;
                self.store_done[flat] = true;
                self.shard_trace[flat].writeback_done = now;
                let (pass, st) = self.step(flat);
                let store = st.store.expect("store step");
                if store.is_final {
                    self.column_done[pass * self.geo.num_blocks + store.block] = true;
                    m.columns.push(ColumnTrace {
                        layer: self.index,
                        pass,
                        block: store.block,
                        complete: now,
                    });
                }
            }
            Owner::Load(j) => {
                let (jj, pending) = self.dense.load.expect("load in flight");
                debug_assert_eq!(jj, j);
                if pending == 1 {
                    self.dense.load = None;
                    self.dense.loaded = Some(j);
                    self.dense_trace[j].load_done = now;
                } else {
                    self.dense.load = Some((j, pending - 1));
                }
            }
            Owner::Output(j) => self.finish_output(now, j),
        }
        Ok(())
    }

    fn next_compute_end(&self) -> Option<u64> {
        [self.graph.compute, self.dense.compute]
            .into_iter()
            .flatten()
            .map(|(_, end)| end)
            .min()
    }

    fn diagnostic(&self) -> String {
        format!(
            "layer {}: graph engine retired {}/{} shards (next fetch {}), dense engine retired {}/{} jobs",
            self.index,
            self.graph.retired,
            self.total_steps(),
            self.next_fetch,
            self.dense.retired,
            self.jobs.len()
        )
    }

    fn run(&mut self, m: &mut Machine) -> Result<()> {
        let mut completed: Vec<TxnId> = Vec::new();
        loop {
            for id in completed.drain(..) {
                let owner = m.owners.remove(&id).expect("every transaction has an owner");
                self.on_complete(m, owner)?;
            }
            while self.step_graph(m)? | self.step_dense(m)? {}
            if self.done() {
                return Ok(());
            }
            let now = m.now();
            m.dram.admit();
            let until_compute = self.next_compute_end().map(|end| end - now);
            if m.dram.is_idle() && until_compute.is_none() {
                return Err(Error::Deadlock {
                    cycle: now,
                    detail: self.diagnostic(),
                });
            }
            let quiet = m.dram.quiet_cycles();
            let step = quiet.saturating_add(1).min(until_compute.unwrap_or(u64::MAX));
            let graph_left = self.graph.retired < self.total_steps();
            let dense_left = self.dense.retired < self.jobs.len();
            self.graph.charge(&mut m.graph_stats, graph_left, step);
            self.dense.charge(&mut m.dense_stats, dense_left, step);
            m.dram.skip(step - 1);
            completed = m.dram.tick();
        }
    }
}

pub(super) fn simulate(
    graph: &Graph,
    h: &FeatureMatrix,
    net: &NetworkSpec,
    hw: &HardwareConfig,
    df: &DataflowConfig,
    layouts: &[(LayerGeometry, ShardGrid)],
    opts: RunOptions,
) -> Result<SimReport> {
    let mut m = Machine {
        dram: Dram::new(hw.memory)?,
        owners: HashMap::new(),
        graph_stats: EngineStats::default(),
        dense_stats: EngineStats::default(),
        shards: Vec::new(),
        dense_jobs: Vec::new(),
        columns: Vec::new(),
    };
    let mut layers = Vec::with_capacity(net.layers.len());
    let mut features = h.clone();
    for (index, (spec, (geo, grid))) in net.layers.iter().zip(layouts).enumerate() {
        let start = m.now();
        let mut run = LayerRun::new(index, graph, spec, geo, grid, hw, df, &features, opts.functional);
        run.run(&mut m)?;
        let counts = run.plan.counts();
        let passes = geo.passes.len() as u64;
        layers.push(LayerReport {
            index,
            order: geo.order,
            width: geo.width,
            passes: geo.passes.len(),
            nodes_per_block: geo.nodes_per_block,
            num_blocks: geo.num_blocks,
            start_cycle: start,
            end_cycle: m.now(),
            src_set_loads: counts.src_set_loads * passes,
            dst_reloads: counts.dst_reloads * passes,
            dst_stores: counts.dst_stores * passes,
            input_sets: df.input_sets,
        });
        m.shards.append(&mut run.shard_trace);
        m.dense_jobs.append(&mut run.dense_trace);
        let out = std::mem::replace(&mut run.out, Matrix::zeros(0, 0));
        drop(run);
        features = out;
    }
    debug_assert!(m.dram.is_idle());
    Ok(SimReport {
        total_cycles: m.now(),
        clock_ghz: hw.clock_ghz,
        graph_engine: m.graph_stats,
        dense_engine: m.dense_stats,
        dram: m.dram.stats().clone(),
        layers,
        output: opts.functional.then_some(features),
        shards: m.shards,
        dense_jobs: m.dense_jobs,
        columns: m.columns,
    })
}
