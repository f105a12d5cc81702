//! Off-chip memory and on-chip double buffers.
//!
//! DRAM is one FIFO served at a fixed number of bytes per cycle. A request
//! completes `base_latency` cycles after the cycle that serves its last
//! byte. Spare bandwidth in a cycle rolls over to the next queued request.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TxnId = u64;

/// Who issued a request. Same-cycle arrivals are admitted in id order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Requestor(pub u8);

impl Requestor {
    pub const GRAPH_FETCH: Requestor = Requestor(0);
    pub const GRAPH_WRITEBACK: Requestor = Requestor(1);
    pub const DENSE_LOAD: Requestor = Requestor(2);
    pub const DENSE_STORE: Requestor = Requestor(3);
}

/// Traffic class used for byte accounting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Edges,
    /// Graph-engine node features: source loads, destination partial
    /// reloads and spills, aggregated writebacks.
    Features,
    Weights,
    /// Dense-engine partial sums carried across dimension blocks.
    PartialSums,
    /// Dense-engine input and output activations.
    Activations,
}

impl Stream {
    pub const ALL: [Stream; 5] = [
        Stream::Edges,
        Stream::Features,
        Stream::Weights,
        Stream::PartialSums,
        Stream::Activations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stream::Edges => "edges",
            Stream::Features => "features",
            Stream::Weights => "weights",
            Stream::PartialSums => "partial_sums",
            Stream::Activations => "activations",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub requestor: Requestor,
    pub bytes: u64,
    pub is_write: bool,
    pub stream: Stream,
}

impl Request {
    pub fn read(requestor: Requestor, bytes: u64, stream: Stream) -> Self {
        Self {
            requestor,
            bytes,
            is_write: false,
            stream,
        }
    }

    pub fn write(requestor: Requestor, bytes: u64, stream: Stream) -> Self {
        Self {
            requestor,
            bytes,
            is_write: true,
            stream,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DramConfig {
    pub bandwidth_bytes_per_cycle: u64,
    pub base_latency: u64,
}

impl Default for DramConfig {
    fn default() -> Self {
        Self {
            bandwidth_bytes_per_cycle: 256,
            base_latency: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamBytes {
    pub read: u64,
    pub write: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DramStats {
    pub read_bytes: u64,
    pub write_bytes: u64,
    pub issued_read_bytes: u64,
    pub issued_write_bytes: u64,
    pub by_stream: [StreamBytes; 5],
    pub busy_cycles: u64,
    pub max_bytes_in_cycle: u64,
    /// Cycles a requestor had queued bytes but received none.
    pub stall_cycles: BTreeMap<Requestor, u64>,
    pub transactions: u64,
}

impl DramStats {
    pub fn stream(&self, s: Stream) -> StreamBytes {
        self.by_stream[s.index()]
    }
}

#[derive(Clone, Debug)]
struct Pending {
    id: TxnId,
    req: Request,
    remaining: u64,
}

#[derive(Clone, Debug)]
pub struct Dram {
    cfg: DramConfig,
    now: u64,
    queue: VecDeque<Pending>,
    incoming: Vec<Pending>,
    latency_pipe: VecDeque<(u64, TxnId)>,
    next_id: TxnId,
    stats: DramStats,
}

impl Dram {
    pub fn new(cfg: DramConfig) -> Result<Self> {
        if cfg.bandwidth_bytes_per_cycle == 0 {
            return Err(Error::Parameter("DRAM bandwidth must be positive".into()));
        }
        Ok(Self {
            cfg,
            now: 0,
            queue: VecDeque::new(),
            incoming: Vec::new(),
            latency_pipe: VecDeque::new(),
            next_id: 0,
            stats: DramStats::default(),
        })
    }

    pub fn config(&self) -> &DramConfig {
        &self.cfg
    }

    /// Current cycle.
    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn stats(&self) -> &DramStats {
        &self.stats
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty() && self.incoming.is_empty() && self.latency_pipe.is_empty()
    }

    pub fn request(&mut self, req: Request) -> Result<TxnId> {
        if req.bytes == 0 {
            return Err(Error::Parameter("zero-byte DRAM request".into()));
        }
        let id = self.next_id;
        self.next_id += 1;
        if req.is_write {
            self.stats.issued_write_bytes += req.bytes;
        } else {
            self.stats.issued_read_bytes += req.bytes;
        }
        self.stats.transactions += 1;
        self.incoming.push(Pending {
            id,
            req,
            remaining: req.bytes,
        });
        Ok(id)
    }

    /// Moves this cycle's arrivals into the queue in requestor order.
    pub fn admit(&mut self) {
        if self.incoming.is_empty() {
            return;
        }
        self.incoming.sort_by_key(|p| p.req.requestor);
        self.queue.extend(self.incoming.drain(..));
    }

    fn account(&mut self, req: &Request, bytes: u64) {
        let slot = &mut self.stats.by_stream[req.stream.index()];
        if req.is_write {
            self.stats.write_bytes += bytes;
            slot.write += bytes;
        } else {
            self.stats.read_bytes += bytes;
            slot.read += bytes;
        }
    }

    /// Advances one cycle and returns the transactions that completed.
    pub fn tick(&mut self) -> Vec<TxnId> {
        self.admit();
        let waiting: BTreeSet<Requestor> = self.queue.iter().map(|p| p.req.requestor).collect();
        let mut served_by = BTreeSet::new();
        let mut budget = self.cfg.bandwidth_bytes_per_cycle;
        let mut served = 0;
        while budget > 0 {
            let Some(head) = self.queue.front_mut() else { break };
            let take = budget.min(head.remaining);
            head.remaining -= take;
            budget -= take;
            served += take;
            served_by.insert(head.req.requestor);
            let req = head.req;
            let finished = head.remaining == 0;
            self.account(&req, take);
            if finished {
                let done = self.queue.pop_front().expect("head exists");
                self.latency_pipe
                    .push_back((self.now + 1 + self.cfg.base_latency, done.id));
            }
        }
        assert!(served <= self.cfg.bandwidth_bytes_per_cycle);
        if served > 0 {
            self.stats.busy_cycles += 1;
        }
        self.stats.max_bytes_in_cycle = self.stats.max_bytes_in_cycle.max(served);
        for r in waiting.difference(&served_by) {
            *self.stats.stall_cycles.entry(*r).or_default() += 1;
        }
        self.now += 1;
        let mut done = Vec::new();
        while let Some(&(due, id)) = self.latency_pipe.front() {
            if due > self.now {
                break;
            }
            self.latency_pipe.pop_front();
            done.push(id);
        }
        done
    }

    /// Cycles that can pass with no completion and no change of queue head.
    pub fn quiet_cycles(&self) -> u64 {
        let mut quiet = u64::MAX;
        if !self.incoming.is_empty() {
            return 0;
        }
        if let Some(head) = self.queue.front() {
            quiet = quiet.min((head.remaining - 1) / self.cfg.bandwidth_bytes_per_cycle);
        }
        if let Some(&(due, _)) = self.latency_pipe.front() {
            quiet = quiet.min(due.saturating_sub(self.now + 1));
        }
        quiet
    }

    /// Equivalent to `k` calls of [`tick`](Self::tick) that complete nothing.
    pub fn skip(&mut self, k: u64) {
        if k == 0 {
            return;
        }
        assert!(k <= self.quiet_cycles(), "skip past a DRAM event");
        if let Some(head) = self.queue.front_mut() {
            let bytes = k * self.cfg.bandwidth_bytes_per_cycle;
            head.remaining -= bytes;
            let req = head.req;
            self.account(&req, bytes);
            self.stats.busy_cycles += k;
            self.stats.max_bytes_in_cycle = self.stats.max_bytes_in_cycle.max(self.cfg.bandwidth_bytes_per_cycle);
            let waiting: BTreeSet<Requestor> = self
                .queue
                .iter()
                .map(|p| p.req.requestor)
                .filter(|r| *r != req.requestor)
                .collect();
            for r in waiting {
                *self.stats.stall_cycles.entry(r).or_default() += k;
            }
        }
        self.now += k;
    }

    /// Ticks until every outstanding request completes; returns the cycle.
    pub fn drain(&mut self) -> u64 {
        while !self.is_idle() {
            self.tick();
        }
        self.now
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FillState {
    Empty,
    Filling,
    Filled,
}

/// Two equal banks: compute reads the active bank while the shadow bank is
/// filled for the next job.
#[derive(Clone, Debug)]
pub struct Scratchpad {
    capacity: u64,
    active_bank: u8,
    active_bytes: u64,
    shadow_bytes: u64,
    shadow: FillState,
    computing: bool,
}

impl Scratchpad {
    pub fn new(capacity: u64) -> Self {
        Self {
            capacity,
            active_bank: 0,
            active_bytes: 0,
            shadow_bytes: 0,
            shadow: FillState::Empty,
            computing: false,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn bank_capacity(&self) -> u64 {
        self.capacity / 2
    }

    pub fn active_occupancy(&self) -> u64 {
        self.active_bytes
    }

    pub fn shadow_occupancy(&self) -> u64 {
        self.shadow_bytes
    }

    /// Bank index compute reads from.
    pub fn compute_bank(&self) -> u8 {
        self.active_bank
    }

    /// Bank index fetches write into.
    pub fn fill_bank(&self) -> u8 {
        1 - self.active_bank
    }

    pub fn can_fill(&self) -> bool {
        self.shadow == FillState::Empty
    }

    pub fn is_filled(&self) -> bool {
        self.shadow == FillState::Filled
    }

    pub fn is_computing(&self) -> bool {
        self.computing
    }

    pub fn begin_fill(&mut self, bytes: u64) -> Result<()> {
        if self.shadow != FillState::Empty {
            return Err(Error::Protocol("fill started while the shadow bank is occupied".into()));
        }
        if bytes > self.bank_capacity() {
            return Err(Error::Capacity(format!(
                "{bytes} bytes exceed a {}-byte bank",
                self.bank_capacity()
            )));
        }
        self.shadow = FillState::Filling;
        self.shadow_bytes = bytes;
        Ok(())
    }

    pub fn complete_fill(&mut self) -> Result<()> {
        if self.shadow != FillState::Filling {
            return Err(Error::Protocol("fill completed with no fill in progress".into()));
        }
        self.shadow = FillState::Filled;
        Ok(())
    }

    /// Hands the filled shadow bank to compute and frees the old active bank.
    pub fn swap_banks(&mut self) -> Result<()> {
        if self.shadow != FillState::Filled {
            return Err(Error::Protocol("bank swap before fill completion".into()));
        }
        if self.computing {
            return Err(Error::Protocol("bank swap while compute holds the active bank".into()));
        }
        self.active_bank = 1 - self.active_bank;
        self.active_bytes = self.shadow_bytes;
        self.shadow_bytes = 0;
        self.shadow = FillState::Empty;
        self.computing = true;
        debug_assert_ne!(self.compute_bank(), self.fill_bank());
        Ok(())
    }

    pub fn release_active(&mut self) {
        self.computing = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dram(bw: u64) -> Dram {
        Dram::new(DramConfig {
            bandwidth_bytes_per_cycle: bw,
            base_latency: 0,
        })
        .unwrap()
    }

    fn run_until(d: &mut Dram, id: TxnId) -> u64 {
        loop {
            if d.tick().contains(&id) {
                return d.now();
            }
        }
    }

    #[test]
    fn single_read_completes_after_bytes_over_bandwidth() {
        let mut d = dram(64);
        let id = d.request(Request::read(Requestor(0), 256, Stream::Features)).unwrap();
        assert_eq!(run_until(&mut d, id), 4);
    }

    #[test]
    fn concurrent_reads_are_serialized() {
        let mut d = dram(64);
        let a = d.request(Request::read(Requestor(0), 256, Stream::Features)).unwrap();
        let b = d.request(Request::read(Requestor(1), 256, Stream::Features)).unwrap();
        let mut done = BTreeMap::new();
        while done.len() < 2 {
            for id in d.tick() {
                done.insert(id, d.now());
            }
        }
        assert_eq!((done[&a], done[&b]), (4, 8));
        assert_eq!(d.stats().stall_cycles[&Requestor(1)], 4);
    }

    #[test]
    fn same_cycle_arrivals_ordered_by_requestor() {
        let mut d = dram(64);
        let late = d.request(Request::read(Requestor(3), 64, Stream::Edges)).unwrap();
        let early = d.request(Request::read(Requestor(1), 64, Stream::Edges)).unwrap();
        assert_eq!(d.tick(), vec![early]);
        assert_eq!(d.tick(), vec![late]);
    }

    #[test]
    fn base_latency_delays_completion() {
        let mut d = Dram::new(DramConfig {
            bandwidth_bytes_per_cycle: 64,
            base_latency: 100,
        })
        .unwrap();
        let id = d.request(Request::read(Requestor(0), 64, Stream::Edges)).unwrap();
        assert_eq!(run_until(&mut d, id), 101);
    }

    #[test]
    fn tick_basics() {
        let mut d = dram(64);
        assert!(d.tick().is_empty());
        let id = d.request(Request::write(Requestor(0), 64, Stream::Features)).unwrap();
        assert_eq!(d.tick(), vec![id]);
        assert!(d.request(Request::read(Requestor(0), 0, Stream::Edges)).is_err());
    }

    #[test]
    fn scratchpad_protocol() {
        let mut sp = Scratchpad::new(1024);
        assert!(matches!(sp.swap_banks(), Err(Error::Protocol(_))));
        assert!(matches!(sp.begin_fill(513), Err(Error::Capacity(_))));
        sp.begin_fill(512).unwrap();
        assert!(matches!(sp.swap_banks(), Err(Error::Protocol(_))));
        let fill_bank = sp.fill_bank();
        sp.complete_fill().unwrap();
        sp.swap_banks().unwrap();
        assert_eq!(sp.compute_bank(), fill_bank);
        assert_eq!((sp.active_occupancy(), sp.shadow_occupancy()), (512, 0));
        sp.begin_fill(100).unwrap();
        assert_ne!(sp.fill_bank(), sp.compute_bank());
        sp.complete_fill().unwrap();
        assert!(matches!(sp.swap_banks(), Err(Error::Protocol(_))));
        sp.release_active();
        sp.swap_banks().unwrap();
        assert_eq!(sp.active_occupancy(), 100);
    }

    proptest! {
        /// Busy cycles equal ceil(total / bandwidth) when every request is
        /// queued up front, and counters match the trace sums.
        #[test]
        fn conservation(bw in 1u64..300, reqs in prop::collection::vec((1u64..2000, any::<bool>(), 0u8..4), 1..40)) {
            let mut d = dram(bw);
            let (mut r, mut w) = (0, 0);
            for &(bytes, is_write, who) in &reqs {
                let req = if is_write { Request::write(Requestor(who), bytes, Stream::Features) } else { Request::read(Requestor(who), bytes, Stream::Edges) };
                d.request(req).unwrap();
                if is_write { w += bytes } else { r += bytes }
            }
            d.drain();
            let s = d.stats();
            prop_assert_eq!(s.busy_cycles, (r + w).div_ceil(bw));
            prop_assert_eq!((s.read_bytes, s.write_bytes), (r, w));
            prop_assert_eq!((s.issued_read_bytes, s.issued_write_bytes), (r, w));
            prop_assert_eq!(s.stream(Stream::Edges).read, r);
            prop_assert_eq!(s.stream(Stream::Features).write, w);
            prop_assert!(s.max_bytes_in_cycle <= bw);
        }

        /// Skipping quiet cycles gives the same completions and counters as
        /// ticking through them.
        #[test]
        fn skip_matches_ticks(bw in 1u64..128, lat in 0u64..20, sizes in prop::collection::vec(1u64..3000, 1..10)) {
            let cfg = DramConfig { bandwidth_bytes_per_cycle: bw, base_latency: lat };
            let mut a = Dram::new(cfg).unwrap();
            let mut b = Dram::new(cfg).unwrap();
            for (i, &s) in sizes.iter().enumerate() {
                a.request(Request::read(Requestor(i as u8 % 3), s, Stream::Features)).unwrap();
                b.request(Request::read(Requestor(i as u8 % 3), s, Stream::Features)).unwrap();
            }
            let mut ta = Vec::new();
            while !a.is_idle() {
                for id in a.tick() { ta.push((id, a.now())); }
            }
            let mut tb = Vec::new();
            while !b.is_idle() {
                let q = b.quiet_cycles();
                if q > 0 && q != u64::MAX { b.skip(q); }
                for id in b.tick() { tb.push((id, b.now())); }
            }
            prop_assert_eq!(ta, tb);
            prop_assert_eq!(a.stats(), b.stats());
        }
    }
}
