//! C ABI for gnnsim.
//!
//! Objects are opaque handles made by constructors such as
//! `gnnsim_graph_load` and released with the matching `_free`. Every fallible
//! call returns a [`GnnsimStatus`]; on failure the message is available from
//! [`gnnsim_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gnnsim::config::ScaleKnob;
use gnnsim::costmodel::{cost, CostInputs};
use gnnsim::graph::{erdos_renyi, load_features, load_graph, random_features};
use gnnsim::network::{make_builtin, NetworkConfig};
use gnnsim::report::{output_hash, summary, RunLabel};
use gnnsim::shard::SweepPattern;
use gnnsim::{
    DataflowConfig, DataflowMode, Error, FeatureMatrix, Graph, HardwareConfig, NetworkKind, NetworkSpec, OrderChoice,
    RunOptions, SimReport, TraversalOrder,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnnsimStatus {
    Ok = 0,
    /// Null pointer, bad enum value or non-UTF-8 string.
    InvalidArgument = 1,
    Io = 2,
    /// Malformed input file or config.
    Parse = 3,
    /// Inconsistent shapes, parameters or configuration.
    Config = 4,
    /// The workload does not fit the on-chip buffers.
    Capacity = 5,
    /// Internal simulator error.
    Internal = 6,
    Panic = 7,
}

impl From<&Error> for GnnsimStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => GnnsimStatus::Io,
            Error::Parse { .. } | Error::Format(_) => GnnsimStatus::Parse,
            Error::NodeRange { .. }
            | Error::Validation(_)
            | Error::Parameter(_)
            | Error::Shape(_)
            | Error::Config(_) => GnnsimStatus::Config,
            Error::Capacity(_) => GnnsimStatus::Capacity,
            Error::Protocol(_) | Error::Deadlock { .. } => GnnsimStatus::Internal,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: GnnsimStatus, msg: impl Into<String>) -> GnnsimStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), GnnsimStatus>) -> GnnsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GnnsimStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(GnnsimStatus::Panic, "panic inside gnnsim"),
    }
}

fn lib<T>(r: gnnsim::Result<T>) -> Result<T, GnnsimStatus> {
    r.map_err(|e| fail(GnnsimStatus::from(&e), e.to_string()))
}

fn invalid(msg: &str) -> GnnsimStatus {
    fail(GnnsimStatus::InvalidArgument, msg)
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, GnnsimStatus> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GnnsimStatus> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), GnnsimStatus> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

pub struct GnnsimGraph(Graph);
pub struct GnnsimFeatures(FeatureMatrix);
pub struct GnnsimNetwork(NetworkSpec);
pub struct GnnsimHardware(HardwareConfig);
pub struct GnnsimReport {
    report: SimReport,
    label: RunLabel,
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gnnsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gnnsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a graph from parallel arrays of edge endpoints.
///
/// # Safety
/// `src` and `dst` must each point to `num_edges` readable values (or be
/// null when `num_edges` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_graph_from_edges(
    num_nodes: usize,
    src: *const u32,
    dst: *const u32,
    num_edges: usize,
    out: *mut *mut GnnsimGraph,
) -> GnnsimStatus {
    guard(|| {
        let pairs = if num_edges == 0 {
            Vec::new()
        } else {
            if src.is_null() || dst.is_null() {
                return Err(invalid("edge arrays are null"));
            }
            let (s, d) = (
                std::slice::from_raw_parts(src, num_edges),
                std::slice::from_raw_parts(dst, num_edges),
            );
            s.iter().copied().zip(d.iter().copied()).collect()
        };
        let g = lib(Graph::from_pairs(num_nodes, &pairs))?;
        put(out, GnnsimGraph(g))
    })
}

/// Loads an edge-list file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_graph_load(path: *const c_char, num_nodes: usize, out: *mut *mut GnnsimGraph) -> GnnsimStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let g = lib(load_graph(Path::new(path), num_nodes))?;
        put(out, GnnsimGraph(g))
    })
}

/// Directed Erdős–Rényi graph without self-loops.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_graph_random(
    num_nodes: usize,
    avg_degree: f64,
    seed: u64,
    out: *mut *mut GnnsimGraph,
) -> GnnsimStatus {
    guard(|| {
        let g = lib(erdos_renyi(num_nodes, avg_degree, seed))?;
        put(out, GnnsimGraph(g))
    })
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_graph_num_nodes(g: *const GnnsimGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_nodes())
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_graph_num_edges(g: *const GnnsimGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// # Safety
/// `g` must be null or a graph handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_graph_free(g: *mut GnnsimGraph) {
    free(g);
}

/// Copies a row-major `num_nodes x dim` array.
///
/// # Safety
/// `data` must point to `num_nodes * dim` readable floats; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_features_from_data(
    num_nodes: usize,
    dim: usize,
    data: *const f32,
    out: *mut *mut GnnsimFeatures,
) -> GnnsimStatus {
    guard(|| {
        let len = num_nodes
            .checked_mul(dim)
            .ok_or_else(|| invalid("feature size overflows"))?;
        if data.is_null() && len > 0 {
            return Err(invalid("data is null"));
        }
        let values = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(data, len).to_vec() };
        let m = lib(FeatureMatrix::from_vec(num_nodes, dim, values))?;
        put(out, GnnsimFeatures(m))
    })
}

/// Loads a little-endian f32 feature file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_features_load(
    path: *const c_char,
    num_nodes: usize,
    dim: usize,
    out: *mut *mut GnnsimFeatures,
) -> GnnsimStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let m = lib(load_features(Path::new(path), num_nodes, dim))?;
        put(out, GnnsimFeatures(m))
    })
}

/// Uniform features in `[-1, 1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_features_random(
    num_nodes: usize,
    dim: usize,
    seed: u64,
    out: *mut *mut GnnsimFeatures,
) -> GnnsimStatus {
    guard(|| put(out, GnnsimFeatures(random_features(num_nodes, dim, seed))))
}

/// # Safety
/// `f` must be null or a feature handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_features_free(f: *mut GnnsimFeatures) {
    free(f);
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnnsimNetworkKind {
    Gcn = 0,
    Graphsage = 1,
    GraphsagePool = 2,
}

fn network_kind(k: i32) -> Result<NetworkKind, GnnsimStatus> {
    match k {
        k if k == GnnsimNetworkKind::Gcn as i32 => Ok(NetworkKind::Gcn),
        k if k == GnnsimNetworkKind::Graphsage as i32 => Ok(NetworkKind::Graphsage),
        k if k == GnnsimNetworkKind::GraphsagePool as i32 => Ok(NetworkKind::Graphsagepool),
        _ => Err(invalid(&format!("unknown network kind {k}"))),
    }
}

/// Two-layer built-in network with seeded weights; `kind` is a
/// [`GnnsimNetworkKind`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_network_builtin(
    kind: i32,
    in_dim: usize,
    hidden_dim: usize,
    out_dim: usize,
    seed: u64,
    out: *mut *mut GnnsimNetwork,
) -> GnnsimStatus {
    guard(|| {
        let net = lib(make_builtin(network_kind(kind)?, in_dim, hidden_dim, out_dim, seed))?;
        put(out, GnnsimNetwork(net))
    })
}

/// Network from its TOML description.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_network_from_toml(text: *const c_char, out: *mut *mut GnnsimNetwork) -> GnnsimStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let net = lib(NetworkConfig::from_toml(text).and_then(|c| c.build()))?;
        put(out, GnnsimNetwork(net))
    })
}

/// # Safety
/// `n` must be null or a network handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_network_free(n: *mut GnnsimNetwork) {
    free(n);
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_hardware_default(out: *mut *mut GnnsimHardware) -> GnnsimStatus {
    guard(|| put(out, GnnsimHardware(HardwareConfig::default())))
}

/// Hardware from TOML with `dense`, `graph` and `memory` sections; missing
/// keys keep their defaults.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_hardware_from_toml(text: *const c_char, out: *mut *mut GnnsimHardware) -> GnnsimStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let hw = lib(HardwareConfig::from_toml(text))?;
        put(out, GnnsimHardware(hw))
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnnsimScaleKnob {
    GraphMemory = 0,
    DenseArray = 1,
    Bandwidth = 2,
}

/// Doubles one resource in place; `knob` is a [`GnnsimScaleKnob`].
///
/// # Safety
/// `hw` must be a live hardware handle.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_hardware_scale(hw: *mut GnnsimHardware, knob: i32) -> GnnsimStatus {
    guard(|| {
        let hw = hw.as_mut().ok_or_else(|| invalid("hardware is null"))?;
        let knob = match knob {
            k if k == GnnsimScaleKnob::GraphMemory as i32 => ScaleKnob::GraphMemory,
            k if k == GnnsimScaleKnob::DenseArray as i32 => ScaleKnob::DenseArray,
            k if k == GnnsimScaleKnob::Bandwidth as i32 => ScaleKnob::Bandwidth,
            k => return Err(invalid(&format!("unknown scale knob {k}"))),
        };
        hw.0 = hw.0.scaled(knob);
        Ok(())
    })
}

/// # Safety
/// `hw` must be null or a hardware handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_hardware_free(hw: *mut GnnsimHardware) {
    free(hw);
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnnsimOrder {
    Auto = 0,
    SourceStationary = 1,
    DestinationStationary = 2,
}

/// Dataflow choice passed by value. `order` is a [`GnnsimOrder`]; zero
/// means "automatic" for `nodes_per_block`; `block_size` is ignored unless
/// `blocked` is set.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GnnsimDataflow {
    pub blocked: bool,
    pub block_size: usize,
    pub order: i32,
    pub nodes_per_block: usize,
    pub input_sets: u64,
}

/// Conventional, automatic order and block size, one input set.
#[no_mangle]
pub extern "C" fn gnnsim_dataflow_default() -> GnnsimDataflow {
    GnnsimDataflow {
        blocked: false,
        block_size: 0,
        order: GnnsimOrder::Auto as i32,
        nodes_per_block: 0,
        input_sets: 1,
    }
}

fn order_choice(o: i32) -> Result<OrderChoice, GnnsimStatus> {
    match o {
        o if o == GnnsimOrder::Auto as i32 => Ok(OrderChoice::Auto),
        o if o == GnnsimOrder::SourceStationary as i32 => Ok(OrderChoice::Src),
        o if o == GnnsimOrder::DestinationStationary as i32 => Ok(OrderChoice::Dst),
        _ => Err(invalid(&format!("unknown order {o}"))),
    }
}

fn dataflow(d: &GnnsimDataflow) -> Result<DataflowConfig, GnnsimStatus> {
    Ok(DataflowConfig {
        mode: if d.blocked { DataflowMode::Blocked } else { DataflowMode::Conventional },
        block_size: d.blocked.then_some(d.block_size),
        order: order_choice(d.order)?,
        nodes_per_block: (d.nodes_per_block > 0).then_some(d.nodes_per_block),
        input_sets: d.input_sets,
        sweep: SweepPattern::Serpentine,
    })
}

/// Simulates `network` over the graph. With `functional` false feature
/// values are skipped; cycles and traffic are unchanged.
///
/// # Safety
/// All handles must be live; `df` must point to a valid struct; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_run(
    graph: *const GnnsimGraph,
    features: *const GnnsimFeatures,
    network: *const GnnsimNetwork,
    hardware: *const GnnsimHardware,
    df: *const GnnsimDataflow,
    functional: bool,
    out: *mut *mut GnnsimReport,
) -> GnnsimStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let h = &deref(features, "features")?.0;
        let net = &deref(network, "network")?.0;
        let hw = &deref(hardware, "hardware")?.0;
        let df = dataflow(deref(df, "dataflow")?)?;
        let report = lib(gnnsim::run_with(g, h, net, hw, &df, RunOptions { functional }))?;
        let label = RunLabel {
            network: "custom".into(),
            num_nodes: g.num_nodes(),
            num_edges: g.num_edges(),
            feature_dim: h.dim(),
            dataflow: df,
        };
        put(out, GnnsimReport { report, label })
    })
}

/// Headline numbers of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GnnsimStats {
    pub total_cycles: u64,
    pub graph_busy: u64,
    pub graph_stall: u64,
    pub dense_busy: u64,
    pub dense_stall: u64,
    pub dram_read_bytes: u64,
    pub dram_write_bytes: u64,
    pub feature_bytes: u64,
}

/// # Safety
/// `report` must be a live report handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_report_stats(report: *const GnnsimReport, out: *mut GnnsimStats) -> GnnsimStatus {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let out = out.as_mut().ok_or_else(|| invalid("output pointer is null"))?;
        *out = GnnsimStats {
            total_cycles: r.total_cycles,
            graph_busy: r.graph_engine.busy,
            graph_stall: r.graph_engine.stalls(),
            dense_busy: r.dense_engine.busy,
            dense_stall: r.dense_engine.stalls(),
            dram_read_bytes: r.dram.read_bytes,
            dram_write_bytes: r.dram.write_bytes,
            feature_bytes: r.feature_bytes(),
        };
        Ok(())
    })
}

/// Shape of the final-layer features; `0 x 0` for timing-only runs.
///
/// # Safety
/// `report` must be a live report handle; `rows` and `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_report_output_shape(
    report: *const GnnsimReport,
    rows: *mut usize,
    cols: *mut usize,
) -> GnnsimStatus {
    guard(|| {
        let r = &deref(report, "report")?.report;
        if rows.is_null() || cols.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let (r_, c_) = r.output.as_ref().map_or((0, 0), |m| (m.rows(), m.cols()));
        *rows = r_;
        *cols = c_;
        Ok(())
    })
}

/// Copies the row-major output into `buf`, which must hold exactly
/// rows x cols floats.
///
/// # Safety
/// `report` must be a live report handle; `buf` must point to `len`
/// writable floats.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_report_copy_output(report: *const GnnsimReport, buf: *mut f32, len: usize) -> GnnsimStatus {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let m = r
            .output
            .as_ref()
            .ok_or_else(|| fail(GnnsimStatus::Config, "run was timing-only"))?;
        let data = m.as_slice();
        if len != data.len() || buf.is_null() {
            return Err(invalid(&format!("buffer holds {len} floats, output has {}", data.len())));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(data);
        Ok(())
    })
}

/// `key=value` summary; free with [`gnnsim_string_free`]. Null on failure.
///
/// # Safety
/// `report` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_report_summary(report: *const GnnsimReport) -> *mut c_char {
    let mut text = ptr::null_mut();
    guard(|| {
        let r = deref(report, "report")?;
        let s = summary(&r.label, &r.report);
        text = CString::new(s).map_err(|_| invalid("summary has a nul"))?.into_raw();
        Ok(())
    });
    text
}

/// Hex SHA-256 of the output; free with [`gnnsim_string_free`].
///
/// # Safety
/// `report` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_report_output_hash(report: *const GnnsimReport) -> *mut c_char {
    let mut text = ptr::null_mut();
    guard(|| {
        let r = deref(report, "report")?;
        text = CString::new(output_hash(r.report.output.as_ref()))
            .expect("hex has no nul")
            .into_raw();
        Ok(())
    });
    text
}

/// # Safety
/// `report` must be null or a report handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_report_free(report: *mut GnnsimReport) {
    free(report);
}

/// Closed-form shard-set reads and writes for one sweep of an S x S grid;
/// `order` is a [`GnnsimOrder`], where auto picks the cheaper one.
///
/// # Safety
/// `reads` and `writes` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gnnsim_cost(
    order: i32,
    shards: u64,
    input_sets: u64,
    reads: *mut u64,
    writes: *mut u64,
) -> GnnsimStatus {
    guard(|| {
        if reads.is_null() || writes.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let inputs = CostInputs::new(shards, input_sets);
        lib(inputs.validate())?;
        let order = match order_choice(order)? {
            OrderChoice::Src => TraversalOrder::SourceStationary,
            OrderChoice::Dst => TraversalOrder::DestinationStationary,
            OrderChoice::Auto => gnnsim::costmodel::best_order(&inputs),
        };
        let c = cost(order, &inputs);
        *reads = c.reads;
        *writes = c.writes;
        Ok(())
    })
}
