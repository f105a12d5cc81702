use std::ffi::{CStr, CString};
use std::ptr;

use gnnsim::costmodel::{cost, CostInputs};
use gnnsim::graph::{erdos_renyi, random_features};
use gnnsim::network::{make_builtin, oracle_network, NetworkConfig};
use gnnsim::{NetworkKind, TraversalOrder};
use gnnsim_ffi::*;

fn last_error() -> String {
    let p = gnnsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { gnnsim_string_free(p) };
    s
}

struct Inputs {
    graph: *mut GnnsimGraph,
    features: *mut GnnsimFeatures,
    network: *mut GnnsimNetwork,
    hardware: *mut GnnsimHardware,
}

impl Inputs {
    fn new(nodes: usize, dim: usize, kind: GnnsimNetworkKind) -> Self {
        let mut s = Inputs {
            graph: ptr::null_mut(),
            features: ptr::null_mut(),
            network: ptr::null_mut(),
            hardware: ptr::null_mut(),
        };
        unsafe {
            assert_eq!(gnnsim_graph_random(nodes, 6.0, 3, &mut s.graph), GnnsimStatus::Ok);
            assert_eq!(gnnsim_features_random(nodes, dim, 4, &mut s.features), GnnsimStatus::Ok);
            assert_eq!(gnnsim_network_builtin(kind as i32, dim, 16, 8, 5, &mut s.network), GnnsimStatus::Ok);
            assert_eq!(gnnsim_hardware_default(&mut s.hardware), GnnsimStatus::Ok);
        }
        s
    }

    fn run(&self, df: &GnnsimDataflow, functional: bool) -> (GnnsimStatus, *mut GnnsimReport) {
        let mut r = ptr::null_mut();
        let st = unsafe { gnnsim_run(self.graph, self.features, self.network, self.hardware, df, functional, &mut r) };
        (st, r)
    }
}

impl Drop for Inputs {
    fn drop(&mut self) {
        unsafe {
            gnnsim_graph_free(self.graph);
            gnnsim_features_free(self.features);
            gnnsim_network_free(self.network);
            gnnsim_hardware_free(self.hardware);
        }
    }
}

#[test]
fn run_output_matches_reference() {
    let inp = Inputs::new(90, 32, GnnsimNetworkKind::Graphsage);
    let mut df = gnnsim_dataflow_default();
    df.blocked = true;
    df.block_size = 8;
    let (st, report) = inp.run(&df, true);
    assert_eq!(st, GnnsimStatus::Ok);
    let (mut rows, mut cols) = (0, 0);
    assert_eq!(unsafe { gnnsim_report_output_shape(report, &mut rows, &mut cols) }, GnnsimStatus::Ok);
    assert_eq!((rows, cols), (90, 8));
    let mut buf = vec![0f32; rows * cols];
    assert_eq!(unsafe { gnnsim_report_copy_output(report, buf.as_mut_ptr(), buf.len()) }, GnnsimStatus::Ok);

    let g = erdos_renyi(90, 6.0, 3).unwrap();
    let h = random_features(90, 32, 4);
    let net = make_builtin(NetworkKind::Graphsage, 32, 16, 8, 5).unwrap();
    let want = oracle_network(&g, &h, &net).unwrap();
    let err = buf.iter().zip(want.as_slice()).map(|(a, b)| (a - b).abs()).fold(0f32, f32::max);
    assert!(err <= 1e-5, "max abs error {err}");

    let mut stats = GnnsimStats::default();
    assert_eq!(unsafe { gnnsim_report_stats(report, &mut stats) }, GnnsimStatus::Ok);
    assert!(stats.total_cycles > 0 && stats.graph_busy > 0 && stats.dense_busy > 0);
    assert!(stats.feature_bytes <= stats.dram_read_bytes + stats.dram_write_bytes);
    let summary = take_string(unsafe { gnnsim_report_summary(report) });
    assert!(summary.contains(&format!("total_cycles={}\n", stats.total_cycles)));
    assert!(summary.contains("block_size=8\n"));
    let hash = take_string(unsafe { gnnsim_report_output_hash(report) });
    assert_eq!(hash.len(), 64);
    assert!(summary.contains(&format!("output_sha256={hash}")));

    // timing-only runs report the same cycles and no output
    let (st, timing) = inp.run(&df, false);
    assert_eq!(st, GnnsimStatus::Ok);
    let mut t = GnnsimStats::default();
    unsafe { gnnsim_report_stats(timing, &mut t) };
    assert_eq!(t, stats);
    assert_eq!(take_string(unsafe { gnnsim_report_output_hash(timing) }), "none");
    assert_eq!(unsafe { gnnsim_report_copy_output(timing, buf.as_mut_ptr(), buf.len()) }, GnnsimStatus::Config);
    unsafe {
        gnnsim_report_free(report);
        gnnsim_report_free(timing);
    }
}

#[test]
fn handles_built_from_data_and_text() {
    let (src, dst) = ([0u32, 1, 2, 3], [1u32, 2, 3, 0]);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gnnsim_graph_from_edges(4, src.as_ptr(), dst.as_ptr(), 4, &mut g) }, GnnsimStatus::Ok);
    assert_eq!(unsafe { (gnnsim_graph_num_nodes(g), gnnsim_graph_num_edges(g)) }, (4, 4));
    let data: Vec<f32> = (0..8).map(|i| i as f32).collect();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { gnnsim_features_from_data(4, 2, data.as_ptr(), &mut f) }, GnnsimStatus::Ok);
    let toml = CString::new(NetworkConfig::builtin(NetworkKind::Graphsage, 2, 3, 2, 1).to_toml()).unwrap();
    let mut n = ptr::null_mut();
    let st = unsafe { gnnsim_network_from_toml(toml.as_ptr(), &mut n) };
    assert_eq!(st, GnnsimStatus::Ok, "{}", if st == GnnsimStatus::Ok { String::new() } else { last_error() });
    let mut hw = ptr::null_mut();
    let hw_toml = CString::new("[memory]\nbandwidth_bytes_per_cycle = 64\n").unwrap();
    assert_eq!(unsafe { gnnsim_hardware_from_toml(hw_toml.as_ptr(), &mut hw) }, GnnsimStatus::Ok);
    let df = gnnsim_dataflow_default();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { gnnsim_run(g, f, n, hw, &df, true, &mut r) }, GnnsimStatus::Ok);
    let mut slow = GnnsimStats::default();
    unsafe { gnnsim_report_stats(r, &mut slow) };
    unsafe { gnnsim_report_free(r) };
    assert_eq!(unsafe { gnnsim_hardware_scale(hw, GnnsimScaleKnob::Bandwidth as i32) }, GnnsimStatus::Ok);
    assert_eq!(unsafe { gnnsim_run(g, f, n, hw, &df, true, &mut r) }, GnnsimStatus::Ok);
    let mut fast = GnnsimStats::default();
    unsafe { gnnsim_report_stats(r, &mut fast) };
    assert!(fast.total_cycles <= slow.total_cycles);
    assert_eq!(fast.dram_read_bytes, slow.dram_read_bytes);
    unsafe {
        gnnsim_report_free(r);
        gnnsim_graph_free(g);
        gnnsim_features_free(f);
        gnnsim_network_free(n);
        gnnsim_hardware_free(hw);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let inp = Inputs::new(60, 16, GnnsimNetworkKind::Gcn);
    let mut df = gnnsim_dataflow_default();
    df.blocked = true;
    df.block_size = 17;
    let (st, r) = inp.run(&df, true);
    assert_eq!(st, GnnsimStatus::Config);
    assert!(r.is_null());
    assert!(!last_error().is_empty());

    let mut df = gnnsim_dataflow_default();
    df.nodes_per_block = 1 << 30;
    assert_eq!(inp.run(&df, true).0, GnnsimStatus::Capacity);
    df.nodes_per_block = 0;
    df.order = 42;
    assert_eq!(inp.run(&df, true).0, GnnsimStatus::InvalidArgument);
    assert!(last_error().contains("42"));

    let mut r = ptr::null_mut();
    let df = gnnsim_dataflow_default();
    let st = unsafe { gnnsim_run(ptr::null(), inp.features, inp.network, inp.hardware, &df, true, &mut r) };
    assert_eq!(st, GnnsimStatus::InvalidArgument);
    let mut n = ptr::null_mut();
    assert_eq!(unsafe { gnnsim_network_builtin(9, 16, 8, 4, 1, &mut n) }, GnnsimStatus::InvalidArgument);
    assert_eq!(unsafe { gnnsim_hardware_scale(inp.hardware, -1) }, GnnsimStatus::InvalidArgument);

    let missing = CString::new("/nonexistent/graph.txt").unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gnnsim_graph_load(missing.as_ptr(), 0, &mut g) }, GnnsimStatus::Io);
    let bad = CString::new("[[layers]]\nin_dim = \"x\"\n").unwrap();
    assert_eq!(unsafe { gnnsim_network_from_toml(bad.as_ptr(), &mut n) }, GnnsimStatus::Config);
    let (src, dst) = ([0u32], [7u32]);
    assert_eq!(unsafe { gnnsim_graph_from_edges(2, src.as_ptr(), dst.as_ptr(), 1, &mut g) }, GnnsimStatus::Config);
    assert!(g.is_null());
    assert_eq!(unsafe { gnnsim_report_summary(ptr::null()) }, ptr::null_mut());
    unsafe { gnnsim_report_free(ptr::null_mut()) };

    let v = unsafe { CStr::from_ptr(gnnsim_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn cost_matches_core_formulas() {
    for s in 1..=8u64 {
        for i in [1u64, 2, 4] {
            let inputs = CostInputs::new(s, i);
            for (code, order) in [
                (GnnsimOrder::SourceStationary, TraversalOrder::SourceStationary),
                (GnnsimOrder::DestinationStationary, TraversalOrder::DestinationStationary),
            ] {
                let (mut r, mut w) = (0, 0);
                assert_eq!(unsafe { gnnsim_cost(code as i32, s, i, &mut r, &mut w) }, GnnsimStatus::Ok);
                let c = cost(order, &inputs);
                assert_eq!((r, w), (c.reads, c.writes));
            }
            let (mut r, mut w) = (0, 0);
            unsafe { gnnsim_cost(GnnsimOrder::Auto as i32, s, i, &mut r, &mut w) };
            let best = cost(gnnsim::costmodel::best_order(&inputs), &inputs);
            assert_eq!((r, w), (best.reads, best.writes));
        }
    }
    let (mut r, mut w) = (0, 0);
    assert_eq!(unsafe { gnnsim_cost(0, 0, 1, &mut r, &mut w) }, GnnsimStatus::Config);
    assert_eq!(unsafe { gnnsim_cost(0, 2, 1, ptr::null_mut(), &mut w) }, GnnsimStatus::InvalidArgument);
}
