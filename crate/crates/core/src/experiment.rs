//! Run and sweep configuration files.
//!
//! A run config has four sections: `[dataset]`, `[network]`, `[dataflow]`
//! and `[hardware]` (itself split into `dense`, `graph` and `memory`). Every
//! key is optional. Relative paths resolve against the config file's
//! directory.
//!
//! ```toml
//! [dataset]
//! num_nodes = 2048
//! dim = 512
//!
//! [network]
//! kind = "graphsage"
//!
//! [dataflow]
//! mode = "blocked"
//! block_size = 64
//!
//! [hardware.memory]
//! bandwidth_bytes_per_cycle = 512
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{HardwareConfig, ScaleKnob};
use crate::error::{Error, Result};
use crate::graph::{erdos_renyi, load_features, load_graph, random_features, read_raw_pairs, Graph};
use crate::matrix::FeatureMatrix;
use crate::network::{NetworkConfig, NetworkKind, NetworkSpec, DEFAULT_HIDDEN_DIM};
use crate::report::output_hash;
use crate::sim::{run_with, DataflowConfig, RunOptions, SimReport};

/// Where node features and edges come from. Without a graph file an
/// Erdős–Rényi graph is generated; without a feature file, uniform random
/// features are.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    /// Node count; inferred from the largest id when a graph file is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_nodes: Option<usize>,
    pub dim: usize,
    /// Expected out-degree of generated graphs.
    pub avg_degree: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            graph: None,
            features: None,
            num_nodes: None,
            dim: 64,
            avg_degree: 8.0,
            seed: 1,
        }
    }
}

pub const DEFAULT_SYNTHETIC_NODES: usize = 100;

impl DatasetConfig {
    pub fn load(&self) -> Result<(Graph, FeatureMatrix)> {
        if self.dim == 0 {
            return Err(Error::Config("dataset.dim must be at least 1".into()));
        }
        let graph = match &self.graph {
            Some(path) => {
                let num_nodes = match self.num_nodes {
                    Some(n) => n,
                    None => read_raw_pairs(path)?.1,
                };
                load_graph(path, num_nodes)?
            }
            None => erdos_renyi(
                self.num_nodes.unwrap_or(DEFAULT_SYNTHETIC_NODES),
                self.avg_degree,
                self.seed,
            )?,
        };
        let features = match &self.features {
            Some(path) => load_features(path, graph.num_nodes(), self.dim)?,
            None => random_features(graph.num_nodes(), self.dim, self.seed.wrapping_add(1)),
        };
        Ok((graph, features))
    }
}

/// A built-in network or a network file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkChoice {
    pub kind: NetworkKind,
    pub hidden_dim: usize,
    pub out_dim: usize,
    pub seed: u64,
    /// Overrides the built-in when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for NetworkChoice {
    fn default() -> Self {
        Self {
            kind: NetworkKind::Gcn,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            out_dim: 8,
            seed: 1,
            file: None,
        }
    }
}

impl NetworkChoice {
    pub fn build(&self, in_dim: usize) -> Result<NetworkSpec> {
        let cfg = match &self.file {
            Some(path) => NetworkConfig::from_toml(&read_text(path)?)?,
            None => NetworkConfig::builtin(self.kind, in_dim, self.hidden_dim, self.out_dim, self.seed),
        };
        if cfg.in_dim != in_dim {
            return Err(Error::Config(format!(
                "network expects {}-wide features, dataset has {in_dim}",
                cfg.in_dim
            )));
        }
        cfg.build()
    }

    pub fn name(&self) -> String {
        match &self.file {
            Some(path) => path.display().to_string(),
            None => self.kind.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub network: NetworkChoice,
    pub dataflow: DataflowConfig,
    pub hardware: HardwareConfig,
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = parse_toml(text)?;
        cfg.hardware.validate()?;
        Ok(cfg)
    }

    /// Parses a file and rebases its relative paths onto the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        rebase(&mut cfg.dataset, &mut cfg.network, base);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Loads the dataset and builds the network.
    pub fn prepare(&self) -> Result<Workload> {
        Workload::load(&self.dataset, &self.network)
    }

    pub fn run(&self, opts: RunOptions) -> Result<(Workload, SimReport)> {
        let w = self.prepare()?;
        let report = w.run(&self.hardware, &self.dataflow, opts)?;
        Ok((w, report))
    }
}

fn rebase(dataset: &mut DatasetConfig, network: &mut NetworkChoice, base: &Path) {
    for p in [&mut dataset.graph, &mut dataset.features, &mut network.file].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

/// A loaded graph, its features and the network to run over them.
#[derive(Clone, Debug)]
pub struct Workload {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub network: NetworkSpec,
    pub network_name: String,
}

impl Workload {
    pub fn load(dataset: &DatasetConfig, network: &NetworkChoice) -> Result<Self> {
        let (graph, features) = dataset.load()?;
        let spec = network.build(features.dim())?;
        Ok(Self {
            graph,
            features,
            network: spec,
            network_name: network.name(),
        })
    }

    pub fn run(&self, hw: &HardwareConfig, df: &DataflowConfig, opts: RunOptions) -> Result<SimReport> {
        run_with(&self.graph, &self.features, &self.network, hw, df, opts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataflowVariant {
    pub name: String,
    #[serde(flatten)]
    pub config: DataflowConfig,
}

/// Base hardware with some resources doubled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareVariant {
    pub name: String,
    #[serde(default)]
    pub scale: Vec<ScaleKnob>,
}

impl HardwareVariant {
    pub fn baseline() -> Self {
        Self {
            name: "baseline".into(),
            scale: Vec::new(),
        }
    }

    pub fn apply(&self, base: &HardwareConfig) -> HardwareConfig {
        self.scale.iter().fold(*base, |hw, &k| hw.scaled(k))
    }
}

/// A cross product of dataflow and hardware variants over one workload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub network: NetworkChoice,
    #[serde(default)]
    pub hardware: HardwareConfig,
    pub dataflows: Vec<DataflowVariant>,
    pub variants: Vec<HardwareVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Overrides both dataset and network seeds when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = parse_toml(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut spec = Self::from_toml(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        rebase(&mut spec.dataset, &mut spec.network, base);
        if let Some(out) = &mut spec.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataflows.is_empty() {
            return Err(Error::Config("experiment has no dataflow variants".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("experiment has no hardware variants".into()));
        }
        self.hardware.validate()
    }

    /// Block sizes over one baseline machine, ending with the full width.
    /// Blocks at or above the dataset width run as `conventional`.
    pub fn ablation(dataset: DatasetConfig, network: NetworkChoice, hardware: HardwareConfig, blocks: &[usize]) -> Self {
        let dim = dataset.dim;
        let mut blocks: Vec<usize> = blocks.iter().map(|&b| b.min(dim)).collect();
        blocks.sort_unstable();
        blocks.dedup();
        if blocks.last() != Some(&dim) {
            blocks.push(dim);
        }
        let dataflows = blocks
            .iter()
            .map(|&b| {
                if b >= dim {
                    DataflowVariant {
                        name: "conventional".into(),
                        config: DataflowConfig::conventional(),
                    }
                } else {
                    DataflowVariant {
                        name: format!("b{b}"),
                        config: DataflowConfig::blocked(b),
                    }
                }
            })
            .collect();
        Self {
            dataset,
            network,
            hardware,
            dataflows,
            variants: vec![HardwareVariant::baseline()],
            out: None,
            seed: None,
        }
    }

    /// Baseline plus each resource doubled alone.
    pub fn scaling(dataset: DatasetConfig, network: NetworkChoice, hardware: HardwareConfig, dataflow: DataflowConfig) -> Self {
        let mut variants = vec![HardwareVariant::baseline()];
        variants.extend(ScaleKnob::ALL.iter().map(|&k| HardwareVariant {
            name: format!("2x_{k}"),
            scale: vec![k],
        }));
        Self {
            dataset,
            network,
            hardware,
            dataflows: vec![DataflowVariant {
                name: "base".into(),
                config: dataflow,
            }],
            variants,
            out: None,
            seed: None,
        }
    }

    pub fn run_config(&self, dataflow: usize, variant: usize) -> RunConfig {
        let mut cfg = RunConfig {
            dataset: self.dataset.clone(),
            network: self.network.clone(),
            dataflow: self.dataflows[dataflow].config,
            hardware: self.variants[variant].apply(&self.hardware),
        };
        if let Some(seed) = self.seed {
            cfg.dataset.seed = seed;
            cfg.network.seed = seed;
        }
        cfg
    }

    /// Runs every (dataflow, hardware) pair in parallel. Rows come back in
    /// spec order regardless of completion order.
    pub fn run(&self, opts: RunOptions) -> Result<Vec<SweepRow>> {
        self.validate()?;
        let base = self.run_config(0, 0);
        let workload = base.prepare()?;
        let cells: Vec<(usize, usize)> = (0..self.dataflows.len())
            .flat_map(|d| (0..self.variants.len()).map(move |v| (d, v)))
            .collect();
        let reports: Vec<SimReport> = cells
            .par_iter()
            .map(|&(d, v)| {
                let cfg = self.run_config(d, v);
                workload.run(&cfg.hardware, &cfg.dataflow, opts)
            })
            .collect::<Result<_>>()?;
        let nv = self.variants.len();
        let baseline = self.variants.iter().position(|v| v.scale.is_empty()).unwrap_or(0);
        Ok(cells
            .iter()
            .zip(&reports)
            .map(|(&(d, v), r)| {
                let base_cycles = reports[d * nv + baseline].total_cycles;
                SweepRow::new(&self.dataflows[d].name, &self.variants[v].name, r, base_cycles)
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub dataflow: String,
    pub variant: String,
    pub cycles: u64,
    /// Baseline-variant cycles over this row's, for the same dataflow.
    pub speedup: f64,
    pub read_bytes: u64,
    pub write_bytes: u64,
    pub feature_bytes: u64,
    pub graph_stalls: u64,
    pub dense_stalls: u64,
    pub output_hash: String,
}

impl SweepRow {
    pub fn new(dataflow: &str, variant: &str, r: &SimReport, baseline_cycles: u64) -> Self {
        Self {
            dataflow: dataflow.to_string(),
            variant: variant.to_string(),
            cycles: r.total_cycles,
            speedup: baseline_cycles as f64 / r.total_cycles.max(1) as f64,
            read_bytes: r.dram.read_bytes,
            write_bytes: r.dram.write_bytes,
            feature_bytes: r.feature_bytes(),
            graph_stalls: r.graph_engine.stalls(),
            dense_stalls: r.dense_engine.stalls(),
            output_hash: output_hash(r.output.as_ref()),
        }
    }

    pub const CSV_HEADER: &'static str =
        "dataflow,variant,cycles,speedup,read_bytes,write_bytes,feature_bytes,graph_stalls,dense_stalls,output_hash";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.4},{},{},{},{},{},{}",
            self.dataflow,
            self.variant,
            self.cycles,
            self.speedup,
            self.read_bytes,
            self.write_bytes,
            self.feature_bytes,
            self.graph_stalls,
            self.dense_stalls,
            self.output_hash
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SweepRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}
