use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gnnsim::config::HardwareConfig;
use gnnsim::costmodel::{best_order, blocked_cost, blocked_traffic_bytes, cost, BlockedCostInputs, CostInputs};
use gnnsim::experiment::{sweep_csv, DatasetConfig, ExperimentSpec, NetworkChoice, RunConfig};
use gnnsim::graph::{erdos_renyi, prepare_edges, random_features, read_raw_pairs, write_features, write_graph, Graph, PrepOptions};
use gnnsim::report::{summary, write_run, RunLabel};
use gnnsim::shard::build_shard_grid;
use gnnsim::{DataflowConfig, DataflowMode, Error, NetworkKind, OrderChoice, Result, RunOptions, TraversalOrder};

#[derive(Parser)]
#[command(name = "gnnsim", version, about = "Cycle-level GNN accelerator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one network over one dataset.
    Run(RunArgs),
    /// Run a grid of dataflow and hardware variants.
    Sweep(SweepArgs),
    /// Print the closed-form shard traffic table as CSV.
    Costtable(CostArgs),
    /// Write a synthetic graph and feature file.
    Gen(GenArgs),
    /// Normalize a raw edge list into the loader's format.
    Prepare(PrepareArgs),
    /// Print per-shard edge counts for a block size.
    Shards(ShardArgs),
    /// Print a run config with every default filled in.
    Defaults,
}

/// Dataset and network overrides shared by `run` and `sweep`.
#[derive(Args, Default)]
struct WorkloadArgs {
    /// Edge list, one `src dst` pair per line.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Row-major little-endian f32 feature file.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    num_nodes: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long, value_parser = parse_kind)]
    network: Option<NetworkKind>,
    /// Network config file; replaces --network.
    #[arg(long)]
    network_file: Option<PathBuf>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    out_dim: Option<usize>,
    /// Seeds both the generated dataset and the network weights.
    #[arg(long)]
    seed: Option<u64>,
}

impl WorkloadArgs {
    fn apply(&self, dataset: &mut DatasetConfig, network: &mut NetworkChoice) {
        if let Some(g) = &self.graph {
            dataset.graph = Some(g.clone());
        }
        if let Some(f) = &self.features {
            dataset.features = Some(f.clone());
        }
        if self.num_nodes.is_some() {
            dataset.num_nodes = self.num_nodes;
        }
        if let Some(d) = self.dim {
            dataset.dim = d;
        }
        if let Some(d) = self.avg_degree {
            dataset.avg_degree = d;
        }
        if let Some(k) = self.network {
            network.kind = k;
            network.file = None;
        }
        if let Some(f) = &self.network_file {
            network.file = Some(f.clone());
        }
        if let Some(h) = self.hidden {
            network.hidden_dim = h;
        }
        if let Some(o) = self.out_dim {
            network.out_dim = o;
        }
        if let Some(s) = self.seed {
            dataset.seed = s;
            network.seed = s;
        }
    }
}

#[derive(Args, Default)]
struct DataflowArgs {
    #[arg(long, value_parser = parse_mode)]
    dataflow: Option<DataflowMode>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, value_parser = parse_order)]
    order: Option<OrderChoice>,
    #[arg(long)]
    nodes_per_block: Option<usize>,
    #[arg(long)]
    input_sets: Option<u64>,
}

impl DataflowArgs {
    fn apply(&self, df: &mut DataflowConfig) {
        if let Some(m) = self.dataflow {
            df.mode = m;
        }
        if self.block_size.is_some() {
            df.block_size = self.block_size;
            if self.dataflow.is_none() {
                df.mode = DataflowMode::Blocked;
            }
        }
        if let Some(o) = self.order {
            df.order = o;
        }
        if self.nodes_per_block.is_some() {
            df.nodes_per_block = self.nodes_per_block;
        }
        if let Some(i) = self.input_sets {
            df.input_sets = i;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Run config (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[command(flatten)]
    dataflow: DataflowArgs,
    /// Directory for summary.txt, shards.csv and dense_jobs.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip feature values; timing and traffic are unchanged.
    #[arg(long)]
    timing_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Block sizes over the baseline machine.
    Ablation,
    /// Baseline and each resource doubled.
    Scaling,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment file (TOML).
    spec: Option<PathBuf>,
    /// Built-in experiment instead of a file.
    #[arg(long, value_enum, conflicts_with = "spec")]
    preset: Option<Preset>,
    /// Hardware config for presets.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[command(flatten)]
    dataflow: DataflowArgs,
    /// Block sizes for the ablation preset.
    #[arg(long, value_delimiter = ',', default_values_t = [16, 32, 64, 128])]
    blocks: Vec<usize>,
    /// Directory for sweep.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing_only: bool,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
    shards: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4])]
    input_sets: Vec<u64>,
    /// Block sizes; adds a capacity-derived blocked table.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
    #[arg(long, default_value_t = 2708)]
    num_nodes: usize,
    #[arg(long, default_value_t = 1433)]
    dim: usize,
    /// Whole feature scratchpad; half of it is one bank.
    #[arg(long, default_value_t = 16 << 20)]
    feature_scratch: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    num_nodes: usize,
    #[arg(long, default_value_t = 8.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for graph.txt and features.bin.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PrepareArgs {
    input: PathBuf,
    output: PathBuf,
    /// Add the reverse of every pair.
    #[arg(long)]
    symmetrize: bool,
    #[arg(long)]
    keep_self_loops: bool,
}

#[derive(Args)]
struct ShardArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    num_nodes: Option<usize>,
    #[arg(long)]
    nodes_per_block: usize,
}

fn parse_kind(s: &str) -> Result<NetworkKind> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<DataflowMode> {
    s.parse()
}

fn parse_order(s: &str) -> Result<OrderChoice> {
    s.parse()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn opts(timing_only: bool) -> RunOptions {
    RunOptions { functional: !timing_only }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    args.workload.apply(&mut cfg.dataset, &mut cfg.network);
    args.dataflow.apply(&mut cfg.dataflow);
    let (w, report) = cfg.run(opts(args.timing_only))?;
    let label = RunLabel {
        network: w.network_name.clone(),
        num_nodes: w.graph.num_nodes(),
        num_edges: w.graph.num_edges(),
        feature_dim: w.features.dim(),
        dataflow: cfg.dataflow,
    };
    if let Some(dir) = &args.out {
        write_run(dir, &label, &report)?;
    }
    print!("{}", summary(&label, &report));
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), _) => ExperimentSpec::from_file(path)?,
        (None, Some(preset)) => {
            let hardware = match &args.config {
                Some(path) => RunConfig::from_file(path)?.hardware,
                None => HardwareConfig::default(),
            };
            let (mut dataset, mut network) = (DatasetConfig::default(), NetworkChoice::default());
            args.workload.apply(&mut dataset, &mut network);
            let mut df = DataflowConfig::default();
            args.dataflow.apply(&mut df);
            match preset {
                Preset::Ablation => ExperimentSpec::ablation(dataset, network, hardware, &args.blocks),
                Preset::Scaling => ExperimentSpec::scaling(dataset, network, hardware, df),
            }
        }
        (None, None) => return Err(Error::Config("sweep needs an experiment file or --preset".into())),
    };
    if args.spec.is_some() {
        args.workload.apply(&mut spec.dataset, &mut spec.network);
    }
    let rows = spec.run(opts(args.timing_only))?;
    let csv = sweep_csv(&rows);
    if let Some(dir) = args.out.as_ref().or(spec.out.as_ref()) {
        create_dir(dir)?;
        write_file(&dir.join("sweep.csv"), &csv)?;
    }
    print!("{csv}");
    Ok(())
}

fn cmd_costtable(args: CostArgs) -> Result<String> {
    let mut out = String::from("shards,input_sets,order,reads,writes,best\n");
    for &s in &args.shards {
        for &i in &args.input_sets {
            let inputs = CostInputs::new(s, i);
            inputs.validate()?;
            let best = best_order(&inputs);
            for order in [TraversalOrder::SourceStationary, TraversalOrder::DestinationStationary] {
                let c = cost(order, &inputs);
                let _ = writeln!(out, "{s},{i},{order},{},{},{}", c.reads, c.writes, u8::from(order == best));
            }
        }
    }
    if !args.blocks.is_empty() {
        out.push_str("\nblock,input_sets,nodes_per_block,shards,order,reads,writes,read_bytes,write_bytes\n");
        for &i in &args.input_sets {
            let inputs = BlockedCostInputs::new(args.num_nodes, args.feature_scratch / 2, i);
            for &b in &args.blocks {
                let (n, s) = inputs.grid_for(b)?;
                for order in [TraversalOrder::SourceStationary, TraversalOrder::DestinationStationary] {
                    let c = blocked_cost(order, &inputs, args.dim, b)?;
                    let (rb, wb) = blocked_traffic_bytes(order, &inputs, args.dim, b)?;
                    let _ = writeln!(out, "{b},{i},{n},{s},{order},{},{},{rb},{wb}", c.reads, c.writes);
                }
            }
        }
    }
    Ok(out)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let graph = erdos_renyi(args.num_nodes, args.avg_degree, args.seed)?;
    let features = random_features(args.num_nodes, args.dim, args.seed.wrapping_add(1));
    create_dir(&args.out)?;
    write_graph(args.out.join("graph.txt"), &graph)?;
    write_features(args.out.join("features.bin"), &features)?;
    println!("nodes={}", graph.num_nodes());
    println!("edges={}", graph.num_edges());
    println!("dim={}", args.dim);
    Ok(())
}

fn cmd_prepare(args: PrepareArgs) -> Result<()> {
    let (pairs, num_nodes) = read_raw_pairs(&args.input)?;
    let opts = PrepOptions {
        symmetrize: args.symmetrize,
        keep_self_loops: args.keep_self_loops,
    };
    let graph = Graph::new(num_nodes, prepare_edges(&pairs, opts))?;
    write_graph(&args.output, &graph)?;
    println!("nodes={num_nodes}");
    println!("edges={}", graph.num_edges());
    Ok(())
}

fn cmd_shards(args: ShardArgs) -> Result<String> {
    let dataset = DatasetConfig {
        graph: Some(args.graph),
        num_nodes: args.num_nodes,
        ..DatasetConfig::default()
    };
    let (graph, _) = dataset.load()?;
    Ok(build_shard_grid(&graph, args.nodes_per_block)?.occupancy_dump())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Costtable(a) => cmd_costtable(a).map(|t| print!("{t}")),
        Command::Gen(a) => cmd_gen(a),
        Command::Prepare(a) => cmd_prepare(a),
        Command::Shards(a) => cmd_shards(a).map(|t| print!("{t}")),
        Command::Defaults => {
            print!("{}", RunConfig::default().to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gnnsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
