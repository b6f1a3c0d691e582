use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use igs_core::diffusion::{
    exact_sigma, read_sample, sample_rr_collection, simulate_sigma, write_sample, RrSample, SamplingOptions,
    DEFAULT_MAX_MEMBERS,
};
use igs_core::estimator::{evaluate_hat_phi, required_sample_size, EstimatorConfig, EstimatorMode, DEFAULT_C};
use igs_core::graph::{load_edge_list, InfluenceGraph, Model, NodeId};
use igs_core::hitting::{greedy_h, max_shapley_group, select_from_sample, HittingInstance};
use igs_core::reduction::{build_reduction, check_materializable, verify_instance, write_edge_list, UndirectedGraph, DEFAULT_MAX_ARCS};
use igs_core::shapley::ShapleyOracle;
use igs_core::{Error, Result};

#[derive(Parser)]
#[command(name = "igs", version, about = "Influence-based Group Shapley centrality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the centrality of one node set from RR sets.
    Estimate(EstimateArgs),
    /// Pick k seeds by greedy selection on RR sets.
    Select(SelectArgs),
    /// Exact values on small graphs by enumeration.
    Oracle(OracleArgs),
    /// Monte Carlo (or exact) spread of a seed set.
    Simulate(SimulateArgs),
    /// Build a reduction instance from an undirected graph.
    Reduce(ReduceArgs),
    /// Time the sampling, evaluation and greedy stages.
    Bench(BenchArgs),
}

#[derive(Args, Serialize)]
struct GraphArgs {
    /// Edge list: `<src> <dst> <value>` per line.
    graph: PathBuf,
    #[arg(long, default_value = "ic")]
    model: Model,
}

#[derive(Args, Serialize)]
struct SamplingArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampling worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Cap on the summed size of sampled RR sets.
    #[arg(long, default_value_t = DEFAULT_MAX_MEMBERS)]
    max_members: u64,
    /// Reuse RR sets dumped by `--save-sample`.
    #[arg(long)]
    sample_file: Option<PathBuf>,
    /// Dump the sampled RR sets.
    #[arg(long)]
    save_sample: Option<PathBuf>,
}

impl SamplingArgs {
    fn options(&self) -> SamplingOptions {
        SamplingOptions { workers: self.threads, max_members: self.max_members, max_sets: self.max_members }
    }
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated node labels.
    #[arg(long)]
    set: String,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_C, allow_negative_numbers = true)]
    c: f64,
    #[arg(long, default_value = "single")]
    mode: EstimatorMode,
    /// Budget for the uniform and selection sample sizes (defaults to the set size).
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args, Serialize)]
struct SelectArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_C, allow_negative_numbers = true)]
    c: f64,
    /// Write the greedy trace as JSON.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OracleMethod {
    Subsets,
    Permutations,
    Both,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Set to evaluate; without it every single node is listed.
    #[arg(long)]
    set: Option<String>,
    /// Report the best set of this size instead.
    #[arg(long, conflicts_with = "set")]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "subsets")]
    method: OracleMethod,
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    set: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate outcomes instead of simulating.
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Serialize)]
struct ReduceArgs {
    /// Undirected edge list: `<a> <b>` per line.
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    /// Write the instance as an IC edge list here; the layout goes to `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    verify: bool,
    /// Random sets used by `--verify`.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ARCS)]
    max_arcs: u64,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// RR sets to sample.
    #[arg(long, default_value_t = 100_000)]
    t: u64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    csv: bool,
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    parameters: Value,
    seed: Option<u64>,
    wall_time_ms: f64,
    result: Value,
    versions: Value,
}

enum Output {
    Json(Value),
    Csv(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let (name, parameters, seed, outcome) = match &cli.command {
        Command::Estimate(a) => ("estimate", to_value(a), Some(a.sampling.seed), cmd_estimate(a)),
        Command::Select(a) => ("select", to_value(a), Some(a.sampling.seed), cmd_select(a)),
        Command::Oracle(a) => ("oracle", to_value(a), None, cmd_oracle(a)),
        Command::Simulate(a) => ("simulate", to_value(a), Some(a.seed), cmd_simulate(a)),
        Command::Reduce(a) => ("reduce", to_value(a), Some(a.seed), cmd_reduce(a)),
        Command::Bench(a) => ("bench", to_value(a), Some(a.seed), cmd_bench(a)),
    };
    match outcome {
        Ok(Output::Json(result)) => {
            let report = RunReport {
                command: name,
                parameters,
                seed,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                result,
                versions: json!({ "igs": env!("CARGO_PKG_VERSION") }),
            };
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Ok(Output::Csv(text)) => {
            let _ = write!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource_error() { 2 } else { 1 })
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("arguments serialize")
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Input { line: None, message: format!("cannot read {}: {e}", path.display()) })
}

fn load_graph(args: &GraphArgs) -> Result<InfluenceGraph> {
    load_edge_list(&read_text(&args.graph)?, args.model)
}

fn labels(graph: &InfluenceGraph, nodes: &[NodeId]) -> Vec<String> {
    nodes.iter().map(|&v| graph.label(v)).collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    w.flush()?;
    Ok(())
}

/// Loads `--sample-file` (checked against the graph) or samples `t` fresh sets.
fn obtain_sample(graph: &InfluenceGraph, t: impl FnOnce() -> Result<u64>, args: &SamplingArgs) -> Result<RrSample> {
    let sample = match &args.sample_file {
        Some(path) => {
            let sample = read_sample(BufReader::new(File::open(path)?))?;
            if sample.node_count() != graph.node_count() {
                return Err(Error::SampleFormat(format!(
                    "sample covers {} nodes, graph has {}",
                    sample.node_count(),
                    graph.node_count()
                )));
            }
            sample
        }
        None => sample_rr_collection(graph, t()?, args.seed, &args.options())?,
    };
    if let Some(path) = &args.save_sample {
        let mut w = BufWriter::new(File::create(path)?);
        write_sample(&sample, &mut w)?;
        w.flush()?;
    }
    Ok(sample)
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Output> {
    let graph = load_graph(&a.graph)?;
    let set = graph.parse_node_set(&a.set)?;
    if set.is_empty() {
        return Err(Error::Precondition("set must be nonempty".into()));
    }
    let config = EstimatorConfig { epsilon: a.epsilon, c: a.c, k: a.k.unwrap_or(set.len()), mode: a.mode };
    config.validate(graph.node_count())?;
    let sample = obtain_sample(&graph, || required_sample_size(graph.node_count(), &config), &a.sampling)?;
    let estimate = evaluate_hat_phi(&sample, &set);
    Ok(Output::Json(json!({
        "set": labels(&graph, &set),
        "estimate": estimate,
        "t": sample.len(),
        "mode": a.mode,
        "seed": a.sampling.seed,
    })))
}

fn cmd_select(a: &SelectArgs) -> Result<Output> {
    let graph = load_graph(&a.graph)?;
    let selection = if a.sampling.sample_file.is_none() && a.sampling.save_sample.is_none() {
        max_shapley_group(&graph, a.k, a.epsilon, a.c, a.sampling.seed, &a.sampling.options())?
    } else {
        let config = EstimatorConfig { epsilon: a.epsilon, c: a.c, k: a.k, mode: EstimatorMode::Selection };
        config.validate(graph.node_count())?;
        let sample = obtain_sample(&graph, || required_sample_size(graph.node_count(), &config), &a.sampling)?;
        let mut s = select_from_sample(&sample, a.k)?;
        s.guarantee = Some((1.0 - (-1.0f64).exp()) / a.k as f64 - a.epsilon);
        s
    };
    if let Some(path) = &a.trace_out {
        write_json(path, &selection.trace)?;
    }
    Ok(Output::Json(json!({
        "seeds": labels(&graph, &selection.seeds),
        "hat_phi": selection.hat_phi,
        "t": selection.t,
        "guarantee": selection.guarantee,
        "padding": labels(&graph, &selection.padding),
    })))
}

#[derive(Serialize)]
struct OracleRow {
    set: Vec<String>,
    subsets: Option<f64>,
    permutations: Option<f64>,
    delta: Option<f64>,
}

fn cmd_oracle(a: &OracleArgs) -> Result<Output> {
    let graph = load_graph(&a.graph)?;
    let mut oracle = ShapleyOracle::new(&graph)?;
    let sets: Vec<Vec<NodeId>> = match (&a.set, a.k) {
        (Some(spec), _) => vec![graph.parse_node_set(spec)?],
        (None, Some(k)) => vec![oracle.best_group(k)?.set],
        (None, None) => (0..graph.node_count() as NodeId).map(|v| vec![v]).collect(),
    };
    let mut rows = Vec::with_capacity(sets.len());
    for set in sets {
        let subsets = match a.method {
            OracleMethod::Subsets | OracleMethod::Both => Some(oracle.group_shapley_subsets(&set)?),
            OracleMethod::Permutations => None,
        };
        let permutations = match a.method {
            OracleMethod::Permutations | OracleMethod::Both => Some(oracle.group_shapley_permutations(&set)?),
            OracleMethod::Subsets => None,
        };
        let delta = subsets.zip(permutations).map(|(x, y)| (x - y).abs());
        rows.push(OracleRow { set: labels(&graph, &set), subsets, permutations, delta });
    }
    if a.csv {
        let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("set,subsets,permutations,delta\n");
        for r in &rows {
            out.push_str(&format!("{},{},{},{}\n", r.set.join(" "), fmt(r.subsets), fmt(r.permutations), fmt(r.delta)));
        }
        return Ok(Output::Csv(out));
    }
    Ok(Output::Json(match (a.set.is_some() || a.k.is_some(), rows.len()) {
        (true, 1) => to_value(&rows[0]),
        _ => to_value(&rows),
    }))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Output> {
    let graph = load_graph(&a.graph)?;
    let set = graph.parse_node_set(&a.set)?;
    let (sigma, trials) = if a.exact {
        (exact_sigma(&graph, &set)?, None)
    } else {
        (simulate_sigma(&graph, &set, a.trials, a.seed)?, Some(a.trials))
    };
    Ok(Output::Json(json!({ "set": labels(&graph, &set), "sigma": sigma, "trials": trials, "exact": a.exact })))
}

fn cmd_reduce(a: &ReduceArgs) -> Result<Output> {
    let source = UndirectedGraph::parse(&read_text(&a.graph)?)?;
    let instance = build_reduction(&source, a.k)?;
    let metadata = instance.metadata();
    if let Some(out) = &a.out {
        check_materializable(&instance, a.max_arcs)?;
        write_edge_list(&instance, a.max_arcs, BufWriter::new(File::create(out)?))?;
        let mut sidecar = out.clone().into_os_string();
        sidecar.push(".json");
        write_json(Path::new(&sidecar), &metadata)?;
    }
    let verify = if a.verify {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        Some(verify_instance(&instance, a.trials, a.max_arcs, &mut rng)?)
    } else {
        None
    };
    Ok(Output::Json(json!({ "instance": metadata, "verify": verify })))
}

#[derive(Serialize)]
struct BenchRow {
    stage: &'static str,
    run: usize,
    t: u64,
    millis: f64,
}

fn cmd_bench(a: &BenchArgs) -> Result<Output> {
    let graph = load_graph(&a.graph)?;
    let opts = SamplingOptions::with_workers(a.threads);
    let mut rows = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Result<()>| -> Result<f64> {
        let start = Instant::now();
        f()?;
        Ok(start.elapsed().as_secs_f64() * 1e3)
    };
    for run in 0..a.repeat {
        let mut sample = None;
        let ms = timed(&mut || {
            sample = Some(sample_rr_collection(&graph, a.t, a.seed, &opts)?);
            Ok(())
        })?;
        rows.push(BenchRow { stage: "sample", run, t: a.t, millis: ms });
        let sample = sample.expect("sampled");
        let all: Vec<NodeId> = (0..graph.node_count() as NodeId).collect();
        let ms = timed(&mut || {
            for v in &all {
                std::hint::black_box(evaluate_hat_phi(&sample, std::slice::from_ref(v)));
            }
            Ok(())
        })?;
        rows.push(BenchRow { stage: "hat_phi_singletons", run, t: a.t, millis: ms });
        let ms = timed(&mut || {
            let inst = HittingInstance::from_sample(&sample, a.k)?;
            std::hint::black_box(greedy_h(&inst));
            Ok(())
        })?;
        rows.push(BenchRow { stage: "greedy", run, t: a.t, millis: ms });
    }
    if a.csv {
        let mut out = String::from("stage,run,t,millis\n");
        for r in &rows {
            out.push_str(&format!("{},{},{},{:.3}\n", r.stage, r.run, r.t, r.millis));
        }
        return Ok(Output::Csv(out));
    }
    Ok(Output::Json(to_value(&rows)))
}
