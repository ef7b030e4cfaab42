use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod cmd;
mod io;

#[derive(Parser)]
#[command(name = "flowmap", version, about = "Bandwidth-constrained dataflow path mapping")]
struct Cli {
    /// Zero every wall-clock duration in the output.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run the centralized solver.
    Solve(SolveArgs),
    /// Run the distributed protocol in the event simulator.
    Simulate(SimulateArgs),
    /// Enumerate feasible mappings exhaustively (small instances only).
    Oracle(OracleArgs),
    /// Check a mapping against an instance.
    Verify(VerifyArgs),
    /// Run a seeded batch of solver arms and write a CSV table.
    Bench(BenchArgs),
}

/// `lo,hi` pair of inclusive bounds.
fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<[T; 2], String>
where
    T::Err: std::fmt::Display,
{
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<T>().map_err(|e| format!("`{x}`: {e}"));
    Ok([p(lo)?, p(hi)?])
}

fn parse_f64_pair(s: &str) -> Result<[f64; 2], String> {
    parse_pair(s)
}

fn parse_usize_pair(s: &str) -> Result<[usize; 2], String> {
    parse_pair(s)
}

#[derive(Args, Clone, Debug, Default)]
struct GenFlags {
    #[arg(long)]
    waxman_alpha: Option<f64>,
    #[arg(long)]
    waxman_beta: Option<f64>,
    /// Node capacity range `lo,hi`.
    #[arg(long, value_parser = parse_f64_pair)]
    capacity_range: Option<[f64; 2]>,
    #[arg(long, value_parser = parse_f64_pair)]
    bandwidth_range: Option<[f64; 2]>,
    #[arg(long, value_parser = parse_f64_pair)]
    latency_range: Option<[f64; 2]>,
    /// Requirement scale relative to the median supply.
    #[arg(long)]
    req_scale: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    gen: GenFlags,
    /// Also print the resolved generator parameters to stderr.
    #[arg(long)]
    emit_params: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Optimal,
    FirstFeasible,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PolicyArg {
    Keepall,
    Leastcost,
    Annealed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum NeighborsArg {
    All,
    Randomk,
}

#[derive(Args, Clone, Debug)]
struct PolicyFlags {
    #[arg(long, value_enum, default_value = "optimal")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "keepall")]
    policy: PolicyArg,
    /// Initial annealing temperature (default: mean link latency times p).
    #[arg(long)]
    t0: Option<f64>,
    /// Cooling factor per round (default 0.9).
    #[arg(long)]
    alpha: Option<f64>,
    /// Annealed slot capacity (default 4).
    #[arg(long)]
    max_slot: Option<usize>,
    #[arg(long, value_enum, default_value = "all")]
    neighbors: NeighborsArg,
    /// Neighbor subset size for `randomk` (default 2).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON; stdin when omitted or `-`.
    instance: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyFlags,
    /// Drop maps after relaxing them.
    #[arg(long)]
    low_memory: bool,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    max_maps: Option<u64>,
    /// Include every complete mapping held at the sink.
    #[arg(long)]
    all: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write the bare mapping here as well.
    #[arg(long)]
    mapping_out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    instance: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyFlags,
    /// Simulated-time cap (default: total link latency plus one).
    #[arg(long)]
    max_time: Option<f64>,
    #[arg(long)]
    max_messages: Option<u64>,
    /// Write every message as a JSON line.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    mapping_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    max_nodes: usize,
    /// Enumerate even above `--max-nodes`.
    #[arg(long)]
    force: bool,
    /// List every feasible mapping.
    #[arg(long)]
    all: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON (`graph` plus `path`, or `graph` plus `dag`).
    instance: PathBuf,
    /// Mapping JSON, bare or under a `mapping` key; stdin when omitted.
    mapping: Option<PathBuf>,
    /// The mapping is a list of node ids; edges are routed automatically.
    #[arg(long)]
    vertex_only: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: Option<u64>,
    /// JSON batch configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_usize_pair)]
    n_range: Option<[usize; 2]>,
    #[arg(long, value_parser = parse_usize_pair)]
    p_range: Option<[usize; 2]>,
    /// Comma-separated arms, e.g. `exact-keepall,exact-leastcost,oracle`.
    #[arg(long, value_delimiter = ',')]
    arms: Option<Vec<String>>,
    #[arg(long)]
    oracle_max_nodes: Option<usize>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_slot: Option<usize>,
    #[arg(long)]
    max_maps: Option<u64>,
    #[arg(long)]
    max_messages: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    gen: GenFlags,
    /// Write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLOWMAP_LOG", "warn")).init();
    let cli = Cli::parse();
    match cmd::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
