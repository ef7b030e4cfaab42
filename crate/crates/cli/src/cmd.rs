use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use flowmap::dist::TraceRecord;
use flowmap::experiment::{run_batch, summarize, write_csv, Arm, BatchConfig};
use flowmap::oracle::{brute_force_optimal, enumerate_feasible};
use flowmap::verify::{verify_dag_mapping, verify_vertex_mapping, DagMapping};
use flowmap::{
    mapping_cost, pathmap, random_instance, run_simulation, verify_path_mapping, AdmissionPolicy, CompleteMapping,
    DataflowDag, FeasibilityReport, GenParams, Instance, Mode, NeighborPolicy, NodeId, OracleLimits, ResourceGraph,
    RunStats, SimConfig, SolverConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::{emit, emit_json, load, parse, read_input};
use crate::{
    BenchArgs, Cli, Command, GenArgs, GenFlags, ModeArg, NeighborsArg, OracleArgs, PolicyArg, PolicyFlags,
    SimulateArgs, SolveArgs, VerifyArgs,
};

pub fn run(cli: Cli) -> Result<ExitCode> {
    let timing = !cli.no_timing;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a, timing),
        Command::Simulate(a) => simulate(a, timing),
        Command::Oracle(a) => oracle(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a, timing),
    }
}

fn status(feasible: bool) -> ExitCode {
    if feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

impl GenFlags {
    fn apply(&self, g: &mut GenParams) {
        if let Some(x) = self.waxman_alpha {
            g.waxman_alpha = x;
        }
        if let Some(x) = self.waxman_beta {
            g.waxman_beta = x;
        }
        if let Some(x) = self.capacity_range {
            g.capacity_range = x;
        }
        if let Some(x) = self.bandwidth_range {
            g.bandwidth_range = x;
        }
        if let Some(x) = self.latency_range {
            g.latency_range = x;
        }
        if let Some(x) = self.req_scale {
            g.req_scale = x;
        }
    }
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let mut params = GenParams {
        n: a.n,
        p: a.p,
        seed: a.seed,
        ..Default::default()
    };
    a.gen.apply(&mut params);
    let inst = random_instance(&params)?;
    if a.emit_params {
        eprintln!("{}", serde_json::to_string(&params)?);
    }
    log::info!(
        "generated {} nodes, {} links",
        inst.graph.node_count(),
        inst.graph.edge_count()
    );
    emit_json(a.out.as_ref(), &inst)?;
    Ok(ExitCode::SUCCESS)
}

impl PolicyFlags {
    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Optimal => Mode::Optimal,
            ModeArg::FirstFeasible => Mode::FirstFeasible,
        }
    }

    fn admission(&self, inst: &Instance) -> Result<AdmissionPolicy> {
        let annealing_flags = self.t0.is_some() || self.alpha.is_some() || self.max_slot.is_some();
        let policy = match self.policy {
            PolicyArg::Keepall => AdmissionPolicy::KeepAll,
            PolicyArg::Leastcost => AdmissionPolicy::LeastCost,
            PolicyArg::Annealed => {
                let AdmissionPolicy::Annealed { t0, alpha, max_slot } = AdmissionPolicy::annealed_default(inst) else {
                    unreachable!()
                };
                AdmissionPolicy::Annealed {
                    t0: self.t0.unwrap_or(t0),
                    alpha: self.alpha.unwrap_or(alpha),
                    max_slot: self.max_slot.unwrap_or(max_slot),
                }
            }
        };
        if annealing_flags && self.policy != PolicyArg::Annealed {
            bail!("--t0, --alpha and --max-slot require --policy annealed");
        }
        policy.validate()?;
        Ok(policy)
    }

    fn neighbors(&self) -> Result<NeighborPolicy> {
        match self.neighbors {
            NeighborsArg::All if self.k.is_some() => bail!("--k requires --neighbors randomk"),
            NeighborsArg::All => Ok(NeighborPolicy::All),
            NeighborsArg::Randomk => {
                let policy = NeighborPolicy::RandomK { k: self.k.unwrap_or(2) };
                policy.validate()?;
                Ok(policy)
            }
        }
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    feasible: bool,
    cost: Option<f64>,
    mapping: Option<&'a CompleteMapping>,
    mode: Mode,
    admission: &'a AdmissionPolicy,
    neighbors: &'a NeighborPolicy,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    all_at_sink: Option<&'a [CompleteMapping]>,
    stats: &'a RunStats,
}

fn write_mapping(out: Option<&std::path::PathBuf>, m: Option<&CompleteMapping>) -> Result<()> {
    match (out, m) {
        (Some(path), Some(m)) => emit_json(Some(path), m),
        _ => Ok(()),
    }
}

fn solve(a: SolveArgs, timing: bool) -> Result<ExitCode> {
    let inst: Instance = load(a.instance.as_deref(), "instance")?;
    let config = SolverConfig {
        mode: a.policy.mode(),
        admission: a.policy.admission(&inst)?,
        neighbors: a.policy.neighbors()?,
        retain_old: !a.low_memory,
        max_iterations: a.max_iterations,
        max_maps: a.max_maps,
        seed: a.policy.seed,
    };
    let mut r = pathmap(&inst, &config)?;
    if !timing {
        r.stats.wall_ms = 0.0;
    }
    log::info!(
        "solve: {} maps admitted over {} sweeps",
        r.stats.maps_admitted,
        r.stats.iterations_used
    );
    emit_json(
        a.out.as_ref(),
        &SolveOutput {
            feasible: r.best.is_some(),
            cost: r.best.as_ref().map(|m| m.cost),
            mapping: r.best.as_ref(),
            mode: config.mode,
            admission: &config.admission,
            neighbors: &config.neighbors,
            truncated: r.truncated,
            all_at_sink: a.all.then_some(r.all_at_sink.as_slice()),
            stats: &r.stats,
        },
    )?;
    write_mapping(a.mapping_out.as_ref(), r.best.as_ref())?;
    Ok(status(r.best.is_some()))
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    feasible: bool,
    cost: Option<f64>,
    mapping: Option<&'a CompleteMapping>,
    first_arrival_cost: Option<f64>,
    solutions: usize,
    mode: Mode,
    admission: &'a AdmissionPolicy,
    neighbors: &'a NeighborPolicy,
    truncated: bool,
    pending_at_stop: usize,
    stats: &'a RunStats,
    per_node: &'a [flowmap::dist::NodeSummary],
}

fn simulate(a: SimulateArgs, timing: bool) -> Result<ExitCode> {
    let inst: Instance = load(a.instance.as_deref(), "instance")?;
    let config = SimConfig {
        mode: a.policy.mode(),
        admission: a.policy.admission(&inst)?,
        neighbors: a.policy.neighbors()?,
        seed: a.policy.seed,
        max_simulated_time: a.max_time,
        max_messages: a.max_messages,
        record_trace: a.trace.is_some(),
    };
    let mut r = run_simulation(&inst, &config)?;
    if !timing {
        r.stats.wall_ms = 0.0;
    }
    if let Some(path) = &a.trace {
        let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut w = BufWriter::new(file);
        for msg in &r.trace {
            let record: TraceRecord = msg.to_record(&inst);
            serde_json::to_writer(&mut w, &record)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    log::info!(
        "simulate: {} messages, {} events",
        r.stats.messages_sent,
        r.stats.iterations_used
    );
    emit_json(
        a.out.as_ref(),
        &SimulateOutput {
            feasible: r.best.is_some(),
            cost: r.best.as_ref().map(|m| m.cost),
            mapping: r.best.as_ref(),
            first_arrival_cost: r.first_arrival_cost,
            solutions: r.solutions.len(),
            mode: config.mode,
            admission: &config.admission,
            neighbors: &config.neighbors,
            truncated: r.truncated,
            pending_at_stop: r.pending_at_stop,
            stats: &r.stats,
            per_node: &r.per_node,
        },
    )?;
    write_mapping(a.mapping_out.as_ref(), r.best.as_ref())?;
    Ok(status(r.best.is_some()))
}

#[derive(Serialize)]
struct OracleOutput {
    feasible: bool,
    cost: Option<f64>,
    mapping: Option<CompleteMapping>,
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mappings: Option<Vec<CompleteMapping>>,
}

fn oracle(a: OracleArgs) -> Result<ExitCode> {
    let inst: Instance = load(a.instance.as_deref(), "instance")?;
    let limits = OracleLimits {
        max_nodes: a.max_nodes,
        force: a.force,
    };
    let all = enumerate_feasible(&inst, &limits)?;
    let best = brute_force_optimal(&inst, &limits)?;
    emit_json(
        a.out.as_ref(),
        &OracleOutput {
            feasible: best.is_some(),
            cost: best.as_ref().map(|m| m.cost),
            mapping: best,
            count: all.len(),
            mappings: a.all.then_some(all),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct DagInstance {
    graph: ResourceGraph,
    dag: DataflowDag,
}

#[derive(Serialize)]
struct VerifyOutput {
    #[serde(flatten)]
    report: FeasibilityReport,
    cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mapping: Option<CompleteMapping>,
}

/// Accepts either a bare mapping or an object holding it under `mapping`,
/// such as `solve` output.
fn unwrap_mapping(text: &str) -> Result<Value> {
    let v: Value = parse(text, "mapping")?;
    Ok(match v {
        Value::Object(mut o) if o.contains_key("mapping") => o.remove("mapping").unwrap_or(Value::Null),
        other => other,
    })
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("malformed {what} at `{path}`: {}", e.into_inner())
    })
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let inst_text = read_input(Some(&a.instance))?;
    let mapping = unwrap_mapping(&read_input(a.mapping.as_deref())?)?;
    let is_dag = matches!(parse::<Value>(&inst_text, "instance")?, Value::Object(ref o) if o.contains_key("dag"));
    if is_dag {
        let inst: DagInstance = parse(&inst_text, "instance")?;
        let m: DagMapping = from_value(mapping, "mapping")?;
        let report = verify_dag_mapping(&inst.graph, &inst.dag, &m);
        emit_json(a.out.as_ref(), &report)?;
        return Ok(status(report.report.feasible));
    }
    let inst: Instance = parse(&inst_text, "instance")?;
    let out = if a.vertex_only {
        let vertex_map: Vec<NodeId> = match mapping {
            Value::Object(mut o) if o.contains_key("vertex_map") => {
                from_value(o.remove("vertex_map").unwrap_or(Value::Null), "vertex_map")?
            }
            other => from_value(other, "vertex_map")?,
        };
        let (report, routed) = verify_vertex_mapping(&inst.graph, &inst.path, &vertex_map);
        VerifyOutput {
            report,
            cost: routed.as_ref().map(|m| m.cost),
            mapping: routed,
        }
    } else {
        let m: CompleteMapping = from_value(mapping, "mapping")?;
        let report = verify_path_mapping(&inst.graph, &inst.path, &m);
        VerifyOutput {
            cost: mapping_cost(&inst.graph, &m).ok(),
            report,
            mapping: None,
        }
    };
    emit_json(a.out.as_ref(), &out)?;
    Ok(status(out.report.feasible))
}

fn bench(a: BenchArgs, timing: bool) -> Result<ExitCode> {
    let mut config: BatchConfig = match &a.config {
        Some(path) => load(Some(path), "batch config")?,
        None => BatchConfig::default(),
    };
    config.seed = a.seed;
    if let Some(x) = a.count {
        config.count = x;
    }
    if let Some(x) = a.n_range {
        config.n_range = x;
    }
    if let Some(x) = a.p_range {
        config.p_range = x;
    }
    if let Some(arms) = &a.arms {
        config.arms = arms.iter().map(|s| s.parse::<Arm>()).collect::<Result<_, _>>()?;
    }
    if let Some(x) = a.oracle_max_nodes {
        config.oracle_max_nodes = x;
    }
    config.anneal.t0 = a.t0.or(config.anneal.t0);
    config.anneal.alpha = a.alpha.or(config.anneal.alpha);
    config.anneal.max_slot = a.max_slot.or(config.anneal.max_slot);
    config.max_maps = a.max_maps.or(config.max_maps);
    config.max_messages = a.max_messages.or(config.max_messages);
    if let Some(x) = a.threads {
        config.threads = x;
    }
    a.gen.apply(&mut config.gen);
    config.timing &= timing;
    config.validate()?;

    let rows = run_batch(&config)?;
    log::info!("bench: {} rows", rows.len());
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    emit(a.out.as_ref(), std::str::from_utf8(&csv)?)?;
    if let Some(path) = &a.summary {
        emit_json(Some(path), &summarize(&rows, &config.arms))?;
    }
    Ok(ExitCode::SUCCESS)
}
