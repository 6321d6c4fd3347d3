use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hopenum::baseline::{build_relations, count_walks, eliminate_and_collect, generic_dfs_enumerate, naive_enumerate};
use hopenum::enumerate::{dfs_enumerate, dfs_enumerate_relaxed, join_enumerate};
use hopenum::graph::{write_snapshot, Graph};
use hopenum::index::LightweightIndex;
use hopenum::optimizer::{calibrate_tau, full_estimate, select_plan, CalibrationConfig, DEFAULT_TAU};
use hopenum::{CollectSink, CountSink, PathSink, Query, WriterSink};
use serde_json::json;

use crate::constraint_file;
use crate::input::load_graph;
use crate::metrics::{run_query, RunOptions, StrategyChoice};
use crate::report::{run_bench, run_dynamic, summarize, write_bench_csv};
use crate::workload::{format_workload, generate, parse_workload, DegreeKind, Setting, WorkloadSpec};

/// Exit status of a query that hit its time limit.
pub const EXIT_TIMEOUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "hopenum", version, about = "Hop-constrained s-t simple path enumeration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the paths of one query.
    Query(QueryArgs),
    /// Run a workload and write a CSV report with a JSON sidecar.
    Bench(BenchArgs),
    /// Insert withheld edges one by one and time the cycle query after each.
    Dynamic(DynamicArgs),
    /// Sample a query workload.
    GenWorkload(GenWorkloadArgs),
    /// Cross-check every enumerator and counter on one query.
    Verify(VerifyArgs),
    /// Pick the planning threshold from sampled queries.
    Calibrate(CalibrateArgs),
    /// Convert a graph to the binary snapshot format.
    Snapshot(SnapshotArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list (`src dst` per line) or binary snapshot.
    pub graph: PathBuf,
    /// Treat each edge-list line as two directed edges.
    #[arg(long)]
    pub undirected: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        let g = load_graph(&self.graph, self.undirected)?;
        log::info!("loaded {} vertices, {} edges", g.vertex_count(), g.edge_count());
        Ok(g)
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Always use the index DFS.
    #[arg(long, conflicts_with_all = ["force_join", "baseline_dfs", "oracle"])]
    pub force_dfs: bool,
    /// Always use the join plan with this cut position.
    #[arg(long, value_name = "CUT", conflicts_with_all = ["baseline_dfs", "oracle"])]
    pub force_join: Option<u32>,
    /// Distance-pruned DFS on the plain graph, without the index.
    #[arg(long, conflicts_with = "oracle")]
    pub baseline_dfs: bool,
    /// Exhaustive search without pruning.
    #[arg(long)]
    pub oracle: bool,
    /// Threshold on the preliminary estimate above which plans are costed.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Per-query time limit in milliseconds.
    #[arg(long, env = "HOPENUM_TIME_LIMIT_MS", default_value_t = 120_000)]
    pub time_limit_ms: u64,
    /// Abort join plans that materialize more tuples than this.
    #[arg(long)]
    pub max_tuples: Option<usize>,
    /// JSON constraint file; constrained queries always run the DFS.
    #[arg(long, value_name = "FILE")]
    pub constraints: Option<PathBuf>,
}

impl PlanArgs {
    fn options(&self, g: &Graph) -> Result<RunOptions> {
        let choice = if self.force_dfs {
            StrategyChoice::ForceDfs
        } else if let Some(cut) = self.force_join {
            StrategyChoice::ForceJoin(cut)
        } else if self.baseline_dfs {
            StrategyChoice::BaselineDfs
        } else if self.oracle {
            StrategyChoice::Oracle
        } else {
            StrategyChoice::Auto
        };
        let constraints = match &self.constraints {
            Some(path) => {
                if matches!(choice, StrategyChoice::ForceJoin(_)) {
                    bail!("constraints cannot be combined with a join plan");
                }
                Some(constraint_file::load(path, g)?)
            }
            None => None,
        };
        Ok(RunOptions {
            choice,
            tau: self.tau,
            time_limit: Duration::from_millis(self.time_limit_ms),
            max_tuples: self.max_tuples,
            constraints,
        })
    }
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    pub source: u64,
    pub target: u64,
    /// Hop limit, at least 2.
    pub k: u32,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Print every path as it is found (space-separated vertex ids).
    #[arg(long, conflicts_with = "first")]
    pub stream: bool,
    /// Print the first N paths and stop.
    #[arg(long, value_name = "N")]
    pub first: Option<usize>,
    /// Print the optimizer's decision trace to stderr as JSON.
    #[arg(long)]
    pub explain: bool,
    /// Print query metrics to stderr as JSON.
    #[arg(long)]
    pub metrics: bool,
}

#[derive(Debug, Args)]
pub struct WorkloadArgs {
    /// Read queries from a file written by `gen-workload` instead of sampling.
    #[arg(long, value_name = "FILE")]
    pub workload: Option<PathBuf>,
    /// Degree classes of source and target: v1 is the high-degree part, v2 the rest.
    #[arg(long, value_enum, default_value_t = Setting::V1V1)]
    pub setting: Setting,
    /// Number of queries to sample.
    #[arg(long, default_value_t = 1000)]
    pub queries: usize,
    /// Hop limit of every sampled query.
    #[arg(long, default_value_t = 6)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest hop distance from source to target.
    #[arg(long, default_value_t = 3)]
    pub max_distance: u32,
    /// Share of vertices, by descending degree, in the high-degree part.
    #[arg(long, default_value_t = 0.1)]
    pub top_fraction: f64,
    /// Degree used to rank vertices.
    #[arg(long, value_enum, default_value_t = DegreeKind::Out)]
    pub degree: DegreeKind,
}

impl WorkloadArgs {
    fn spec(&self) -> WorkloadSpec {
        WorkloadSpec {
            setting: self.setting,
            query_count: self.queries,
            hop_limit: self.k,
            seed: self.seed,
            max_distance: self.max_distance,
            top_fraction: self.top_fraction,
            degree: self.degree,
        }
    }

    fn queries(&self, g: &Graph) -> Result<Vec<Query>> {
        match &self.workload {
            Some(path) => {
                let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
                parse_workload(g, BufReader::new(file))
            }
            None => generate(g, &self.spec()),
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Report path prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Queries run concurrently.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Write `-` for every timing so that reports are reproducible byte for byte.
    #[arg(long)]
    pub omit_timings: bool,
}

#[derive(Debug, Args)]
pub struct DynamicArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Share of edges withheld and re-inserted.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    /// Cycle length bound; each insertion runs a query with hop limit k - 1.
    #[arg(long, default_value_t = 6)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long)]
    pub omit_timings: bool,
}

#[derive(Debug, Args)]
pub struct GenWorkloadArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    pub source: u64,
    pub target: u64,
    pub k: u32,
    /// Give up if the exhaustive search finds more paths than this.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub k: u32,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Query(a) => query(a),
        Command::Bench(a) => bench(a),
        Command::Dynamic(a) => dynamic(a),
        Command::GenWorkload(a) => gen_workload(a),
        Command::Verify(a) => verify(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Snapshot(a) => snapshot(a),
    }
}

fn resolve_query(g: &Graph, s: u64, t: u64, k: u32) -> Result<Query> {
    let (s, t) = (g.resolve(s)?, g.resolve(t)?);
    Ok(Query::new(s, t, k)?)
}

fn query(a: QueryArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let q = resolve_query(&g, a.source, a.target, a.k)?;
    let opts = a.plan.options(&g)?;
    let stdout = io::stdout();

    let metrics = if a.stream {
        let mut sink = WriterSink::new(BufWriter::new(stdout.lock()), g.external_ids());
        let m = run_query(&g, &q, &opts, &mut sink)?;
        sink.finish()?;
        m
    } else if let Some(n) = a.first {
        let mut sink = CollectSink::first(n);
        let m = run_query(&g, &q, &opts, &mut sink)?;
        let mut out = WriterSink::new(BufWriter::new(stdout.lock()), g.external_ids());
        for p in &sink.paths {
            out.emit(p);
        }
        out.finish()?;
        m
    } else {
        let mut sink = CountSink::default();
        let m = run_query(&g, &q, &opts, &mut sink)?;
        println!("{}", sink.count);
        m
    };

    if a.explain {
        let trace = match &metrics.plan {
            Some(p) => serde_json::to_value(p)?,
            // Forced strategies skip planning; show what it would have said.
            None => serde_json::to_value(select_plan(&LightweightIndex::build(&g, &q), opts.tau).trace)?,
        };
        let record = json!({ "strategy": metrics.strategy, "cut": metrics.cut, "trace": trace });
        eprintln!("{}", serde_json::to_string_pretty(&record)?);
    }
    if a.metrics {
        eprintln!("{}", serde_json::to_string_pretty(&metrics)?);
    }
    if metrics.timed_out {
        eprintln!(
            "time limit of {} ms reached after {} results",
            a.plan.time_limit_ms, metrics.result_count
        );
        return Ok(ExitCode::from(EXIT_TIMEOUT));
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let queries = a.workload.queries(&g)?;
    let opts = a.plan.options(&g)?;
    let outcomes = run_bench(&g, &queries, &opts, a.threads);

    let csv_path = a.output.with_extension("csv");
    let json_path = a.output.with_extension("json");
    let file = File::create(&csv_path).with_context(|| format!("cannot create {}", csv_path.display()))?;
    write_bench_csv(BufWriter::new(file), &g, &outcomes, a.omit_timings)?;

    let summary = summarize(&outcomes, a.omit_timings);
    let workload = match &a.workload.workload {
        Some(path) => json!({ "file": path.display().to_string() }),
        None => serde_json::to_value(a.workload.spec())?,
    };
    let sidecar = json!({
        "graph": a.graph.graph.display().to_string(),
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "workload": workload,
        "options": {
            "strategy": format!("{:?}", opts.choice),
            "tau": opts.tau,
            "time_limit_ms": a.plan.time_limit_ms,
            "max_tuples": opts.max_tuples,
            "constraints": a.plan.constraints.as_ref().map(|p| p.display().to_string()),
            "threads": a.threads,
            "omit_timings": a.omit_timings,
        },
        "columns": crate::report::BENCH_COLUMNS,
        "summary": summary,
    });
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("cannot write {}", json_path.display()))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}

fn dynamic(a: DynamicArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let opts = a.plan.options(&g)?;
    let report = run_dynamic(&g, a.fraction, a.k, a.seed, &opts, a.omit_timings)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn gen_workload(a: GenWorkloadArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let queries = generate(&g, &a.workload.spec())?;
    let text = format_workload(&g, &queries);
    match &a.output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let q = resolve_query(&g, a.source, a.target, a.k)?;
    let expected = naive_enumerate(&g, &q, a.cap)?;
    let mut failures = 0;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name} {detail}", if ok { "ok" } else { "MISMATCH" });
        failures += usize::from(!ok);
    };
    // Sorted but not deduplicated, so a repeated path counts as a mismatch.
    let sorted = |f: &dyn Fn(&mut CollectSink)| {
        let mut sink = CollectSink::unbounded();
        f(&mut sink);
        let mut paths = sink.paths;
        paths.sort_unstable();
        paths
    };
    check("exhaustive", true, format!("paths={}", expected.len()));

    let generic = sorted(&|s| {
        generic_dfs_enumerate(&g, &q, s);
    });
    check("baseline-dfs", generic == expected, format!("paths={}", generic.len()));

    let idx = LightweightIndex::build(&g, &q);
    let dfs = sorted(&|s| {
        dfs_enumerate(&idx, s);
    });
    check("index-dfs", dfs == expected, format!("paths={}", dfs.len()));

    for cut in 1..q.hop_limit {
        let mut sink = CollectSink::unbounded();
        join_enumerate(&idx, cut, &mut sink)?;
        let mut got = sink.paths;
        got.sort_unstable();
        check("join", got == expected, format!("cut={cut} paths={}", got.len()));
    }

    let mut chain = eliminate_and_collect(&build_relations(&g, &q), q.target, a.cap)?;
    chain.sort_unstable();
    check("chain-join", chain == expected, format!("paths={}", chain.len()));

    let walks = count_walks(&g, &q);
    let mut relaxed = CountSink::default();
    dfs_enumerate_relaxed(&idx, &mut relaxed);
    let table = full_estimate(&idx);
    check(
        "walk-count",
        walks.count == relaxed.count && walks.count == table.walk_count(),
        format!(
            "dp={} relaxed={} estimate={}",
            walks.count,
            relaxed.count,
            table.walk_count()
        ),
    );
    let crossing_ok = (0..=q.hop_limit).all(|i| table.walks_through(i) == table.walk_count());
    check("level-crossing", crossing_ok, format!("levels={}", q.hop_limit + 1));

    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn calibrate(a: CalibrateArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let config = CalibrationConfig {
        hop_limit: a.k,
        ..CalibrationConfig::default()
    };
    let c = calibrate_tau(&g, a.samples, a.seed, &config);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "tau": c.tau, "fallback": c.fallback, "samples": c.samples }))?
    );
    Ok(ExitCode::SUCCESS)
}

fn snapshot(a: SnapshotArgs) -> Result<ExitCode> {
    let g = a.graph.load()?;
    let out = File::create(&a.output).with_context(|| format!("cannot create {}", a.output.display()))?;
    let mut out = BufWriter::new(out);
    write_snapshot(&g, &mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}
