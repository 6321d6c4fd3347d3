use std::time::{Duration, Instant};

use hopenum::baseline::{generic_dfs_enumerate, naive_enumerate};
use hopenum::enumerate::{constrained_dfs_enumerate, dfs_enumerate, join_enumerate_capped, ConstraintBundle};
use hopenum::graph::{Graph, VertexId};
use hopenum::index::LightweightIndex;
use hopenum::optimizer::{select_plan, PlanTrace, Strategy, DEFAULT_TAU};
use hopenum::{Deadline, EnumerateError, Flow, PathSink, Query};
use serde::Serialize;

/// Results after which the response time is taken.
pub const RESPONSE_RESULTS: u64 = 1000;

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    /// Let the optimizer decide.
    Auto,
    ForceDfs,
    ForceJoin(u32),
    /// Distance-pruned DFS on the raw graph, no index.
    BaselineDfs,
    /// Exhaustive search with no pruning.
    Oracle,
}

#[derive(Clone)]
pub struct RunOptions {
    pub choice: StrategyChoice,
    pub tau: f64,
    pub time_limit: Duration,
    pub max_tuples: Option<usize>,
    pub constraints: Option<ConstraintBundle>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            choice: StrategyChoice::Auto,
            tau: DEFAULT_TAU,
            time_limit: DEFAULT_TIME_LIMIT,
            max_tuples: None,
            constraints: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryMetrics {
    pub strategy: String,
    pub cut: Option<u32>,
    pub result_count: u64,
    /// Index build, planning and enumeration. Equals the limit on timeout.
    pub query_time_ms: f64,
    /// Time to the first 1000 results, or to completion if there are fewer.
    /// Join plans only produce results after materializing, so for them this
    /// is the query time.
    pub response_time_ms: f64,
    /// Results per second over the query time.
    pub throughput: f64,
    pub timed_out: bool,
    pub plan: Option<PlanTrace>,
}

struct Timing<'a> {
    inner: &'a mut dyn PathSink,
    started: Instant,
    count: u64,
    response: Option<Duration>,
}

impl PathSink for Timing<'_> {
    fn emit(&mut self, path: &[VertexId]) -> Flow {
        self.count += 1;
        if self.count == RESPONSE_RESULTS {
            self.response = Some(self.started.elapsed());
        }
        self.inner.emit(path)
    }

    fn poll(&mut self) -> Flow {
        self.inner.poll()
    }
}

/// Runs one query end to end and measures it.
pub fn run_query(
    g: &Graph,
    q: &Query,
    opts: &RunOptions,
    sink: &mut dyn PathSink,
) -> Result<QueryMetrics, EnumerateError> {
    let started = Instant::now();
    let timing = Timing {
        inner: sink,
        started,
        count: 0,
        response: None,
    };
    let mut sink = Deadline::until(timing, started + opts.time_limit);
    let mut plan_trace = None;

    let (name, cut) = match (&opts.constraints, opts.choice) {
        (_, StrategyChoice::Oracle) => {
            let paths = naive_enumerate(g, q, usize::MAX).expect("uncapped");
            for p in &paths {
                if sink.emit(p) == Flow::Stop {
                    break;
                }
            }
            ("oracle", None)
        }
        (_, StrategyChoice::BaselineDfs) => {
            generic_dfs_enumerate(g, q, &mut sink);
            ("baseline-dfs", None)
        }
        (Some(bundle), _) => {
            let idx = bundle.build_index(g, q);
            constrained_dfs_enumerate(&idx, bundle, &mut sink)?;
            ("constrained-dfs", None)
        }
        (None, choice) => {
            let idx = LightweightIndex::build(g, q);
            let strategy = match choice {
                StrategyChoice::ForceDfs => Strategy::Dfs,
                StrategyChoice::ForceJoin(cut) => Strategy::Join { cut },
                _ => {
                    let plan = select_plan(&idx, opts.tau);
                    plan_trace = Some(plan.trace);
                    plan.strategy
                }
            };
            match strategy {
                Strategy::Dfs => {
                    dfs_enumerate(&idx, &mut sink);
                    ("dfs", None)
                }
                Strategy::Join { cut } => {
                    join_enumerate_capped(&idx, cut, opts.max_tuples, &mut sink)?;
                    ("join", Some(cut))
                }
            }
        }
    };

    let elapsed = started.elapsed();
    let timed_out = sink.timed_out();
    let timing = sink.into_inner();
    let query_time = if timed_out { opts.time_limit } else { elapsed };
    let response = match (cut, timing.response) {
        (None, Some(r)) => r,
        _ => query_time,
    };
    let secs = query_time.as_secs_f64();
    let throughput = if timing.count == 0 {
        0.0
    } else {
        timing.count as f64 / secs.max(1e-9)
    };
    Ok(QueryMetrics {
        strategy: name.to_string(),
        cut,
        result_count: timing.count,
        query_time_ms: secs * 1e3,
        response_time_ms: response.as_secs_f64() * 1e3,
        throughput,
        timed_out,
        plan: plan_trace,
    })
}

/// Nearest-rank percentile of `values`, `q` in `(0, 1]`. 0 when empty.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
