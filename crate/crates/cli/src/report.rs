//! Benchmark and dynamic-graph reports.
//!
//! The bench CSV has one row per query with these columns, in order:
//!
//! `query_id, source, target, k, status, strategy, cut, result_count,
//! query_time_ms, response_time_ms, throughput, preliminary_estimate,
//! full_estimate_run, dfs_cost, join_cost, error`
//!
//! `status` is `ok`, `timeout` or `error`. Empty cells mean "not computed".
//! With timings omitted every timing cell holds `-`, which makes the report
//! a pure function of the graph, the workload and the options.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Result;
use hopenum::graph::{Graph, VertexId};
use hopenum::{CountSink, Query};
use serde::Serialize;

use crate::metrics::{percentile, run_query, QueryMetrics, RunOptions};

pub const BENCH_COLUMNS: [&str; 16] = [
    "query_id",
    "source",
    "target",
    "k",
    "status",
    "strategy",
    "cut",
    "result_count",
    "query_time_ms",
    "response_time_ms",
    "throughput",
    "preliminary_estimate",
    "full_estimate_run",
    "dfs_cost",
    "join_cost",
    "error",
];

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub query: Query,
    pub result: Result<QueryMetrics, String>,
}

/// Runs every query with a counting sink, `threads` queries at a time.
/// Outcomes come back in workload order.
pub fn run_bench(g: &Graph, queries: &[Query], opts: &RunOptions, threads: usize) -> Vec<BenchOutcome> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<BenchOutcome>>> = queries.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(q) = queries.get(i) else {
                    break;
                };
                let result = run_query(g, q, opts, &mut CountSink::default()).map_err(|e| e.to_string());
                log::debug!("query {i} done");
                *slots[i].lock().unwrap() = Some(BenchOutcome { query: *q, result });
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every query ran"))
        .collect()
}

fn ms(x: f64, omit: bool) -> String {
    if omit {
        "-".into()
    } else {
        format!("{x:.4}")
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_bench_csv<W: std::io::Write>(
    out: W,
    g: &Graph,
    outcomes: &[BenchOutcome],
    omit_timings: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_COLUMNS)?;
    for (i, o) in outcomes.iter().enumerate() {
        let q = &o.query;
        let mut row = vec![
            i.to_string(),
            g.external_id(q.source).to_string(),
            g.external_id(q.target).to_string(),
            q.hop_limit.to_string(),
        ];
        match &o.result {
            Ok(m) => {
                let plan = m.plan.as_ref();
                row.extend([
                    if m.timed_out { "timeout" } else { "ok" }.to_string(),
                    m.strategy.clone(),
                    opt(m.cut),
                    m.result_count.to_string(),
                    ms(m.query_time_ms, omit_timings),
                    ms(m.response_time_ms, omit_timings),
                    if omit_timings {
                        "-".into()
                    } else {
                        format!("{:.1}", m.throughput)
                    },
                    opt(plan.map(|p| format!("{:.6e}", p.preliminary_estimate))),
                    opt(plan.map(|p| p.full_estimate_run)),
                    opt(plan.and_then(|p| p.dfs_cost)),
                    opt(plan.and_then(|p| p.join_cost)),
                    String::new(),
                ]);
            }
            Err(e) => {
                row.push("error".into());
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(e.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchSummary {
    pub queries: usize,
    pub completed: usize,
    pub timed_out: usize,
    pub errors: usize,
    pub dfs_plans: usize,
    pub join_plans: usize,
    pub mean_result_count: f64,
    /// Means over every query that did not fail; timed-out queries count
    /// with the limit as their query time.
    pub mean_query_time_ms: Option<f64>,
    pub mean_response_time_ms: Option<f64>,
    pub mean_throughput: Option<f64>,
}

pub fn summarize(outcomes: &[BenchOutcome], omit_timings: bool) -> BenchSummary {
    let ok: Vec<&QueryMetrics> = outcomes.iter().filter_map(|o| o.result.as_ref().ok()).collect();
    let mean = |f: &dyn Fn(&QueryMetrics) -> f64| {
        if ok.is_empty() {
            0.0
        } else {
            ok.iter().map(|m| f(m)).sum::<f64>() / ok.len() as f64
        }
    };
    let timing = |f: &dyn Fn(&QueryMetrics) -> f64| (!omit_timings).then(|| mean(f));
    BenchSummary {
        queries: outcomes.len(),
        completed: ok.iter().filter(|m| !m.timed_out).count(),
        timed_out: ok.iter().filter(|m| m.timed_out).count(),
        errors: outcomes.len() - ok.len(),
        dfs_plans: ok.iter().filter(|m| m.cut.is_none()).count(),
        join_plans: ok.iter().filter(|m| m.cut.is_some()).count(),
        mean_result_count: mean(&|m| m.result_count as f64),
        mean_query_time_ms: timing(&|m| m.query_time_ms),
        mean_response_time_ms: timing(&|m| m.response_time_ms),
        mean_throughput: timing(&|m| m.throughput),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicReport {
    pub hop_limit: u32,
    pub fraction: f64,
    pub seed: u64,
    pub insertions: usize,
    pub total_results: u64,
    pub timed_out: usize,
    pub p999_response_time_ms: Option<f64>,
    pub p999_query_time_ms: Option<f64>,
    pub mean_query_time_ms: Option<f64>,
}

/// Withholds a random `fraction` of the edges, then inserts them back one at
/// a time. After inserting `(u, v)` it runs `q(v, u, k - 1)`, which lists the
/// cycles of length at most `k` through the new edge.
pub fn run_dynamic(
    g: &Graph,
    fraction: f64,
    hop_limit: u32,
    seed: u64,
    opts: &RunOptions,
    omit_timings: bool,
) -> Result<DynamicReport> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    anyhow::ensure!(fraction > 0.0 && fraction <= 1.0, "fraction must be in (0, 1]");
    anyhow::ensure!(hop_limit >= 3, "k must be at least 3 so that k - 1 >= 2");
    let mut edges: Vec<_> = g.edges().collect();
    anyhow::ensure!(!edges.is_empty(), "graph has no edges");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    let take = ((edges.len() as f64 * fraction).ceil() as usize).clamp(1, edges.len());
    let mut report = replay_insertions(g, &edges[..take], hop_limit, opts, omit_timings)?;
    report.fraction = fraction;
    report.seed = seed;
    Ok(report)
}

/// Removes `withheld` from `g`, then inserts those edges back in order and
/// runs the cycle query after each insertion.
pub fn replay_insertions(
    g: &Graph,
    withheld: &[(VertexId, VertexId)],
    hop_limit: u32,
    opts: &RunOptions,
    omit_timings: bool,
) -> Result<DynamicReport> {
    anyhow::ensure!(hop_limit >= 3, "k must be at least 3 so that k - 1 >= 2");
    let held: HashSet<_> = withheld.iter().copied().collect();
    let mut current = g.retain_edges(|u, v| !held.contains(&(u, v)));

    let mut response = Vec::with_capacity(withheld.len());
    let mut query = Vec::with_capacity(withheld.len());
    let (mut total_results, mut timed_out) = (0, 0);
    for &(u, v) in withheld {
        current = current.with_appended_edges(&[(u, v)]);
        let q = Query::new(v, u, hop_limit - 1)?;
        let m = run_query(&current, &q, opts, &mut CountSink::default())?;
        total_results += m.result_count;
        timed_out += usize::from(m.timed_out);
        response.push(m.response_time_ms);
        query.push(m.query_time_ms);
    }
    let timing = |x: f64| (!omit_timings).then_some(x);
    let mean = if query.is_empty() {
        0.0
    } else {
        query.iter().sum::<f64>() / query.len() as f64
    };
    Ok(DynamicReport {
        hop_limit,
        fraction: 0.0,
        seed: 0,
        insertions: withheld.len(),
        total_results,
        timed_out,
        p999_response_time_ms: timing(percentile(&response, 0.999)),
        p999_query_time_ms: timing(percentile(&query, 0.999)),
        mean_query_time_ms: timing(mean),
    })
}
