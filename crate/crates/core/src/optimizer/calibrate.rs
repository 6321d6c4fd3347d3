use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{choose_cut, full_estimate, DEFAULT_TAU};
use crate::enumerate::dfs_enumerate;
use crate::graph::{bfs_distances_bounded, Direction, Graph, VertexId};
use crate::index::LightweightIndex;
use crate::query::Query;
use crate::sink::{Deadline, Flow, PathSink};

#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    pub hop_limit: u32,
    /// Candidates are `10^1 ..= 10^max_exponent`.
    pub max_exponent: u32,
    /// Share of samples that must favor a candidate.
    pub agreement: f64,
    /// Maximum hop distance between a sampled source and target.
    pub max_distance: u32,
    pub per_query_limit: Duration,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            hop_limit: 6,
            max_exponent: 7,
            agreement: 0.9,
            max_distance: 3,
            per_query_limit: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub tau: f64,
    /// True when no candidate was supported and `tau` is the default.
    pub fallback: bool,
    pub samples: usize,
}

/// Picks the smallest `10^p` such that, among sampled queries that produce
/// at least `10^p` results, at least `agreement` of them take longer to
/// produce those results with the DFS than to run the full estimate.
///
/// Falls back to [`DEFAULT_TAU`] with a warning when no sample supports any
/// candidate.
pub fn calibrate_tau(g: &Graph, sample_count: usize, seed: u64, config: &CalibrationConfig) -> Calibration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<VertexId> = (0..g.vertex_count() as VertexId)
        .filter(|&v| g.out_degree(v) > 0)
        .collect();

    // (optimization time, time at which 10^p results were reached)
    let mut samples: Vec<(Duration, Vec<Option<Duration>>)> = Vec::new();
    let attempts = sample_count.saturating_mul(10);
    for _ in 0..attempts {
        if samples.len() == sample_count {
            break;
        }
        let Some(q) = sample_query(g, &sources, config, &mut rng) else {
            continue;
        };
        let idx = LightweightIndex::build(g, &q);
        let started = Instant::now();
        let table = full_estimate(&idx);
        std::hint::black_box(choose_cut(&table));
        let optimization = started.elapsed();

        let mut probe = Milestones {
            started: Instant::now(),
            count: 0,
            next: 10,
            reached: Vec::new(),
            last: 10u64.pow(config.max_exponent),
        };
        let mut sink = Deadline::new(&mut probe, config.per_query_limit);
        dfs_enumerate(&idx, &mut sink);
        let mut reached = probe.reached;
        reached.resize(config.max_exponent as usize, None);
        samples.push((optimization, reached));
    }

    for p in 0..config.max_exponent as usize {
        let reached: Vec<_> = samples
            .iter()
            .filter_map(|(opt, times)| times[p].map(|t| (*opt, t)))
            .collect();
        if reached.is_empty() {
            continue;
        }
        let favor = reached.iter().filter(|(opt, t)| opt < t).count();
        if favor as f64 >= config.agreement * reached.len() as f64 {
            return Calibration {
                tau: 10f64.powi(p as i32 + 1),
                fallback: false,
                samples: samples.len(),
            };
        }
    }
    log::warn!(
        "tau calibration inconclusive over {} samples; using {DEFAULT_TAU:e}",
        samples.len()
    );
    Calibration {
        tau: DEFAULT_TAU,
        fallback: true,
        samples: samples.len(),
    }
}

fn sample_query(g: &Graph, sources: &[VertexId], config: &CalibrationConfig, rng: &mut impl Rng) -> Option<Query> {
    let &s = sources.choose(rng)?;
    let dist = bfs_distances_bounded(g, s, Direction::Forward, None, config.max_distance, |_| true);
    let near: Vec<VertexId> = (0..g.vertex_count() as VertexId)
        .filter(|&v| v != s && dist.is_reachable(v))
        .collect();
    let &t = near.choose(rng)?;
    Query::new(s, t, config.hop_limit.max(2)).ok()
}

struct Milestones {
    started: Instant,
    count: u64,
    next: u64,
    last: u64,
    reached: Vec<Option<Duration>>,
}

impl PathSink for Milestones {
    fn emit(&mut self, _: &[VertexId]) -> Flow {
        self.count += 1;
        if self.count == self.next {
            self.reached.push(Some(self.started.elapsed()));
            if self.next == self.last {
                return Flow::Stop;
            }
            self.next *= 10;
        }
        Flow::Continue
    }
}
