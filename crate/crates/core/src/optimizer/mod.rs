//! Cost estimation and plan selection.
//!
//! Planning is two-staged. A cheap estimate built from per-level average
//! fan-out decides whether the query is small enough to just run the DFS.
//! Otherwise exact walk counts are computed over the index with one forward
//! and one backward dynamic program; they give the size of every
//! intermediate result of the DFS and of each possible join cut.

mod calibrate;

pub use calibrate::{calibrate_tau, Calibration, CalibrationConfig};

use serde::Serialize;

use crate::graph::VertexId;
use crate::index::LightweightIndex;

/// Threshold on the cheap estimate below which the full estimate is skipped.
pub const DEFAULT_TAU: f64 = 1e5;

/// Estimated number of search-tree nodes of the index DFS, assuming every
/// vertex at position `j` fans out like the average member of `C_j`.
pub fn preliminary_estimate(idx: &LightweightIndex) -> f64 {
    let mut total = 0.0;
    let mut product = 1.0;
    for &gamma in idx.level_stats() {
        product *= gamma;
        total += product;
    }
    total
}

/// Exact walk counts per position over the index.
///
/// `forward(i, v)`: number of ways to complete a walk that has `v` at
/// position `i` into a `k`-edge, target-padded walk ending at `t`.
/// `backward(i, v)`: number of walks from `s` that put `v` at position `i`.
/// Both saturate at `u64::MAX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    hop_limit: u32,
    // [position][local id]
    forward: Vec<Vec<u64>>,
    backward: Vec<Vec<u64>>,
    directory: Vec<(VertexId, usize)>,
    forward_sums: Vec<u64>,
    backward_sums: Vec<u64>,
    saturated: bool,
}

impl CountTable {
    pub fn hop_limit(&self) -> u32 {
        self.hop_limit
    }

    fn local(&self, v: VertexId) -> Option<usize> {
        self.directory
            .binary_search_by_key(&v, |&(u, _)| u)
            .ok()
            .map(|i| self.directory[i].1)
    }

    /// 0 when `v` is not in `C_i`.
    pub fn forward(&self, i: u32, v: VertexId) -> u64 {
        self.local(v).map_or(0, |l| self.forward[i as usize][l])
    }

    /// 0 when `v` is not in `C_i`.
    pub fn backward(&self, i: u32, v: VertexId) -> u64 {
        self.local(v).map_or(0, |l| self.backward[i as usize][l])
    }

    /// `sum over C_i of forward(i, v)`, for `i` in `0..=k`.
    pub fn forward_sums(&self) -> &[u64] {
        &self.forward_sums
    }

    /// `sum over C_i of backward(i, v)`, for `i` in `0..=k`.
    pub fn backward_sums(&self) -> &[u64] {
        &self.backward_sums
    }

    /// Number of s-t walks with at most `k` edges in the indexed graph.
    pub fn walk_count(&self) -> u64 {
        self.forward_sums[0]
    }

    /// `sum over C_i of forward(i, v) * backward(i, v)`. Every walk crosses
    /// every position exactly once, so this equals [`Self::walk_count`] for
    /// each `i` unless the counts saturated.
    pub fn walks_through(&self, i: u32) -> u64 {
        let i = i as usize;
        self.forward[i]
            .iter()
            .zip(&self.backward[i])
            .fold(0u64, |acc, (&f, &b)| acc.saturating_add(f.saturating_mul(b)))
    }

    /// True if any count hit `u64::MAX`.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    /// Search-tree nodes generated by the index DFS.
    pub fn dfs_cost(&self) -> u64 {
        dfs_cost(&self.backward_sums)
    }

    /// Intermediate tuples produced by the join plan cut at `cut`.
    pub fn join_cost(&self, cut: u32) -> u64 {
        join_cost(&self.forward_sums, &self.backward_sums, cut)
    }
}

/// Runs both counting passes over the index.
pub fn full_estimate(idx: &LightweightIndex) -> CountTable {
    let k = idx.query().k();
    let (s, t) = (idx.query().source, idx.query().target);
    let n_local = idx.indexed_vertices().len();
    let mut saturated = false;
    let mut add = |acc: u64, x: u64| {
        let (sum, overflow) = acc.overflowing_add(x);
        saturated |= overflow;
        if overflow {
            u64::MAX
        } else {
            sum
        }
    };
    let local = |v: VertexId| idx.local_id(v).expect("lookups return indexed vertices");

    let mut forward = vec![vec![0u64; n_local]; k + 1];
    if let Some(lt) = idx.local_id(t) {
        forward[k][lt] = 1;
    }
    for i in (0..k).rev() {
        let budget = (k - i - 1) as u32;
        for &v in idx.lookup_level(i as u32) {
            let total = idx
                .lookup_forward(v, budget)
                .iter()
                .fold(0, |acc, &w| add(acc, forward[i + 1][local(w)]));
            forward[i][local(v)] = total;
        }
    }

    let mut backward = vec![vec![0u64; n_local]; k + 1];
    if let Some(ls) = idx.local_id(s) {
        backward[0][ls] = 1;
    }
    for i in 1..=k {
        let budget = (i - 1) as u32;
        for &v in idx.lookup_level(i as u32) {
            let total = idx
                .lookup_backward(v, budget)
                .iter()
                .fold(0, |acc, &w| add(acc, backward[i - 1][local(w)]));
            backward[i][local(v)] = total;
        }
    }

    let level_sum = |table: &[Vec<u64>], i: usize| {
        idx.lookup_level(i as u32)
            .iter()
            .fold(0u64, |acc, &v| acc.saturating_add(table[i][local(v)]))
    };
    let forward_sums: Vec<u64> = (0..=k).map(|i| level_sum(&forward, i)).collect();
    let backward_sums: Vec<u64> = (0..=k).map(|i| level_sum(&backward, i)).collect();
    saturated |= forward_sums.iter().chain(&backward_sums).any(|&x| x == u64::MAX);

    let directory = idx
        .indexed_vertices()
        .iter()
        .enumerate()
        .map(|(l, &v)| (v, l))
        .collect();
    CountTable {
        hop_limit: k as u32,
        forward,
        backward,
        directory,
        forward_sums,
        backward_sums,
        saturated,
    }
}

/// Sum of `backward_sums[1..=k]`.
pub fn dfs_cost(backward_sums: &[u64]) -> u64 {
    backward_sums[1..].iter().fold(0, |a, &x| a.saturating_add(x))
}

/// Tuples generated by the prefix search (`backward_sums[1..=cut]`), the
/// suffix search (`forward_sums[cut..=k]`) and the join output
/// (`forward_sums[0]`).
pub fn join_cost(forward_sums: &[u64], backward_sums: &[u64], cut: u32) -> u64 {
    let cut = cut as usize;
    backward_sums[1..=cut]
        .iter()
        .chain(&forward_sums[cut..])
        .fold(forward_sums[0], |a, &x| a.saturating_add(x))
}

/// Cut position in `1..k` minimizing `backward_sums[i] + forward_sums[i]`.
/// Ties prefer the position closest to `k / 2` (rounded up), then the smaller.
pub fn choose_cut_from_sums(forward_sums: &[u64], backward_sums: &[u64]) -> u32 {
    let k = forward_sums.len() - 1;
    assert!(
        k >= 2 && backward_sums.len() == k + 1,
        "sums must cover positions 0..=k with k >= 2"
    );
    let middle = k.div_ceil(2);
    (1..k)
        .min_by_key(|&i| (backward_sums[i].saturating_add(forward_sums[i]), i.abs_diff(middle), i))
        .unwrap() as u32
}

pub fn choose_cut(table: &CountTable) -> u32 {
    choose_cut_from_sums(&table.forward_sums, &table.backward_sums)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Strategy {
    Dfs,
    Join { cut: u32 },
}

/// Everything the optimizer computed on the way to a decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanTrace {
    pub tau: f64,
    pub preliminary_estimate: f64,
    pub full_estimate_run: bool,
    pub level_stats: Vec<f64>,
    pub forward_sums: Option<Vec<u64>>,
    pub backward_sums: Option<Vec<u64>>,
    pub walk_count: Option<u64>,
    pub saturated: bool,
    pub cut: Option<u32>,
    pub dfs_cost: Option<u64>,
    pub join_cost: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub strategy: Strategy,
    pub trace: PlanTrace,
}

/// Picks DFS when the cheap estimate is at most `tau`. Otherwise runs the
/// full estimate and picks the cheaper of DFS and the best join cut, DFS on
/// a tie.
pub fn select_plan(idx: &LightweightIndex, tau: f64) -> Plan {
    let estimate = preliminary_estimate(idx);
    let mut trace = PlanTrace {
        tau,
        preliminary_estimate: estimate,
        full_estimate_run: false,
        level_stats: idx.level_stats().to_vec(),
        forward_sums: None,
        backward_sums: None,
        walk_count: None,
        saturated: false,
        cut: None,
        dfs_cost: None,
        join_cost: None,
    };
    if estimate <= tau {
        return Plan {
            strategy: Strategy::Dfs,
            trace,
        };
    }
    let table = full_estimate(idx);
    let cut = choose_cut(&table);
    let (dfs, join) = (table.dfs_cost(), table.join_cost(cut));
    trace.full_estimate_run = true;
    trace.forward_sums = Some(table.forward_sums.clone());
    trace.backward_sums = Some(table.backward_sums.clone());
    trace.walk_count = Some(table.walk_count());
    trace.saturated = table.saturated();
    trace.cut = Some(cut);
    trace.dfs_cost = Some(dfs);
    trace.join_cost = Some(join);
    let strategy = if dfs <= join {
        Strategy::Dfs
    } else {
        Strategy::Join { cut }
    };
    Plan { strategy, trace }
}
