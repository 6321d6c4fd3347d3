//! Reference enumerators and counters.
//!
//! Nothing here uses the per-query index. These are the ground truth the
//! index-based strategies are checked against, and they are kept deliberately
//! simple: the generic distance-pruned DFS, an exhaustive backtracking search
//! with no pruning at all, a walk-counting dynamic program, and a chain-join
//! evaluator over explicitly built relations.

mod relations;

pub use relations::{build_relations, eliminate_and_collect, evaluate_chain_join, Relation};

use crate::error::CapExceeded;
use crate::graph::{bfs_distances, Direction, Graph, VertexId, UNREACHABLE};
use crate::query::{Path, Query};
use crate::sink::{Flow, PathSink, SearchStats};

/// Backtracking DFS that prunes with each vertex's unconstrained distance to
/// the target, computed up front by one reverse BFS.
pub fn generic_dfs_enumerate<S: PathSink>(g: &Graph, q: &Query, sink: &mut S) -> SearchStats {
    let to_target = bfs_distances(g, q.target, Direction::Reverse, None);
    let mut state = GenericDfs {
        g,
        q,
        to_target: to_target.as_slice(),
        on_path: vec![false; g.vertex_count()],
        path: vec![q.source],
        stats: SearchStats::default(),
    };
    state.on_path[q.source as usize] = true;
    state.search(sink);
    state.stats
}

struct GenericDfs<'a> {
    g: &'a Graph,
    q: &'a Query,
    to_target: &'a [u32],
    on_path: Vec<bool>,
    path: Vec<VertexId>,
    stats: SearchStats,
}

impl GenericDfs<'_> {
    // Returns false once the sink asked to stop.
    fn search<S: PathSink>(&mut self, sink: &mut S) -> bool {
        let v = *self.path.last().unwrap();
        if v == self.q.target {
            self.stats.emitted += 1;
            if sink.emit(&self.path) == Flow::Stop {
                self.stats.stopped = true;
                return false;
            }
            return true;
        }
        let len = (self.path.len() - 1) as u32;
        for &w in self.g.out_neighbors(v) {
            let dist = self.to_target[w as usize];
            if self.on_path[w as usize] || dist == UNREACHABLE || len + 1 + dist > self.q.hop_limit {
                continue;
            }
            self.stats.expansions += 1;
            self.on_path[w as usize] = true;
            self.path.push(w);
            let keep_going = self.search(sink);
            self.path.pop();
            self.on_path[w as usize] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

/// Exhaustive backtracking with only the simple-path and endpoint rules.
///
/// Intended for small graphs. Fails once more than `cap` results are found.
pub fn naive_enumerate(g: &Graph, q: &Query, cap: usize) -> Result<Vec<Path>, CapExceeded> {
    fn go(
        g: &Graph,
        q: &Query,
        path: &mut Vec<VertexId>,
        seen: &mut [bool],
        out: &mut Vec<Path>,
        cap: usize,
    ) -> Result<(), CapExceeded> {
        let v = *path.last().unwrap();
        if v == q.target {
            if out.len() == cap {
                return Err(CapExceeded { cap });
            }
            out.push(path.clone());
            return Ok(());
        }
        if path.len() > q.hop_limit as usize {
            return Ok(());
        }
        for &w in g.out_neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                path.push(w);
                go(g, q, path, seen, out, cap)?;
                path.pop();
                seen[w as usize] = false;
            }
        }
        Ok(())
    }

    let mut seen = vec![false; g.vertex_count()];
    seen[q.source as usize] = true;
    let mut out = Vec::new();
    go(g, q, &mut vec![q.source], &mut seen, &mut out, cap)?;
    out.sort_unstable();
    Ok(out)
}

/// Saturating walk count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkCount {
    pub count: u64,
    pub saturated: bool,
}

/// Number of walks from `s` to `t` with at most `k` edges whose interior
/// vertices avoid both `s` and `t`.
pub fn count_walks(g: &Graph, q: &Query) -> WalkCount {
    let n = g.vertex_count();
    let (s, t) = (q.source, q.target);
    // ways[v]: walks from v reaching t within the current number of hops.
    let mut ways = vec![0u64; n];
    ways[t as usize] = 1;
    let mut saturated = false;
    for _ in 0..q.hop_limit {
        let mut next = vec![0u64; n];
        next[t as usize] = 1;
        for v in 0..n as VertexId {
            if v == t {
                continue;
            }
            let mut total = 0u64;
            for &w in g.out_neighbors(v) {
                if w == s {
                    continue;
                }
                let (sum, overflow) = total.overflowing_add(ways[w as usize]);
                total = if overflow { u64::MAX } else { sum };
                saturated |= overflow;
            }
            next[v as usize] = total;
        }
        ways = next;
    }
    WalkCount {
        count: ways[s as usize],
        saturated,
    }
}
