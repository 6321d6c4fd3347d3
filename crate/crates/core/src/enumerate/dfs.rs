use crate::graph::VertexId;
use crate::index::LightweightIndex;
use crate::sink::{Flow, PathSink, SearchStats};

/// Expansions between two `poll` calls on the sink.
pub(crate) const POLL_INTERVAL: u64 = 1 << 12;

/// Depth-first search on the index, streaming each simple path to `sink` as
/// soon as it is completed.
///
/// From a partial result `M` ending at `v` the search only considers
/// `lookup_forward(v, k - L(M) - 1)`, so every branch it enters can still
/// reach `t` in time; the only rejected candidates are vertices already on
/// `M`. Running time is bounded by `k` times the number of s-t walks.
pub fn dfs_enumerate<S: PathSink>(idx: &LightweightIndex, sink: &mut S) -> SearchStats {
    search::<S, true>(idx, sink)
}

/// [`dfs_enumerate`] without the repeated-vertex check: emits every s-t walk
/// with at most `k` edges whose interior avoids `s` and `t`.
pub fn dfs_enumerate_relaxed<S: PathSink>(idx: &LightweightIndex, sink: &mut S) -> SearchStats {
    search::<S, false>(idx, sink)
}

fn search<S: PathSink, const SIMPLE: bool>(idx: &LightweightIndex, sink: &mut S) -> SearchStats {
    let q = *idx.query();
    let (s, t, k) = (q.source, q.target, q.hop_limit as usize);
    let mut stats = SearchStats::default();
    let Some(root) = idx.forward_range(s, (k - 1) as u32) else {
        return stats;
    };
    let neighbors = idx.forward_neighbors_raw();

    let mut on_path = if SIMPLE {
        vec![false; idx.vertex_count()]
    } else {
        Vec::new()
    };
    if SIMPLE {
        on_path[s as usize] = true;
    }
    let mut path: Vec<VertexId> = Vec::with_capacity(k + 1);
    path.push(s);
    // One frame per vertex on `path`: the unexplored part of its neighbor range.
    let mut frames: Vec<(usize, usize)> = Vec::with_capacity(k + 1);
    frames.push((root.start, root.end));
    let mut next_poll = POLL_INTERVAL;

    while let Some(frame) = frames.last_mut() {
        if frame.0 == frame.1 {
            frames.pop();
            let v = path.pop().unwrap();
            if SIMPLE {
                on_path[v as usize] = false;
            }
            continue;
        }
        let w = neighbors[frame.0];
        frame.0 += 1;
        if SIMPLE && on_path[w as usize] {
            continue;
        }
        stats.expansions += 1;

        if w == t {
            path.push(t);
            debug_assert!(!SIMPLE || is_simple(&path));
            stats.emitted += 1;
            let flow = sink.emit(&path);
            path.pop();
            if flow == Flow::Stop {
                stats.stopped = true;
                break;
            }
        } else {
            // w.t <= k - L(M) - 1 and w != t, so the remaining budget is >= 0.
            let budget = k - path.len() - 1;
            path.push(w);
            if SIMPLE {
                on_path[w as usize] = true;
            }
            let r = idx
                .forward_range(w, budget as u32)
                .expect("forward neighbors are indexed");
            frames.push((r.start, r.end));
        }

        if stats.expansions >= next_poll {
            next_poll += POLL_INTERVAL;
            if sink.poll() == Flow::Stop {
                stats.stopped = true;
                break;
            }
        }
    }
    stats
}

pub(crate) fn is_simple(path: &[VertexId]) -> bool {
    path.iter().enumerate().all(|(i, v)| !path[i + 1..].contains(v))
}
