use std::collections::HashMap;
use std::ops::Range;

use super::dfs::POLL_INTERVAL;
use crate::error::EnumerateError;
use crate::graph::VertexId;
use crate::index::LightweightIndex;
use crate::sink::{Flow, PathSink, SearchStats};

/// Fixed-arity tuples stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    arity: usize,
    data: Vec<VertexId>,
}

impl TupleSet {
    fn new(arity: usize) -> Self {
        Self {
            arity,
            data: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[VertexId] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, VertexId> {
        self.data.chunks_exact(self.arity)
    }
}

/// The two materialized sides of a join plan cut at position `cut`.
///
/// `prefix` holds every sequence `(u_0 = s, ..., u_cut)` produced by the
/// budgeted search from `s`; `suffix` holds, for every distinct last vertex
/// `c` of a prefix, the sequences `(u_cut = c, ..., u_k)`. Sequences that hit
/// `t` early are padded with `t`. No distinctness check has been applied yet.
#[derive(Debug, Clone)]
pub struct JoinSides {
    pub cut: u32,
    pub prefix: TupleSet,
    pub suffix: TupleSet,
    groups: HashMap<VertexId, Range<usize>>,
    target: VertexId,
    expansions: u64,
}

impl JoinSides {
    /// Suffix tuples starting at `c`.
    pub fn suffixes_from(&self, c: VertexId) -> impl Iterator<Item = &[VertexId]> {
        let r = self.groups.get(&c).cloned().unwrap_or(0..0);
        r.map(move |i| self.suffix.get(i))
    }

    /// Distinct join vertices, ascending.
    pub fn join_vertices(&self) -> Vec<VertexId> {
        let mut v: Vec<_> = self.groups.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Calls `f` with every full joined row of `k + 1` vertices, before the
    /// truncation and distinctness checks.
    pub fn for_each_joined(&self, mut f: impl FnMut(&[VertexId])) {
        let mut row = Vec::with_capacity(self.prefix.arity + self.suffix.arity);
        for a in self.prefix.iter() {
            for b in self.suffixes_from(*a.last().unwrap()) {
                row.clear();
                row.extend_from_slice(a);
                row.extend_from_slice(&b[1..]);
                f(&row);
            }
        }
    }
}

/// Runs the budgeted search from `s` for the prefix side and from each join
/// vertex for the suffix side. Fails with [`EnumerateError::TupleCapExceeded`]
/// once both sides together hold more than `max_tuples` tuples.
pub fn materialize_join_sides(
    idx: &LightweightIndex,
    cut: u32,
    max_tuples: Option<usize>,
) -> Result<JoinSides, EnumerateError> {
    let mut never = NeverStop;
    materialize(idx, cut, max_tuples, &mut never).map(|m| m.expect("never stops"))
}

struct NeverStop;

impl PathSink for NeverStop {
    fn emit(&mut self, _: &[VertexId]) -> Flow {
        Flow::Continue
    }
}

// Ok(None) when the sink's poll asked to stop.
fn materialize<S: PathSink>(
    idx: &LightweightIndex,
    cut: u32,
    max_tuples: Option<usize>,
    sink: &mut S,
) -> Result<Option<JoinSides>, EnumerateError> {
    let q = *idx.query();
    let k = q.hop_limit;
    if cut == 0 || cut >= k {
        return Err(EnumerateError::InvalidCut { cut, max: k - 1 });
    }
    let cap = max_tuples.unwrap_or(usize::MAX);
    let mut walker = Walker {
        idx,
        target: q.target,
        k,
        cap,
        stored: 0,
        expansions: 0,
        next_poll: POLL_INTERVAL,
    };

    let mut prefix = TupleSet::new(cut as usize + 1);
    if !walker.collect(q.source, 0, &mut prefix, sink)? {
        return Ok(None);
    }

    let mut join_vertices: Vec<VertexId> = prefix.iter().map(|a| *a.last().unwrap()).collect();
    join_vertices.sort_unstable();
    join_vertices.dedup();

    let mut suffix = TupleSet::new((k - cut) as usize + 1);
    let mut groups = HashMap::with_capacity(join_vertices.len());
    for c in join_vertices {
        let start = suffix.len();
        if !walker.collect(c, cut, &mut suffix, sink)? {
            return Ok(None);
        }
        groups.insert(c, start..suffix.len());
    }
    Ok(Some(JoinSides {
        cut,
        prefix,
        suffix,
        groups,
        target: q.target,
        expansions: walker.expansions,
    }))
}

struct Walker<'a> {
    idx: &'a LightweightIndex,
    target: VertexId,
    k: u32,
    cap: usize,
    stored: usize,
    expansions: u64,
    next_poll: u64,
}

impl<'a> Walker<'a> {
    /// Appends every budgeted sequence of `out.arity()` vertices starting at
    /// `start`, which sits at position `offset` of a full result. Returns
    /// false if the sink asked to stop.
    fn collect<S: PathSink>(
        &mut self,
        start: VertexId,
        offset: u32,
        out: &mut TupleSet,
        sink: &mut S,
    ) -> Result<bool, EnumerateError> {
        let arity = out.arity;
        let mut seq = Vec::with_capacity(arity);
        seq.push(start);
        if arity == 1 {
            return self.store(&seq, out).map(|_| true);
        }
        let mut frames: Vec<&'a [VertexId]> = Vec::with_capacity(arity);
        frames.push(self.candidates(start, offset, 0));
        while let Some(frame) = frames.last_mut() {
            let Some((&w, rest)) = frame.split_first() else {
                frames.pop();
                seq.pop();
                continue;
            };
            *frame = rest;
            self.expansions += 1;
            seq.push(w);
            if seq.len() == arity {
                self.store(&seq, out)?;
                seq.pop();
            } else {
                let len = (seq.len() - 1) as u32;
                frames.push(self.candidates(w, offset, len));
            }
            if self.expansions >= self.next_poll {
                self.next_poll += POLL_INTERVAL;
                if sink.poll() == Flow::Stop {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn candidates(&self, v: VertexId, offset: u32, len: u32) -> &'a [VertexId] {
        // t only carries its padding entry. Any other v has v.t >= 1, which
        // keeps the budget non-negative.
        let budget = if v == self.target { 0 } else { self.k - offset - len - 1 };
        self.idx.lookup_forward(v, budget)
    }

    fn store(&mut self, seq: &[VertexId], out: &mut TupleSet) -> Result<(), EnumerateError> {
        self.stored += 1;
        if self.stored > self.cap {
            return Err(EnumerateError::TupleCapExceeded {
                tuples: self.stored,
                cap: self.cap,
            });
        }
        out.data.extend_from_slice(seq);
        Ok(())
    }
}

/// Join plan cut at position `cut` (`1..k`): materializes both sides, then
/// hash-joins them on the cut vertex and streams every joined row that is a
/// simple path once truncated at its first `t`.
///
/// The sink can stop the probe phase; materialization only honors `poll`.
pub fn join_enumerate<S: PathSink>(
    idx: &LightweightIndex,
    cut: u32,
    sink: &mut S,
) -> Result<SearchStats, EnumerateError> {
    join_enumerate_capped(idx, cut, None, sink)
}

/// [`join_enumerate`] with a limit on the total number of materialized tuples.
pub fn join_enumerate_capped<S: PathSink>(
    idx: &LightweightIndex,
    cut: u32,
    max_tuples: Option<usize>,
    sink: &mut S,
) -> Result<SearchStats, EnumerateError> {
    let mut stats = SearchStats::default();
    let Some(sides) = materialize(idx, cut, max_tuples, sink)? else {
        stats.stopped = true;
        return Ok(stats);
    };
    stats.expansions = sides.expansions;
    let t = sides.target;
    let mut on_path = vec![false; idx.vertex_count()];
    let mut path: Vec<VertexId> = Vec::with_capacity(idx.query().k() + 1);

    'prefixes: for a in sides.prefix.iter() {
        // Mark the prefix up to its first t; a repeat rejects every row it joins into.
        path.clear();
        let mut reached_target = false;
        for &v in a {
            if on_path[v as usize] {
                clear(&mut on_path, &path);
                continue 'prefixes;
            }
            on_path[v as usize] = true;
            path.push(v);
            if v == t {
                reached_target = true;
                break;
            }
        }
        let base = path.len();
        for b in sides.suffixes_from(*a.last().unwrap()) {
            let mut valid = reached_target;
            if !reached_target {
                for &v in &b[1..] {
                    if on_path[v as usize] {
                        break;
                    }
                    on_path[v as usize] = true;
                    path.push(v);
                    if v == t {
                        valid = true;
                        break;
                    }
                }
            }
            if valid {
                stats.emitted += 1;
                if sink.emit(&path) == Flow::Stop {
                    stats.stopped = true;
                    clear(&mut on_path, &path);
                    break 'prefixes;
                }
            }
            clear(&mut on_path, &path[base..]);
            path.truncate(base);
        }
        clear(&mut on_path, &path);
    }
    Ok(stats)
}

fn clear(flags: &mut [bool], vs: &[VertexId]) {
    for &v in vs {
        flags[v as usize] = false;
    }
}
