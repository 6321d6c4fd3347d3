//! Per-query light-weight index.
//!
//! For a query `q(s, t, k)` every vertex gets two labels: `v.s`, its distance
//! from `s` in `G - {t}`, and `v.t`, its distance to `t` in `G - {s}`. Only
//! vertices with `v.s + v.t <= k` are indexed. An indexed vertex may appear at
//! position `i` of a result only if it belongs to level `C_i`, i.e.
//! `v.s <= i` and `v.t <= k - i`.
//!
//! Each indexed vertex owns a block of `k + 1` offsets into a shared neighbor
//! array. Its out-neighbors are stored sorted by `.t` (ties by id), so the
//! neighbors within a remaining hop budget `b` form a prefix of the block and
//! are found with two offset reads. A mirrored structure stores in-neighbors
//! sorted by `.s`. The target carries a padding self-entry `t -> t` in both
//! directions so walks that reach `t` early can be extended to a fixed length.
//!
//! Edges into `s` are never indexed: a result's interior must avoid `s`.

use std::fmt::Write as _;

use crate::graph::{bfs_distances_bounded, Direction, EdgeId, Graph, VertexId, UNREACHABLE};
use crate::query::Query;

const NOT_INDEXED: u32 = u32::MAX;

/// Edge id recorded for the `t -> t` padding entry.
pub const PADDING_EDGE: EdgeId = EdgeId::MAX;

#[derive(Debug, Clone)]
pub struct LightweightIndex {
    query: Query,
    dist_s: Vec<u32>,
    dist_t: Vec<u32>,
    directory: Vec<u32>,
    vertices: Vec<VertexId>,
    levels: Vec<Vec<VertexId>>,
    fwd: Adjacency,
    bwd: Adjacency,
    level_stats: Vec<f64>,
}

/// Bucketed neighbor lists, one block of `k + 1` offsets per indexed vertex:
/// slot 0 is the block start, slot `b + 1` the end of entries with key `<= b`.
#[derive(Debug, Clone, Default)]
struct Adjacency {
    offsets: Vec<u32>,
    neighbors: Vec<VertexId>,
    edges: Vec<EdgeId>,
}

impl Adjacency {
    #[inline]
    fn range(&self, local: usize, stride: usize, budget: usize) -> std::ops::Range<usize> {
        let base = local * stride;
        self.offsets[base] as usize..self.offsets[base + budget + 1] as usize
    }
}

impl LightweightIndex {
    pub fn build(g: &Graph, q: &Query) -> Self {
        Self::build_filtered(g, q, |_| true)
    }

    /// Builds the index over the subgraph of edges accepted by `edge_filter`.
    /// The filter applies to both distance computations and indexed edges.
    pub fn build_filtered(g: &Graph, q: &Query, edge_filter: impl Fn(EdgeId) -> bool) -> Self {
        let k = q.k();
        let (s, t) = (q.source, q.target);
        let hop = q.hop_limit;
        let dist_s = bfs_distances_bounded(g, s, Direction::Forward, Some(t), hop, &edge_filter).into_vec();
        let dist_t = bfs_distances_bounded(g, t, Direction::Reverse, Some(s), hop, &edge_filter).into_vec();

        let mut directory = vec![NOT_INDEXED; g.vertex_count()];
        let mut vertices = Vec::new();
        for v in 0..g.vertex_count() {
            let (a, b) = (dist_s[v], dist_t[v]);
            if a != UNREACHABLE && b != UNREACHABLE && a + b <= hop {
                directory[v] = vertices.len() as u32;
                vertices.push(v as VertexId);
            }
        }

        let stride = k + 1;
        let mut fwd = Adjacency {
            offsets: vec![0; vertices.len() * stride],
            ..Default::default()
        };
        let mut scratch: Vec<(VertexId, EdgeId, u32)> = Vec::new();
        let mut bucket_sizes = vec![0u32; k];
        for (local, &v) in vertices.iter().enumerate() {
            scratch.clear();
            if v == t {
                scratch.push((t, PADDING_EDGE, 0));
            } else {
                let budget = hop - 1 - dist_s[v as usize];
                for (w, eid) in g.out_edges(v) {
                    let dt = dist_t[w as usize];
                    if w != s && dt <= budget && edge_filter(eid) {
                        scratch.push((w, eid, dt));
                    }
                }
            }
            counting_sort_into(&mut fwd, local * stride, &scratch, &mut bucket_sizes);
        }

        // Mirror: walk forward entries in source order so each in-list bucket
        // stays sorted by source id.
        let mut bwd = Adjacency {
            offsets: vec![0; vertices.len() * stride],
            neighbors: vec![0; fwd.neighbors.len()],
            edges: vec![0; fwd.neighbors.len()],
        };
        let bwd_key = |src: VertexId, dst: VertexId| if src == t && dst == t { 0 } else { dist_s[src as usize] };
        let mut counts = vec![0u32; vertices.len() * k];
        for (local, &v) in vertices.iter().enumerate() {
            for &w in &fwd.neighbors[fwd.range(local, stride, k - 1)] {
                counts[directory[w as usize] as usize * k + bwd_key(v, w) as usize] += 1;
            }
        }
        let mut cursor = 0u32;
        for local in 0..vertices.len() {
            let base = local * stride;
            bwd.offsets[base] = cursor;
            for b in 0..k {
                cursor += counts[local * k + b];
                bwd.offsets[base + b + 1] = cursor;
            }
        }
        let mut write: Vec<u32> = (0..vertices.len() * k)
            .map(|i| bwd.offsets[(i / k) * stride + i % k])
            .collect();
        for (local, &v) in vertices.iter().enumerate() {
            let range = fwd.range(local, stride, k - 1);
            for (&w, &eid) in fwd.neighbors[range.clone()].iter().zip(&fwd.edges[range]) {
                let slot = &mut write[directory[w as usize] as usize * k + bwd_key(v, w) as usize];
                bwd.neighbors[*slot as usize] = v;
                bwd.edges[*slot as usize] = eid;
                *slot += 1;
            }
        }

        let mut levels = vec![Vec::new(); k + 1];
        for &v in &vertices {
            let lo = dist_s[v as usize] as usize;
            let hi = k - dist_t[v as usize] as usize;
            for level in &mut levels[lo..=hi] {
                level.push(v);
            }
        }

        let mut index = Self {
            query: *q,
            dist_s,
            dist_t,
            directory,
            vertices,
            levels,
            fwd,
            bwd,
            level_stats: Vec::new(),
        };
        index.level_stats = (0..k)
            .map(|j| {
                let level = &index.levels[j];
                if level.is_empty() {
                    return 0.0;
                }
                let total: usize = level
                    .iter()
                    .map(|&v| index.lookup_forward(v, (k - j - 1) as u32).len())
                    .sum();
                total as f64 / level.len() as f64
            })
            .collect();
        index
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn hop_limit(&self) -> u32 {
        self.query.hop_limit
    }

    /// Vertex count of the graph the index was built on.
    pub fn vertex_count(&self) -> usize {
        self.directory.len()
    }

    #[inline]
    fn stride(&self) -> usize {
        self.query.k() + 1
    }

    /// Distance from the source avoiding the target, or [`UNREACHABLE`].
    /// Distances beyond `k` are reported as unreachable.
    pub fn dist_from_source(&self, v: VertexId) -> u32 {
        self.dist_s[v as usize]
    }

    /// Distance to the target avoiding the source, or [`UNREACHABLE`].
    pub fn dist_to_target(&self, v: VertexId) -> u32 {
        self.dist_t[v as usize]
    }

    pub fn is_indexed(&self, v: VertexId) -> bool {
        self.directory[v as usize] != NOT_INDEXED
    }

    /// Dense position of an indexed vertex among all indexed vertices.
    #[inline]
    pub fn local_id(&self, v: VertexId) -> Option<usize> {
        match self.directory[v as usize] {
            NOT_INDEXED => None,
            local => Some(local as usize),
        }
    }

    /// Indexed vertices in ascending id order; position equals [`Self::local_id`].
    pub fn indexed_vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// `C_i`: vertices that may appear at position `i` of a result, ascending.
    ///
    /// # Panics
    /// If `i > k`.
    pub fn lookup_level(&self, i: u32) -> &[VertexId] {
        &self.levels[i as usize]
    }

    /// Out-neighbors `v'` of `v` with `v'.t <= budget`, in ascending `.t`.
    /// Empty when `v` is not indexed.
    #[inline]
    pub fn lookup_forward(&self, v: VertexId, budget: u32) -> &[VertexId] {
        match self.forward_range(v, budget) {
            Some(r) => &self.fwd.neighbors[r],
            None => &[],
        }
    }

    /// Like [`Self::lookup_forward`], paired with the graph edge ids of the
    /// returned entries ([`PADDING_EDGE`] for `t -> t`).
    #[inline]
    pub fn lookup_forward_edges(&self, v: VertexId, budget: u32) -> (&[VertexId], &[EdgeId]) {
        match self.forward_range(v, budget) {
            Some(r) => (&self.fwd.neighbors[r.clone()], &self.fwd.edges[r]),
            None => (&[], &[]),
        }
    }

    #[inline]
    pub(crate) fn forward_range(&self, v: VertexId, budget: u32) -> Option<std::ops::Range<usize>> {
        let local = self.local_id(v)?;
        let k = self.query.k();
        Some(self.fwd.range(local, k + 1, (budget as usize).min(k - 1)))
    }

    #[inline]
    pub(crate) fn forward_neighbors_raw(&self) -> &[VertexId] {
        &self.fwd.neighbors
    }

    /// In-neighbors `v'` of `v` with `v'.s <= budget`, in ascending `.s`. The
    /// target's padding in-entry `t` is always included for `v = t`.
    #[inline]
    pub fn lookup_backward(&self, v: VertexId, budget: u32) -> &[VertexId] {
        let Some(local) = self.local_id(v) else {
            return &[];
        };
        let k = self.query.k();
        &self.bwd.neighbors[self.bwd.range(local, k + 1, (budget as usize).min(k - 1))]
    }

    /// Average forward fan-out per level, `γ̂_j` for `j` in `0..k`: the mean
    /// of `|lookup_forward(v, k - j - 1)|` over `v` in `C_j` (0 if empty).
    pub fn level_stats(&self) -> &[f64] {
        &self.level_stats
    }

    /// Number of forward entries, padding included.
    pub fn edge_count(&self) -> usize {
        self.fwd.neighbors.len()
    }

    /// Approximate heap footprint in bytes.
    pub fn memory_bytes(&self) -> usize {
        use std::mem::size_of;
        let per_graph_vertex = 3 * size_of::<u32>() * self.dist_s.len();
        let levels: usize = self.levels.iter().map(|l| l.len() * size_of::<VertexId>()).sum();
        let adjacency = |a: &Adjacency| (a.offsets.len() + a.neighbors.len() + a.edges.len()) * size_of::<u32>();
        per_graph_vertex + levels + adjacency(&self.fwd) + adjacency(&self.bwd)
    }

    /// Text dump for golden tests: a header line, then one line per indexed
    /// vertex with tab-separated id, `.s`, `.t` and its forward buckets
    /// `0..k`, buckets separated by `|`, entries by `,`. Ids are external.
    pub fn dump(&self, g: &Graph) -> String {
        let k = self.query.k();
        let stride = self.stride();
        let ext = |v: VertexId| g.external_id(v);
        let mut out = format!(
            "# source={} target={} k={}\n",
            ext(self.query.source),
            ext(self.query.target),
            k
        );
        for (local, &v) in self.vertices.iter().enumerate() {
            let _ = write!(
                out,
                "{}\t{}\t{}\t",
                ext(v),
                self.dist_s[v as usize],
                self.dist_t[v as usize]
            );
            let base = local * stride;
            let buckets: Vec<String> = (0..k)
                .map(|b| {
                    let r = self.fwd.offsets[base + b] as usize..self.fwd.offsets[base + b + 1] as usize;
                    self.fwd.neighbors[r]
                        .iter()
                        .map(|&w| ext(w).to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            out.push_str(&buckets.join("|"));
            out.push('\n');
        }
        out
    }
}

// Appends `entries` (neighbor, edge, key) as one bucketed block starting at
// offset slot `base`. Stable, so equal keys keep their input order.
fn counting_sort_into(adj: &mut Adjacency, base: usize, entries: &[(VertexId, EdgeId, u32)], sizes: &mut [u32]) {
    sizes.fill(0);
    for &(_, _, key) in entries {
        sizes[key as usize] += 1;
    }
    let start = adj.neighbors.len() as u32;
    adj.offsets[base] = start;
    let mut running = start;
    for (b, size) in sizes.iter_mut().enumerate() {
        let bucket_start = running;
        running += *size;
        adj.offsets[base + b + 1] = running;
        *size = bucket_start;
    }
    adj.neighbors.resize(running as usize, 0);
    adj.edges.resize(running as usize, 0);
    for &(w, eid, key) in entries {
        let slot = &mut sizes[key as usize];
        adj.neighbors[*slot as usize] = w;
        adj.edges[*slot as usize] = eid;
        *slot += 1;
    }
}
