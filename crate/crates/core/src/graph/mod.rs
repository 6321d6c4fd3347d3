//! Immutable directed graph in compressed sparse row form.
//!
//! Vertex ids are dense in `[0, vertex_count)`. Every graph keeps both the
//! forward (out-neighbor) and reverse (in-neighbor) adjacency, each sorted by
//! neighbor id, plus a table mapping dense ids back to the ids found in the
//! input file.

mod bfs;
mod load;
mod snapshot;

use std::collections::HashMap;

pub use bfs::{bfs_distances, bfs_distances_bounded, Direction, DistanceMap, UNREACHABLE};
pub use load::{load_edge_list, load_edge_list_path};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::error::GraphError;

/// Dense internal vertex id.
pub type VertexId = u32;

/// Position of an edge in the forward adjacency array. Stable for the
/// lifetime of a [`Graph`] and used to key per-edge side tables.
pub type EdgeId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    fwd_offsets: Vec<usize>,
    fwd_targets: Vec<VertexId>,
    rev_offsets: Vec<usize>,
    rev_sources: Vec<VertexId>,
    // forward edge id of each reverse entry
    rev_edge_ids: Vec<EdgeId>,
    external_ids: Vec<u64>,
    external_lookup: HashMap<u64, VertexId>,
}

impl Graph {
    /// Builds a graph over dense ids `0..vertex_count`. Self-loops and
    /// duplicate edges are dropped; external ids equal internal ids.
    pub fn from_edges(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Self {
        let external_ids = (0..vertex_count as u64).collect();
        Self::assemble(vertex_count, edges.to_vec(), external_ids)
    }

    pub(crate) fn assemble(vertex_count: usize, mut edges: Vec<(VertexId, VertexId)>, external_ids: Vec<u64>) -> Self {
        assert!(vertex_count <= VertexId::MAX as usize, "vertex count exceeds id range");
        assert_eq!(external_ids.len(), vertex_count);
        edges.retain(|&(u, v)| u != v);
        edges.sort_unstable();
        edges.dedup();
        assert!(edges.len() <= EdgeId::MAX as usize, "edge count exceeds id range");
        for &(u, v) in &edges {
            assert!(
                (u as usize) < vertex_count && (v as usize) < vertex_count,
                "edge ({u}, {v}) out of range for {vertex_count} vertices"
            );
        }

        let mut fwd_offsets = vec![0usize; vertex_count + 1];
        let mut rev_offsets = vec![0usize; vertex_count + 1];
        for &(u, v) in &edges {
            fwd_offsets[u as usize + 1] += 1;
            rev_offsets[v as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            fwd_offsets[i + 1] += fwd_offsets[i];
            rev_offsets[i + 1] += rev_offsets[i];
        }
        let fwd_targets: Vec<VertexId> = edges.iter().map(|&(_, v)| v).collect();

        // Edges are sorted by (source, target), so filling the reverse side in
        // edge order leaves each in-list sorted by source.
        let mut cursor = rev_offsets.clone();
        let mut rev_sources = vec![0; edges.len()];
        let mut rev_edge_ids = vec![0; edges.len()];
        for (eid, &(u, v)) in edges.iter().enumerate() {
            let slot = &mut cursor[v as usize];
            rev_sources[*slot] = u;
            rev_edge_ids[*slot] = eid as EdgeId;
            *slot += 1;
        }

        let external_lookup = external_ids
            .iter()
            .enumerate()
            .map(|(i, &ext)| (ext, i as VertexId))
            .collect();

        Self {
            fwd_offsets,
            fwd_targets,
            rev_offsets,
            rev_sources,
            rev_edge_ids,
            external_ids,
            external_lookup,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.fwd_targets.len()
    }

    /// Out-neighbors of `v`, ascending.
    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.fwd_targets[self.fwd_offsets[v]..self.fwd_offsets[v + 1]]
    }

    /// In-neighbors of `v`, ascending.
    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.rev_sources[self.rev_offsets[v]..self.rev_offsets[v + 1]]
    }

    /// Out-neighbors of `v` paired with the id of the connecting edge.
    #[inline]
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        let v = v as usize;
        let range = self.fwd_offsets[v]..self.fwd_offsets[v + 1];
        self.fwd_targets[range.clone()]
            .iter()
            .zip(range)
            .map(|(&w, eid)| (w, eid as EdgeId))
    }

    /// In-neighbors of `v` paired with the id of the connecting forward edge.
    #[inline]
    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        let v = v as usize;
        let range = self.rev_offsets[v]..self.rev_offsets[v + 1];
        self.rev_sources[range.clone()]
            .iter()
            .copied()
            .zip(self.rev_edge_ids[range].iter().copied())
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.fwd_offsets[v as usize + 1] - self.fwd_offsets[v as usize]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.rev_offsets[v as usize + 1] - self.rev_offsets[v as usize]
    }

    /// Id of the edge `u -> v`, if present.
    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let start = self.fwd_offsets[u as usize];
        self.out_neighbors(u)
            .binary_search(&v)
            .ok()
            .map(|pos| (start + pos) as EdgeId)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Endpoints of an edge by id.
    pub fn edge_endpoints(&self, eid: EdgeId) -> (VertexId, VertexId) {
        let eid = eid as usize;
        let src = self.fwd_offsets.partition_point(|&off| off <= eid) - 1;
        (src as VertexId, self.fwd_targets[eid])
    }

    /// All edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// The same vertex set with every edge reversed.
    pub fn reversed(&self) -> Graph {
        let edges = self.edges().map(|(u, v)| (v, u)).collect();
        Self::assemble(self.vertex_count(), edges, self.external_ids.clone())
    }

    /// The same vertex set and external ids with only the edges `keep` accepts.
    pub fn retain_edges(&self, mut keep: impl FnMut(VertexId, VertexId) -> bool) -> Graph {
        let edges = self.edges().filter(|&(u, v)| keep(u, v)).collect();
        Self::assemble(self.vertex_count(), edges, self.external_ids.clone())
    }

    /// A new graph with `extra` appended to the edge set. Dense ids are kept.
    pub fn with_appended_edges(&self, extra: &[(VertexId, VertexId)]) -> Graph {
        let mut edges: Vec<_> = self.edges().collect();
        edges.extend_from_slice(extra);
        Self::assemble(self.vertex_count(), edges, self.external_ids.clone())
    }

    pub fn external_id(&self, v: VertexId) -> u64 {
        self.external_ids[v as usize]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    /// Dense id for an id as it appeared in the input.
    pub fn internal_id(&self, external: u64) -> Option<VertexId> {
        self.external_lookup.get(&external).copied()
    }

    pub fn resolve(&self, external: u64) -> Result<VertexId, GraphError> {
        self.internal_id(external).ok_or(GraphError::UnknownVertex(external))
    }

    pub(crate) fn forward_csr(&self) -> (&[usize], &[VertexId]) {
        (&self.fwd_offsets, &self.fwd_targets)
    }
}
