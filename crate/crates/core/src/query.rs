use crate::error::QueryError;
use crate::graph::{Graph, VertexId};

/// A vertex sequence. Results are paths from the query source to its target.
pub type Path = Vec<VertexId>;

/// A hop-constrained s-t query `q(s, t, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Query {
    pub source: VertexId,
    pub target: VertexId,
    pub hop_limit: u32,
}

impl Query {
    pub fn new(source: VertexId, target: VertexId, hop_limit: u32) -> Result<Self, QueryError> {
        if source == target {
            return Err(QueryError::SameEndpoints(source));
        }
        if hop_limit < 2 {
            return Err(QueryError::HopLimitTooSmall(hop_limit));
        }
        Ok(Self {
            source,
            target,
            hop_limit,
        })
    }

    /// Like [`Query::new`], also checking both endpoints exist in `g`.
    pub fn on_graph(g: &Graph, source: VertexId, target: VertexId, hop_limit: u32) -> Result<Self, QueryError> {
        for vertex in [source, target] {
            if vertex as usize >= g.vertex_count() {
                return Err(QueryError::VertexOutOfRange {
                    vertex,
                    vertex_count: g.vertex_count(),
                });
            }
        }
        Self::new(source, target, hop_limit)
    }

    pub(crate) fn k(&self) -> usize {
        self.hop_limit as usize
    }
}

/// Sorts and deduplicates a result list so sets can be compared directly.
pub fn canonicalize(mut paths: Vec<Path>) -> Vec<Path> {
    paths.sort_unstable();
    paths.dedup();
    paths
}

/// Checks the shape every result must have: starts at `q.source`, ends at
/// `q.target`, at most `q.hop_limit` edges, consecutive vertices joined by
/// edges of `g`, and no repeated vertex.
pub fn is_valid_path(g: &Graph, q: &Query, path: &[VertexId]) -> bool {
    if path.len() < 2 || path.len() > q.k() + 1 {
        return false;
    }
    if path[0] != q.source || path[path.len() - 1] != q.target {
        return false;
    }
    if !path.windows(2).all(|w| g.has_edge(w[0], w[1])) {
        return false;
    }
    let mut sorted = path.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}
