use super::{EdgeId, Graph, VertexId};

/// Distance sentinel for vertices the search never labeled.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Follow out-edges: distances from the origin.
    Forward,
    /// Follow in-edges: distances to the origin.
    Reverse,
}

/// Hop distances from (or to) one origin vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    dist: Vec<u32>,
    origin: VertexId,
    excluded: Option<VertexId>,
}

impl DistanceMap {
    #[inline]
    pub fn get(&self, v: VertexId) -> u32 {
        self.dist[v as usize]
    }

    pub fn is_reachable(&self, v: VertexId) -> bool {
        self.get(v) != UNREACHABLE
    }

    pub fn origin(&self) -> VertexId {
        self.origin
    }

    pub fn excluded(&self) -> Option<VertexId> {
        self.excluded
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.dist
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.dist
    }
}

/// Unbounded BFS over every edge. See [`bfs_distances_bounded`].
pub fn bfs_distances(g: &Graph, origin: VertexId, direction: Direction, excluded: Option<VertexId>) -> DistanceMap {
    bfs_distances_bounded(g, origin, direction, excluded, UNREACHABLE - 1, |_| true)
}

/// Level-synchronous BFS from `origin`.
///
/// The `excluded` vertex can receive a distance label but is never expanded,
/// so every finite distance is realized by a walk whose interior avoids it.
/// Vertices farther than `max_depth` stay [`UNREACHABLE`]. Edges for which
/// `edge_filter` returns false are ignored; the filter sees forward edge ids
/// in both directions.
pub fn bfs_distances_bounded(
    g: &Graph,
    origin: VertexId,
    direction: Direction,
    excluded: Option<VertexId>,
    max_depth: u32,
    mut edge_filter: impl FnMut(EdgeId) -> bool,
) -> DistanceMap {
    assert!((origin as usize) < g.vertex_count(), "origin out of range");
    assert_ne!(Some(origin), excluded, "origin cannot be excluded");

    let mut dist = vec![UNREACHABLE; g.vertex_count()];
    dist[origin as usize] = 0;
    let mut frontier = vec![origin];
    let mut next = Vec::new();
    let mut depth = 0;

    while !frontier.is_empty() && depth < max_depth {
        depth += 1;
        for &v in &frontier {
            if Some(v) == excluded {
                continue;
            }
            let mut visit = |w: VertexId, eid: EdgeId| {
                if dist[w as usize] == UNREACHABLE && edge_filter(eid) {
                    dist[w as usize] = depth;
                    next.push(w);
                }
            };
            match direction {
                Direction::Forward => g.out_edges(v).for_each(|(w, e)| visit(w, e)),
                Direction::Reverse => g.in_edges(v).for_each(|(w, e)| visit(w, e)),
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }

    DistanceMap { dist, origin, excluded }
}
