use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::CapExceeded;
use crate::graph::{Graph, VertexId};
use crate::query::{Path, Query};

/// One binary relation `R_i(u_{i-1}, u_i)` of the chain join whose results
/// are the length-k, target-padded walks from `s` to `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    /// 1-based position in the chain.
    pub level: u32,
    pub tuples: BTreeSet<(VertexId, VertexId)>,
}

impl Relation {
    /// Values of `u_i` for tuples whose `u_{i-1}` is `head`.
    pub fn tails_of(&self, head: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.tuples
            .range((head, VertexId::MIN)..=(head, VertexId::MAX))
            .map(|&(_, v)| v)
    }

    pub fn heads(&self) -> BTreeSet<VertexId> {
        self.tuples.iter().map(|&(v, _)| v).collect()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Builds `R_1..R_k` and removes dangling tuples with one forward and one
/// backward semi-join sweep.
///
/// * `R_1` holds every out-edge of `s`.
/// * `R_k` holds every edge into `t` not leaving `s`, plus `(t, t)`.
/// * Middle relations hold every edge of `G - {s}` not leaving `t`, plus `(t, t)`.
pub fn build_relations(g: &Graph, q: &Query) -> Vec<Relation> {
    let (s, t, k) = (q.source, q.target, q.hop_limit);
    let mut relations: Vec<Relation> = (1..=k)
        .map(|level| {
            let tuples = if level == 1 {
                g.out_neighbors(s).iter().map(|&v| (s, v)).collect()
            } else if level == k {
                let mut r: BTreeSet<_> = g.in_neighbors(t).iter().filter(|&&v| v != s).map(|&v| (v, t)).collect();
                r.insert((t, t));
                r
            } else {
                let mut r: BTreeSet<_> = g.edges().filter(|&(u, v)| u != s && v != s && u != t).collect();
                r.insert((t, t));
                r
            };
            Relation { level, tuples }
        })
        .collect();

    let k = k as usize;
    for i in 0..k - 1 {
        let tails: HashSet<VertexId> = relations[i].tuples.iter().map(|&(_, v)| v).collect();
        relations[i + 1].tuples.retain(|(v, _)| tails.contains(v));
    }
    for i in (0..k - 1).rev() {
        let heads: HashSet<VertexId> = relations[i + 1].tuples.iter().map(|&(v, _)| v).collect();
        relations[i].tuples.retain(|(_, v)| heads.contains(v));
    }
    relations
}

/// Evaluates `R_1 ⋈ R_2 ⋈ ... ⋈ R_k` left to right. Each result row has
/// `k + 1` vertices. Fails if any intermediate result exceeds `cap` rows.
pub fn evaluate_chain_join(relations: &[Relation], cap: usize) -> Result<Vec<Vec<VertexId>>, CapExceeded> {
    let Some(first) = relations.first() else {
        return Ok(Vec::new());
    };
    let mut rows: Vec<Vec<VertexId>> = first.tuples.iter().map(|&(u, v)| vec![u, v]).collect();
    if rows.len() > cap {
        return Err(CapExceeded { cap });
    }
    for rel in &relations[1..] {
        let mut by_head: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for &(u, v) in &rel.tuples {
            by_head.entry(u).or_default().push(v);
        }
        let mut next = Vec::new();
        for row in &rows {
            let last = *row.last().unwrap();
            for &v in by_head.get(&last).map(Vec::as_slice).unwrap_or(&[]) {
                if next.len() == cap {
                    return Err(CapExceeded { cap });
                }
                let mut extended = row.clone();
                extended.push(v);
                next.push(extended);
            }
        }
        rows = next;
    }
    Ok(rows)
}

/// Evaluates the chain join, cuts each row at its first `t`, and keeps the
/// rows whose prefix repeats no vertex. The result is the set of simple
/// s-t paths with at most `k` edges.
pub fn eliminate_and_collect(relations: &[Relation], target: VertexId, cap: usize) -> Result<Vec<Path>, CapExceeded> {
    let rows = evaluate_chain_join(relations, cap)?;
    let mut paths = Vec::new();
    for row in rows {
        let Some(end) = row.iter().position(|&v| v == target) else {
            continue;
        };
        let prefix = &row[..=end];
        let mut seen = HashSet::with_capacity(prefix.len());
        if prefix.iter().all(|v| seen.insert(*v)) {
            paths.push(prefix.to_vec());
        }
    }
    Ok(crate::query::canonicalize(paths))
}
