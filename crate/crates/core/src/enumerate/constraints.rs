use std::sync::Arc;

use super::dfs::POLL_INTERVAL;
use crate::error::{EnumerateError, GraphError};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::index::{LightweightIndex, PADDING_EDGE};
use crate::query::Query;
use crate::sink::{Flow, PathSink, SearchStats};

/// Per-edge data consulted by constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub weight: f64,
    pub label: u32,
}

/// Side table of edge records aligned with the graph's edge ids.
#[derive(Debug, Clone, Default)]
pub struct EdgeAttributes {
    records: Vec<Option<EdgeRecord>>,
}

impl EdgeAttributes {
    /// A table with no records.
    pub fn empty(g: &Graph) -> Self {
        Self {
            records: vec![None; g.edge_count()],
        }
    }

    /// The same record on every edge.
    pub fn uniform(g: &Graph, record: EdgeRecord) -> Self {
        Self {
            records: vec![Some(record); g.edge_count()],
        }
    }

    /// Builds a table from `f(u, v)` over internal endpoints; `None` leaves
    /// the edge without a record.
    pub fn from_fn(g: &Graph, mut f: impl FnMut(VertexId, VertexId) -> Option<EdgeRecord>) -> Self {
        Self {
            records: g.edges().map(|(u, v)| f(u, v)).collect(),
        }
    }

    /// Builds a table from records keyed by external vertex ids.
    pub fn from_external(
        g: &Graph,
        entries: impl IntoIterator<Item = (u64, u64, EdgeRecord)>,
    ) -> Result<Self, GraphError> {
        let mut attrs = Self::empty(g);
        for (u, v, rec) in entries {
            let (iu, iv) = (g.resolve(u)?, g.resolve(v)?);
            let eid = g.edge_id(iu, iv).ok_or(GraphError::UnknownEdge(u, v))?;
            attrs.records[eid as usize] = Some(rec);
        }
        Ok(attrs)
    }

    pub fn set(&mut self, edge: EdgeId, record: EdgeRecord) {
        self.records[edge as usize] = Some(record);
    }

    pub fn get(&self, edge: EdgeId) -> Option<&EdgeRecord> {
        self.records.get(edge as usize).and_then(Option::as_ref)
    }
}

pub type EdgePredicate = Arc<dyn Fn(&EdgeRecord) -> bool + Send + Sync>;
pub type WeightTest = Arc<dyn Fn(f64) -> bool + Send + Sync>;

/// Binary operator folding edge weights along a path.
#[derive(Clone)]
pub enum AccumulateOp {
    Sum,
    Product,
    Min,
    Max,
    Custom {
        identity: f64,
        combine: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl AccumulateOp {
    pub fn identity(&self) -> f64 {
        match self {
            Self::Sum => 0.0,
            Self::Product => 1.0,
            Self::Min => f64::INFINITY,
            Self::Max => f64::NEG_INFINITY,
            Self::Custom { identity, .. } => *identity,
        }
    }

    pub fn apply(&self, acc: f64, weight: f64) -> f64 {
        match self {
            Self::Sum => acc + weight,
            Self::Product => acc * weight,
            Self::Min => acc.min(weight),
            Self::Max => acc.max(weight),
            Self::Custom { combine, .. } => combine(acc, weight),
        }
    }
}

/// Aggregate constraint: the fold of the path's edge weights under `op` must
/// satisfy `accept`.
///
/// `viable`, when set, is checked on every prefix and must be monotone: once
/// it fails for a prefix it fails for every extension. The search prunes on it.
#[derive(Clone)]
pub struct Accumulator {
    pub op: AccumulateOp,
    pub accept: WeightTest,
    pub viable: Option<WeightTest>,
}

impl Accumulator {
    pub fn new(op: AccumulateOp, accept: impl Fn(f64) -> bool + Send + Sync + 'static) -> Self {
        Self {
            op,
            accept: Arc::new(accept),
            viable: None,
        }
    }

    pub fn with_viable(mut self, viable: impl Fn(f64) -> bool + Send + Sync + 'static) -> Self {
        self.viable = Some(Arc::new(viable));
        self
    }

    /// Sum of weights at most `limit`, pruned as soon as a prefix exceeds it.
    /// Only sound for non-negative weights.
    pub fn sum_at_most(limit: f64) -> Self {
        Self::new(AccumulateOp::Sum, move |x| x <= limit).with_viable(move |x| x <= limit)
    }
}

/// Deterministic automaton over edge labels `0..label_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    label_count: u32,
    start: u32,
    accepting: Vec<bool>,
    transitions: Vec<Option<u32>>,
}

impl Automaton {
    pub fn new(state_count: u32, label_count: u32, start: u32, accepting: &[u32]) -> Self {
        let mut acc = vec![false; state_count as usize];
        for &a in accepting {
            acc[a as usize] = true;
        }
        Self {
            label_count,
            start,
            accepting: acc,
            transitions: vec![None; (state_count * label_count) as usize],
        }
    }

    /// Accepts exactly the given label sequence.
    pub fn sequence(labels: &[u32], label_count: u32) -> Self {
        let n = labels.len() as u32;
        let mut a = Self::new(n + 1, label_count, 0, &[n]);
        for (i, &l) in labels.iter().enumerate() {
            a.add_transition(i as u32, l, i as u32 + 1);
        }
        a
    }

    pub fn add_transition(&mut self, from: u32, label: u32, to: u32) {
        self.transitions[(from * self.label_count + label) as usize] = Some(to);
    }

    pub fn label_count(&self) -> u32 {
        self.label_count
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn next(&self, state: u32, label: u32) -> Option<u32> {
        if label >= self.label_count {
            return None;
        }
        self.transitions[(state * self.label_count + label) as usize]
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }
}

/// Constraints applied on top of the hop limit. Any subset may be set.
#[derive(Clone)]
pub struct ConstraintBundle {
    pub attributes: EdgeAttributes,
    /// Edges failing the predicate are removed before the index is built.
    pub predicate: Option<EdgePredicate>,
    pub accumulator: Option<Accumulator>,
    pub automaton: Option<Automaton>,
}

impl ConstraintBundle {
    pub fn new(attributes: EdgeAttributes) -> Self {
        Self {
            attributes,
            predicate: None,
            accumulator: None,
            automaton: None,
        }
    }

    pub fn with_predicate(mut self, p: impl Fn(&EdgeRecord) -> bool + Send + Sync + 'static) -> Self {
        self.predicate = Some(Arc::new(p));
        self
    }

    pub fn with_accumulator(mut self, a: Accumulator) -> Self {
        self.accumulator = Some(a);
        self
    }

    pub fn with_automaton(mut self, a: Automaton) -> Self {
        self.automaton = Some(a);
        self
    }

    fn needs_records(&self) -> bool {
        self.predicate.is_some() || self.accumulator.is_some() || self.automaton.is_some()
    }

    /// Edge filter used while building the index. Edges without a record pass
    /// here and are reported by [`constrained_dfs_enumerate`] if they end up
    /// in the index.
    pub fn edge_passes(&self, edge: EdgeId) -> bool {
        match (&self.predicate, self.attributes.get(edge)) {
            (Some(p), Some(rec)) => p(rec),
            _ => true,
        }
    }

    /// Index over the edges that satisfy the predicate.
    pub fn build_index(&self, g: &Graph, q: &Query) -> LightweightIndex {
        LightweightIndex::build_filtered(g, q, |e| self.edge_passes(e))
    }

    /// Checks a finished path directly against every constraint. Intended as
    /// a post-filter over unconstrained results.
    pub fn admits(&self, g: &Graph, path: &[VertexId]) -> Result<bool, EnumerateError> {
        if !self.needs_records() {
            return Ok(true);
        }
        let mut acc = self.accumulator.as_ref().map(|a| a.op.identity());
        let mut state = self.automaton.as_ref().map(Automaton::start);
        for pair in path.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            let rec = g
                .edge_id(u, v)
                .and_then(|e| self.attributes.get(e))
                .ok_or(EnumerateError::MissingAttribute { src: u, dst: v })?;
            if self.predicate.as_ref().is_some_and(|p| !p(rec)) {
                return Ok(false);
            }
            if let (Some(a), Some(x)) = (&self.accumulator, acc.as_mut()) {
                *x = a.op.apply(*x, rec.weight);
            }
            if let (Some(m), Some(s)) = (&self.automaton, state) {
                match m.next(s, rec.label) {
                    Some(next) => state = Some(next),
                    None => return Ok(false),
                }
            }
        }
        let acc_ok = match (&self.accumulator, acc) {
            (Some(a), Some(x)) => (a.accept)(x),
            _ => true,
        };
        let state_ok = match (&self.automaton, state) {
            (Some(m), Some(s)) => m.is_accepting(s),
            _ => true,
        };
        Ok(acc_ok && state_ok)
    }

    /// Fails if an edge reachable through the index lacks a record, or
    /// carries a label the automaton does not know.
    fn check_index(&self, idx: &LightweightIndex) -> Result<(), EnumerateError> {
        if !self.needs_records() {
            return Ok(());
        }
        let budget = idx.hop_limit() - 1;
        for &v in idx.indexed_vertices() {
            let (ws, es) = idx.lookup_forward_edges(v, budget);
            for (&w, &e) in ws.iter().zip(es) {
                if e == PADDING_EDGE {
                    continue;
                }
                let rec = self
                    .attributes
                    .get(e)
                    .ok_or(EnumerateError::MissingAttribute { src: v, dst: w })?;
                if let Some(m) = &self.automaton {
                    if rec.label >= m.label_count {
                        return Err(EnumerateError::LabelOutOfRange {
                            src: v,
                            dst: w,
                            label: rec.label,
                            label_count: m.label_count,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Index DFS that also enforces the bundle's predicate, accumulator and
/// automaton. The index should come from [`ConstraintBundle::build_index`] so
/// that distance pruning reflects the filtered graph; the predicate is
/// re-checked during the search either way.
pub fn constrained_dfs_enumerate<S: PathSink>(
    idx: &LightweightIndex,
    bundle: &ConstraintBundle,
    sink: &mut S,
) -> Result<SearchStats, EnumerateError> {
    bundle.check_index(idx)?;
    let q = *idx.query();
    let mut search = Search {
        idx,
        bundle,
        target: q.target,
        k: q.hop_limit as usize,
        path: vec![q.source],
        on_path: vec![false; idx.vertex_count()],
        stats: SearchStats::default(),
        next_poll: POLL_INTERVAL,
        sink,
    };
    if !idx.is_indexed(q.source) {
        return Ok(search.stats);
    }
    search.on_path[q.source as usize] = true;
    let acc = bundle.accumulator.as_ref().map_or(0.0, |a| a.op.identity());
    let state = bundle.automaton.as_ref().map_or(0, Automaton::start);
    search.extend(q.source, acc, state);
    Ok(search.stats)
}

struct Search<'a, S> {
    idx: &'a LightweightIndex,
    bundle: &'a ConstraintBundle,
    target: VertexId,
    k: usize,
    path: Vec<VertexId>,
    on_path: Vec<bool>,
    stats: SearchStats,
    next_poll: u64,
    sink: &'a mut S,
}

impl<S: PathSink> Search<'_, S> {
    // Returns false once the search must stop.
    fn extend(&mut self, v: VertexId, acc: f64, state: u32) -> bool {
        let budget = (self.k - self.path.len()) as u32;
        let (ws, es) = self.idx.lookup_forward_edges(v, budget);
        let bundle = self.bundle;
        for (&w, &e) in ws.iter().zip(es) {
            if self.on_path[w as usize] {
                continue;
            }
            let (mut next_acc, mut next_state) = (acc, state);
            if bundle.needs_records() {
                // Presence was checked against the index up front.
                let rec = bundle.attributes.get(e).expect("indexed edge has a record");
                if bundle.predicate.as_ref().is_some_and(|p| !p(rec)) {
                    continue;
                }
                if let Some(a) = &bundle.accumulator {
                    next_acc = a.op.apply(acc, rec.weight);
                    if a.viable.as_ref().is_some_and(|f| !f(next_acc)) {
                        continue;
                    }
                }
                if let Some(m) = &bundle.automaton {
                    match m.next(state, rec.label) {
                        Some(s) => next_state = s,
                        None => continue,
                    }
                }
            }
            self.stats.expansions += 1;

            if w == self.target {
                let accepted = bundle.accumulator.as_ref().is_none_or(|a| (a.accept)(next_acc))
                    && bundle.automaton.as_ref().is_none_or(|m| m.is_accepting(next_state));
                if accepted {
                    self.path.push(w);
                    self.stats.emitted += 1;
                    let flow = self.sink.emit(&self.path);
                    self.path.pop();
                    if flow == Flow::Stop {
                        self.stats.stopped = true;
                        return false;
                    }
                }
            } else {
                self.path.push(w);
                self.on_path[w as usize] = true;
                let keep_going = self.extend(w, next_acc, next_state);
                self.on_path[w as usize] = false;
                self.path.pop();
                if !keep_going {
                    return false;
                }
            }

            if self.stats.expansions >= self.next_poll {
                self.next_poll += POLL_INTERVAL;
                if self.sink.poll() == Flow::Stop {
                    self.stats.stopped = true;
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::naive_enumerate;
    use crate::sink::CollectSink;

    // s=0 a=1 b=2 t=3; weight = 10 * u + v, label = v % 2.
    fn setup() -> (Graph, Query, EdgeAttributes) {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]);
        let attrs = EdgeAttributes::from_fn(&g, |u, v| {
            Some(EdgeRecord {
                weight: (10 * u + v) as f64,
                label: v % 2,
            })
        });
        (g, Query::new(0, 3, 3).unwrap(), attrs)
    }

    fn run(g: &Graph, q: &Query, bundle: &ConstraintBundle) -> Vec<Vec<VertexId>> {
        let idx = bundle.build_index(g, q);
        let mut sink = CollectSink::unbounded();
        constrained_dfs_enumerate(&idx, bundle, &mut sink).unwrap();
        sink.into_sorted()
    }

    fn post_filtered(g: &Graph, q: &Query, bundle: &ConstraintBundle) -> Vec<Vec<VertexId>> {
        naive_enumerate(g, q, 1000)
            .unwrap()
            .into_iter()
            .filter(|p| bundle.admits(g, p).unwrap())
            .collect()
    }

    #[test]
    fn predicate_removes_edge() {
        let (g, q, attrs) = setup();
        // Drops a -> b (weight 12).
        let bundle = ConstraintBundle::new(attrs).with_predicate(|r| r.weight != 12.0);
        assert_eq!(run(&g, &q, &bundle), vec![vec![0, 1, 3], vec![0, 2, 3]]);
        assert_eq!(run(&g, &q, &bundle), post_filtered(&g, &q, &bundle));
    }

    #[test]
    fn accumulated_weight() {
        let (g, q, attrs) = setup();
        // Sums: s,a,t = 1 + 13 = 14; s,b,t = 2 + 23 = 25; s,a,b,t = 1 + 12 + 23 = 36.
        for (limit, expected) in [(14.0, 1), (25.0, 2), (36.0, 3), (13.0, 0)] {
            let bundle = ConstraintBundle::new(attrs.clone()).with_accumulator(Accumulator::sum_at_most(limit));
            let got = run(&g, &q, &bundle);
            assert_eq!(got.len(), expected, "limit {limit}");
            assert_eq!(got, post_filtered(&g, &q, &bundle));
        }
        let max = Accumulator::new(AccumulateOp::Max, |x| x < 20.0);
        let bundle = ConstraintBundle::new(attrs).with_accumulator(max);
        assert_eq!(run(&g, &q, &bundle), vec![vec![0, 1, 3]]);
    }

    #[test]
    fn label_sequence() {
        let (g, q, attrs) = setup();
        // Labels: s->a 1, a->t 1, s->b 0, b->t 1, a->b 0.
        let bundle = ConstraintBundle::new(attrs.clone()).with_automaton(Automaton::sequence(&[1, 0, 1], 2));
        assert_eq!(run(&g, &q, &bundle), vec![vec![0, 1, 2, 3]]);
        let bundle = ConstraintBundle::new(attrs).with_automaton(Automaton::sequence(&[0, 1], 2));
        assert_eq!(run(&g, &q, &bundle), vec![vec![0, 2, 3]]);
    }

    #[test]
    fn missing_record_is_reported() {
        let (g, q, _) = setup();
        let attrs = EdgeAttributes::from_fn(&g, |u, v| {
            (!(u == 1 && v == 3)).then_some(EdgeRecord { weight: 1.0, label: 0 })
        });
        let bundle = ConstraintBundle::new(attrs).with_predicate(|_| true);
        let idx = bundle.build_index(&g, &q);
        let err = constrained_dfs_enumerate(&idx, &bundle, &mut CollectSink::unbounded()).unwrap_err();
        assert_eq!(err, EnumerateError::MissingAttribute { src: 1, dst: 3 });
    }

    #[test]
    fn label_outside_alphabet() {
        let (g, q, _) = setup();
        let attrs = EdgeAttributes::uniform(&g, EdgeRecord { weight: 1.0, label: 5 });
        let bundle = ConstraintBundle::new(attrs).with_automaton(Automaton::sequence(&[0], 2));
        let idx = bundle.build_index(&g, &q);
        let err = constrained_dfs_enumerate(&idx, &bundle, &mut CollectSink::unbounded()).unwrap_err();
        assert!(matches!(err, EnumerateError::LabelOutOfRange { label: 5, .. }));
    }

    #[test]
    fn empty_bundle_is_plain_search() {
        let (g, q, _) = setup();
        let bundle = ConstraintBundle::new(EdgeAttributes::empty(&g));
        assert_eq!(run(&g, &q, &bundle), naive_enumerate(&g, &q, 10).unwrap());
    }

    #[test]
    fn external_keys() {
        let g = crate::graph::load_edge_list("10 20\n20 30\n".as_bytes(), true).unwrap();
        let rec = EdgeRecord { weight: 2.0, label: 0 };
        let attrs = EdgeAttributes::from_external(&g, [(10, 20, rec)]).unwrap();
        assert_eq!(attrs.get(g.edge_id(0, 1).unwrap()), Some(&rec));
        assert!(attrs.get(g.edge_id(1, 2).unwrap()).is_none());
        assert!(EdgeAttributes::from_external(&g, [(10, 30, rec)]).is_err());
    }
}
