//! Hop-constrained s-t simple path enumeration.
//!
//! Given a directed graph and a query `q(s, t, k)`, list every simple path
//! from `s` to `t` with at most `k` edges. Each query builds a small
//! query-specific [`index::LightweightIndex`] that buckets vertices by their
//! distance from `s` and to `t`. Two strategies enumerate on top of it: a
//! streaming depth-first search and a materializing hash join split at a cut
//! level. The [`optimizer`] picks one using walk-count estimates computed from
//! the index.
//!
//! ```
//! use hopenum::{graph::Graph, index::LightweightIndex, enumerate, CollectSink, Query};
//!
//! let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]);
//! let q = Query::new(0, 3, 3).unwrap();
//! let idx = LightweightIndex::build(&g, &q);
//! let mut sink = CollectSink::unbounded();
//! enumerate::dfs_enumerate(&idx, &mut sink);
//! assert_eq!(sink.into_sorted(), vec![vec![0, 1, 2, 3], vec![0, 1, 3], vec![0, 2, 3]]);
//! ```

pub mod baseline;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod index;
pub mod optimizer;
mod query;
mod sink;

pub use error::{CapExceeded, EnumerateError, GraphError, QueryError};
pub use query::{canonicalize, is_valid_path, Path, Query};
pub use sink::{CollectSink, CountSink, Deadline, Flow, FnSink, PathSink, SearchStats, WriterSink};
