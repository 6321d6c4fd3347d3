//! Enumeration strategies over a [`LightweightIndex`](crate::index::LightweightIndex).
//!
//! * [`dfs_enumerate`] streams results as it finds them.
//! * [`join_enumerate`] materializes two halves around a cut position and
//!   hash-joins them.
//! * [`constrained_dfs_enumerate`] adds edge predicates, weight aggregates and
//!   label automata on top of the DFS.

mod constraints;
mod dfs;
mod join;

pub use constraints::{
    constrained_dfs_enumerate, AccumulateOp, Accumulator, Automaton, ConstraintBundle, EdgeAttributes, EdgePredicate,
    EdgeRecord, WeightTest,
};
pub use dfs::{dfs_enumerate, dfs_enumerate_relaxed};
pub use join::{join_enumerate, join_enumerate_capped, materialize_join_sides, JoinSides, TupleSet};
