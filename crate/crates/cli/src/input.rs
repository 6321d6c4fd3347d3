use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::{Context, Result};
use hopenum::graph::{load_edge_list, read_snapshot, Graph, SNAPSHOT_MAGIC};

/// Loads either a binary snapshot (detected by its magic bytes) or a text
/// edge list.
pub fn load_graph(path: &Path, undirected: bool) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let is_snapshot = reader.fill_buf()?.starts_with(SNAPSHOT_MAGIC);
    let graph = if is_snapshot {
        read_snapshot(reader)
    } else {
        load_edge_list(reader, !undirected)
    };
    graph.with_context(|| format!("cannot load {}", path.display()))
}
