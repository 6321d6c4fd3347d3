use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{Graph, VertexId};
use crate::error::GraphError;

/// Parses a whitespace-separated edge list, one `u v` pair per line.
///
/// Lines starting with `#` or `%` and blank lines are skipped; tokens past
/// the second are ignored (weights, timestamps). External ids are remapped
/// to a dense range in ascending id order, so an input that is already dense
/// keeps its ids. With `directed == false` each line yields both directions.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<Graph, GraphError> {
    let mut raw = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<u64, GraphError> {
            let tok = tokens.next().ok_or_else(|| GraphError::Parse {
                line: lineno + 1,
                message: format!("missing {what} vertex"),
            })?;
            tok.parse::<u64>().map_err(|e| GraphError::Parse {
                line: lineno + 1,
                message: format!("bad {what} vertex {tok:?}: {e}"),
            })
        };
        let u = next_id("source")?;
        let v = next_id("target")?;
        raw.push((u, v));
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > VertexId::MAX as usize {
        return Err(GraphError::Parse {
            line: 0,
            message: format!("{} distinct vertices exceed the 32-bit id range", ids.len()),
        });
    }
    let dense: HashMap<u64, VertexId> = ids.iter().enumerate().map(|(i, &ext)| (ext, i as VertexId)).collect();

    let mut edges = Vec::with_capacity(if directed { raw.len() } else { 2 * raw.len() });
    for (u, v) in raw {
        if u == v {
            continue;
        }
        let (du, dv) = (dense[&u], dense[&v]);
        edges.push((du, dv));
        if !directed {
            edges.push((dv, du));
        }
    }
    if edges.is_empty() {
        return Err(GraphError::EmptyEdgeSet);
    }
    Ok(Graph::assemble(ids.len(), edges, ids))
}

pub fn load_edge_list_path(path: impl AsRef<Path>, directed: bool) -> Result<Graph, GraphError> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), directed)
}
