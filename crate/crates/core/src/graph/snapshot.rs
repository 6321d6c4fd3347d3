//! Binary snapshot of a loaded graph.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size            field
//! 0       8               magic  b"HOPGRAPH"
//! 8       4               format version (u32, currently 1)
//! 12      8               vertex_count n (u64)
//! 20      8               edge_count m (u64)
//! 28      8 * (n + 1)     forward offsets (u64), offsets[0] = 0, offsets[n] = m
//! ..      4 * m           forward targets (u32), sorted within each vertex
//! ..      8 * n           external ids (u64), indexed by dense id
//! ```
//!
//! The reverse adjacency is rebuilt on load.

use std::io::{Read, Write};

use super::{Graph, VertexId};
use crate::error::GraphError;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"HOPGRAPH";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(g: &Graph, mut out: W) -> Result<(), GraphError> {
    let (offsets, targets) = g.forward_csr();
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(g.vertex_count() as u64).to_le_bytes())?;
    out.write_all(&(g.edge_count() as u64).to_le_bytes())?;
    for &off in offsets {
        out.write_all(&(off as u64).to_le_bytes())?;
    }
    for &t in targets {
        out.write_all(&t.to_le_bytes())?;
    }
    for &ext in g.external_ids() {
        out.write_all(&ext.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64, GraphError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, GraphError> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<Graph, GraphError> {
    let bad = |msg: String| GraphError::Snapshot(msg);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut input)?;
    if version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = read_u64(&mut input)?;
    let m = read_u64(&mut input)?;
    if n > VertexId::MAX as u64 || m > u32::MAX as u64 {
        return Err(bad(format!("counts out of range: n={n} m={m}")));
    }
    let (n, m) = (n as usize, m as usize);

    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut input)? as usize);
    }
    if offsets[0] != 0 || offsets[n] != m || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(bad("offsets are not a monotone prefix sum".into()));
    }
    let mut edges = Vec::with_capacity(m);
    for u in 0..n {
        for _ in offsets[u]..offsets[u + 1] {
            let v = read_u32(&mut input)?;
            if v as usize >= n {
                return Err(bad(format!("target {v} out of range")));
            }
            edges.push((u as VertexId, v));
        }
    }
    let mut external = Vec::with_capacity(n);
    for _ in 0..n {
        external.push(read_u64(&mut input)?);
    }
    let g = Graph::assemble(n, edges, external);
    if g.edge_count() != m {
        return Err(bad("snapshot holds duplicate edges or self-loops".into()));
    }
    Ok(g)
}
