use std::fmt::Write as _;
use std::io::BufRead;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use hopenum::graph::{bfs_distances_bounded, Direction, Graph, VertexId};
use hopenum::Query;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which halves of the degree split the endpoints come from. `V1` is the
/// high-degree part, `V2` the rest; the first half names the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    V1V1,
    V1V2,
    V2V1,
    V2V2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeKind {
    Out,
    In,
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub setting: Setting,
    pub query_count: usize,
    pub hop_limit: u32,
    pub seed: u64,
    pub max_distance: u32,
    /// Share of vertices, by descending degree, that form `V1`.
    pub top_fraction: f64,
    pub degree: DegreeKind,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            setting: Setting::V1V1,
            query_count: 1000,
            hop_limit: 6,
            seed: 0,
            max_distance: 3,
            top_fraction: 0.1,
            degree: DegreeKind::Out,
        }
    }
}

/// Splits vertices into the top `fraction` by degree (ties broken by id) and
/// the rest. Both halves are returned in ascending id order.
pub fn split_by_degree(g: &Graph, fraction: f64, degree: DegreeKind) -> (Vec<VertexId>, Vec<VertexId>) {
    let n = g.vertex_count();
    let deg = |v: VertexId| match degree {
        DegreeKind::Out => g.out_degree(v),
        DegreeKind::In => g.in_degree(v),
        DegreeKind::Total => g.out_degree(v) + g.in_degree(v),
    };
    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(deg(v)), v));
    let top = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
    let mut high = order[..top].to_vec();
    let mut low = order[top..].to_vec();
    high.sort_unstable();
    low.sort_unstable();
    (high, low)
}

/// Samples queries whose target lies within `max_distance` hops of the
/// source. Stops early, with a warning, if suitable pairs are too rare.
pub fn generate(g: &Graph, spec: &WorkloadSpec) -> Result<Vec<Query>> {
    if spec.hop_limit < 2 {
        bail!("hop limit must be at least 2");
    }
    let (high, low) = split_by_degree(g, spec.top_fraction, spec.degree);
    let (sources, targets) = match spec.setting {
        Setting::V1V1 => (&high, &high),
        Setting::V1V2 => (&high, &low),
        Setting::V2V1 => (&low, &high),
        Setting::V2V2 => (&low, &low),
    };
    let mut in_targets = vec![false; g.vertex_count()];
    for &v in targets {
        in_targets[v as usize] = true;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut queries = Vec::with_capacity(spec.query_count);
    let max_attempts = spec.query_count.saturating_mul(100).max(1000);
    let mut attempts = 0;
    while queries.len() < spec.query_count && attempts < max_attempts {
        attempts += 1;
        let Some(&s) = sources.choose(&mut rng) else {
            break;
        };
        let dist = bfs_distances_bounded(g, s, Direction::Forward, None, spec.max_distance, |_| true);
        let near: Vec<VertexId> = dist
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(v, &d)| v != s as usize && in_targets[v] && d <= spec.max_distance)
            .map(|(v, _)| v as VertexId)
            .collect();
        if let Some(&t) = near.choose(&mut rng) {
            queries.push(Query::new(s, t, spec.hop_limit)?);
        }
    }
    if queries.len() < spec.query_count {
        log::warn!(
            "generated {} of {} queries after {attempts} attempts",
            queries.len(),
            spec.query_count
        );
    }
    Ok(queries)
}

/// One query per line: external source, external target, hop limit.
pub fn format_workload(g: &Graph, queries: &[Query]) -> String {
    let mut out = String::from("# source target k\n");
    for q in queries {
        let _ = writeln!(
            out,
            "{} {} {}",
            g.external_id(q.source),
            g.external_id(q.target),
            q.hop_limit
        );
    }
    out
}

pub fn parse_workload(g: &Graph, input: impl BufRead) -> Result<Vec<Query>> {
    let mut queries = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [s, t, k] = fields[..] else {
            bail!("workload line {}: expected `source target k`", i + 1);
        };
        let parse = |x: &str| x.parse::<u64>().with_context(|| format!("workload line {}", i + 1));
        let (s, t) = (g.resolve(parse(s)?)?, g.resolve(parse(t)?)?);
        let k = parse(k)? as u32;
        queries.push(Query::new(s, t, k).with_context(|| format!("workload line {}", i + 1))?);
    }
    Ok(queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_and_chain() -> Graph {
        // Vertex 0 has out-degree 5; 1..=5 form a chain.
        let mut edges: Vec<_> = (1..=5).map(|v| (0, v)).collect();
        edges.extend((1..5).map(|v| (v, v + 1)));
        Graph::from_edges(10, &edges)
    }

    #[test]
    fn top_share_by_out_degree() {
        let g = star_and_chain();
        let (high, low) = split_by_degree(&g, 0.1, DegreeKind::Out);
        assert_eq!(high, vec![0]);
        assert_eq!(low.len(), 9);
        let (high, _) = split_by_degree(&g, 0.1, DegreeKind::In);
        assert_eq!(high, vec![2]);
    }

    #[test]
    fn pairs_respect_distance_and_setting() {
        let g = star_and_chain();
        let spec = WorkloadSpec {
            setting: Setting::V1V2,
            query_count: 20,
            hop_limit: 4,
            ..WorkloadSpec::default()
        };
        let queries = generate(&g, &spec).unwrap();
        assert_eq!(queries.len(), 20);
        for q in &queries {
            assert_eq!(q.source, 0);
            let d = hopenum::graph::bfs_distances(&g, q.source, Direction::Forward, None);
            assert!(d.get(q.target) <= 3);
        }
        assert_eq!(generate(&g, &spec).unwrap(), queries);
    }

    #[test]
    fn unsatisfiable_setting_yields_nothing() {
        let g = star_and_chain();
        // Vertex 0 has no in-edges, so nothing reaches it.
        let spec = WorkloadSpec {
            setting: Setting::V2V1,
            query_count: 5,
            ..WorkloadSpec::default()
        };
        assert!(generate(&g, &spec).unwrap().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let g = hopenum::graph::load_edge_list("10 20\n20 30\n".as_bytes(), true).unwrap();
        let qs = vec![Query::new(0, 2, 3).unwrap()];
        let text = format_workload(&g, &qs);
        assert_eq!(text, "# source target k\n10 30 3\n");
        assert_eq!(parse_workload(&g, text.as_bytes()).unwrap(), qs);
        assert!(parse_workload(&g, "10 99 3\n".as_bytes()).is_err());
        assert!(parse_workload(&g, "10 30\n".as_bytes()).is_err());
    }
}
