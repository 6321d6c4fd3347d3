//! JSON description of a [`ConstraintBundle`].
//!
//! ```json
//! {
//!   "edges": [[0, 1, 2.5, 0], [1, 3, 1.0, 1]],
//!   "edges_file": "weights.txt",
//!   "default": { "weight": 1.0, "label": 0 },
//!   "predicate": { "max_weight": 5.0, "labels": [0, 1] },
//!   "accumulator": { "op": "sum", "at_most": 10.0, "monotone": true },
//!   "automaton": { "states": 2, "labels": 2, "start": 0, "accepting": [1],
//!                  "transitions": [[0, 0, 0], [0, 1, 1]] }
//! }
//! ```
//!
//! Edge records are `[source, target, weight, label]` with external ids.
//! `edges_file` holds the same four fields per line and is resolved relative
//! to the JSON file. `default` fills edges without a record.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hopenum::enumerate::{AccumulateOp, Accumulator, Automaton, ConstraintBundle, EdgeAttributes, EdgeRecord};
use hopenum::graph::Graph;
use serde::Deserialize;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    #[serde(default)]
    pub edges: Vec<(u64, u64, f64, u32)>,
    pub edges_file: Option<String>,
    pub default: Option<RecordSpec>,
    pub predicate: Option<PredicateSpec>,
    pub accumulator: Option<AccumulatorSpec>,
    pub automaton: Option<AutomatonSpec>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct RecordSpec {
    pub weight: f64,
    #[serde(default)]
    pub label: u32,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct PredicateSpec {
    pub min_weight: Option<f64>,
    pub max_weight: Option<f64>,
    /// Allowed labels; all labels when absent.
    pub labels: Option<Vec<u32>>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OpSpec {
    Sum,
    Product,
    Min,
    Max,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct AccumulatorSpec {
    pub op: OpSpec,
    pub at_least: Option<f64>,
    pub at_most: Option<f64>,
    /// Declares that the folded value only moves in one direction as edges
    /// are added (for example a sum of non-negative weights), which lets the
    /// search prune on the bound it moves toward.
    #[serde(default)]
    pub monotone: bool,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct AutomatonSpec {
    pub states: u32,
    pub labels: u32,
    #[serde(default)]
    pub start: u32,
    pub accepting: Vec<u32>,
    /// `[from, label, to]` triples.
    pub transitions: Vec<(u32, u32, u32)>,
}

pub fn load(path: &Path, g: &Graph) -> Result<ConstraintBundle> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file: ConstraintFile =
        serde_json::from_str(&text).with_context(|| format!("invalid constraint file {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.into_bundle(g, base)
}

impl ConstraintFile {
    pub fn into_bundle(self, g: &Graph, base: &Path) -> Result<ConstraintBundle> {
        let mut attrs = match self.default {
            Some(d) => EdgeAttributes::uniform(
                g,
                EdgeRecord {
                    weight: d.weight,
                    label: d.label,
                },
            ),
            None => EdgeAttributes::empty(g),
        };
        let mut records = self.edges;
        if let Some(name) = &self.edges_file {
            let path = base.join(name);
            let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
            records.extend(parse_records(&text).with_context(|| format!("in {}", path.display()))?);
        }
        for (u, v, weight, label) in records {
            let (iu, iv) = (g.resolve(u)?, g.resolve(v)?);
            let Some(e) = g.edge_id(iu, iv) else {
                bail!("edge ({u}, {v}) does not exist in the graph");
            };
            attrs.set(e, EdgeRecord { weight, label });
        }

        let mut bundle = ConstraintBundle::new(attrs);
        if let Some(p) = self.predicate {
            bundle = bundle.with_predicate(move |r| {
                p.min_weight.is_none_or(|m| r.weight >= m)
                    && p.max_weight.is_none_or(|m| r.weight <= m)
                    && p.labels.as_ref().is_none_or(|ls| ls.contains(&r.label))
            });
        }
        if let Some(a) = self.accumulator {
            bundle = bundle.with_accumulator(accumulator(&a)?);
        }
        if let Some(m) = self.automaton {
            bundle = bundle.with_automaton(automaton(&m)?);
        }
        Ok(bundle)
    }
}

fn accumulator(spec: &AccumulatorSpec) -> Result<Accumulator> {
    let op = match spec.op {
        OpSpec::Sum => AccumulateOp::Sum,
        OpSpec::Product => AccumulateOp::Product,
        OpSpec::Min => AccumulateOp::Min,
        OpSpec::Max => AccumulateOp::Max,
    };
    let (lo, hi) = (spec.at_least, spec.at_most);
    let mut acc = Accumulator::new(op, move |x| lo.is_none_or(|l| x >= l) && hi.is_none_or(|h| x <= h));
    if spec.monotone {
        // Min only decreases; sum, product and max are taken to only increase.
        acc = if spec.op == OpSpec::Min {
            match lo {
                Some(l) => acc.with_viable(move |x| x >= l),
                None => acc,
            }
        } else {
            match hi {
                Some(h) => acc.with_viable(move |x| x <= h),
                None => acc,
            }
        };
    }
    Ok(acc)
}

fn automaton(spec: &AutomatonSpec) -> Result<Automaton> {
    let in_range = |s: u32| s < spec.states;
    if !in_range(spec.start) || !spec.accepting.iter().all(|&s| in_range(s)) {
        bail!("automaton state out of range 0..{}", spec.states);
    }
    let mut a = Automaton::new(spec.states, spec.labels, spec.start, &spec.accepting);
    for &(from, label, to) in &spec.transitions {
        if !in_range(from) || !in_range(to) || label >= spec.labels {
            bail!("automaton transition ({from}, {label}, {to}) out of range");
        }
        a.add_transition(from, label, to);
    }
    Ok(a)
}

fn parse_records(text: &str) -> Result<Vec<(u64, u64, f64, u32)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 3 {
            bail!("line {}: expected `source target weight [label]`", i + 1);
        }
        let label = match f.get(3) {
            Some(l) => l.parse().with_context(|| format!("line {}", i + 1))?,
            None => 0,
        };
        out.push((
            f[0].parse().with_context(|| format!("line {}", i + 1))?,
            f[1].parse().with_context(|| format!("line {}", i + 1))?,
            f[2].parse().with_context(|| format!("line {}", i + 1))?,
            label,
        ));
    }
    Ok(out)
}
