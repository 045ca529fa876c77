//! The raw performance improvement graph.
//!
//! Every non-degenerate comparison record becomes one directed edge from the
//! worse-performing paper to the better-performing one, annotated with the
//! metric, both scores, the reporting paper and the relative improvement.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::ingest::{ComparisonRecord, MetricRegistry, MetricSpec, Polarity};
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementEdge {
    pub worse: String,
    pub better: String,
    pub metric: String,
    pub score_worse: f64,
    pub score_better: f64,
    pub reporter: String,
    pub rei: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImprovementGraph {
    pub nodes: BTreeSet<String>,
    pub edges: Vec<ImprovementEdge>,
    pub metrics: BTreeSet<String>,
}

/// Why a record did not become an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    SelfComparison,
    Tie,
    UndefinedRei,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub ties: usize,
    pub zero_denominator: usize,
    pub self_comparisons: usize,
}

impl DropReport {
    pub fn total(&self) -> usize {
        self.ties + self.zero_denominator + self.self_comparisons
    }

    fn count(&mut self, reason: DropReason) {
        match reason {
            DropReason::SelfComparison => self.self_comparisons += 1,
            DropReason::Tie => self.ties += 1,
            DropReason::UndefinedRei => self.zero_denominator += 1,
        }
    }
}

/// The relative denominator of an improvement is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UndefinedRei;

/// Relative edge improvement.
///
/// For benefit metrics this is `(better - worse) / |worse|`; for cost metrics
/// the mirror `(worse - better) / |better|`, i.e. relative to the smaller
/// cost. Taking the magnitude of the denominator keeps the value positive
/// for negative-valued metrics such as log-likelihoods.
pub fn compute_rei(
    score_worse: f64,
    score_better: f64,
    polarity: Polarity,
) -> Result<f64, UndefinedRei> {
    let (gain, base) = match polarity {
        Polarity::Benefit => (score_better - score_worse, score_worse),
        Polarity::Cost => (score_worse - score_better, score_better),
    };
    if base == 0.0 {
        return Err(UndefinedRei);
    }
    Ok(gain / base.abs())
}

/// Orients a record by metric polarity, or explains why it cannot be.
pub fn orient_checked(
    record: &ComparisonRecord,
    spec: &MetricSpec,
) -> Result<ImprovementEdge, DropReason> {
    if record.paper_lo == record.paper_hi {
        return Err(DropReason::SelfComparison);
    }
    if record.value_lo == record.value_hi {
        return Err(DropReason::Tie);
    }
    // Records are stored lo/hi by raw value, but be robust to hand-edited files.
    let (small, large) = if record.value_lo < record.value_hi {
        (
            (&record.paper_lo, record.value_lo),
            (&record.paper_hi, record.value_hi),
        )
    } else {
        (
            (&record.paper_hi, record.value_hi),
            (&record.paper_lo, record.value_lo),
        )
    };
    let (worse, better) = match spec.polarity {
        Polarity::Benefit => (small, large),
        Polarity::Cost => (large, small),
    };
    let rei =
        compute_rei(worse.1, better.1, spec.polarity).map_err(|_| DropReason::UndefinedRei)?;
    Ok(ImprovementEdge {
        worse: worse.0.clone(),
        better: better.0.clone(),
        metric: spec.name.clone(),
        score_worse: worse.1,
        score_better: better.1,
        reporter: record.reporter.clone(),
        rei,
    })
}

pub fn orient(record: &ComparisonRecord, spec: &MetricSpec) -> Option<ImprovementEdge> {
    orient_checked(record, spec).ok()
}

/// Builds the raw graph. Papers named in any record become nodes, even when
/// the record itself was dropped.
pub fn build_raw_graph(
    records: &[ComparisonRecord],
    registry: &MetricRegistry,
) -> (ImprovementGraph, DropReport) {
    let mut graph = ImprovementGraph::default();
    let mut report = DropReport::default();
    for record in records {
        graph.nodes.insert(record.paper_lo.clone());
        graph.nodes.insert(record.paper_hi.clone());
        let spec = registry.resolve(&record.metric);
        match orient_checked(record, &spec) {
            Ok(edge) => {
                graph.metrics.insert(edge.metric.clone());
                graph.edges.push(edge);
            }
            Err(reason) => report.count(reason),
        }
    }
    (graph, report)
}

impl ImprovementGraph {
    pub fn out_degree(&self, node: &str) -> usize {
        self.edges.iter().filter(|e| e.worse == node).count()
    }

    pub fn in_degree(&self, node: &str) -> usize {
        self.edges.iter().filter(|e| e.better == node).count()
    }

    /// Nodes that touch no edge.
    pub fn isolated(&self) -> BTreeSet<String> {
        let mut isolated = self.nodes.clone();
        for e in &self.edges {
            isolated.remove(&e.worse);
            isolated.remove(&e.better);
        }
        isolated
    }

    /// Subgraph on `keep`: nodes in `keep`, edges with both endpoints in it.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> ImprovementGraph {
        let edges: Vec<ImprovementEdge> = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.worse) && keep.contains(&e.better))
            .cloned()
            .collect();
        ImprovementGraph {
            nodes: self.nodes.intersection(keep).cloned().collect(),
            metrics: edges.iter().map(|e| e.metric.clone()).collect(),
            edges,
        }
    }

    /// JSON-lines dump: a header line with counts, then one line per edge.
    pub fn to_jsonl(&self) -> String {
        let header = json!({
            "kind": "improvement",
            "nodes": self.nodes.len(),
            "metrics": self.metrics.len(),
            "edges": self.edges.len(),
            "isolated": self.isolated(),
        });
        let mut out = format!("{header}\n");
        out.push_str(&jsonl::to_string(&self.edges));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let lines = jsonl::parse_lines(text)?;
        let Some((header, body)) = lines.split_first() else {
            return Ok(ImprovementGraph::default());
        };
        if header.object.get("kind").and_then(|k| k.as_str()) != Some("improvement") {
            return Err(Error::MissingHeader {
                line: header.line,
                key: "kind",
            });
        }
        let mut graph = ImprovementGraph::default();
        graph.nodes.extend(header.str_list("isolated")?);
        for line in body {
            let edge = ImprovementEdge {
                worse: line.str("worse")?,
                better: line.str("better")?,
                metric: line.str("metric")?,
                score_worse: line.f64("score_worse")?,
                score_better: line.f64("score_better")?,
                reporter: line.str("reporter")?,
                rei: line.f64("rei")?,
            };
            graph.nodes.insert(edge.worse.clone());
            graph.nodes.insert(edge.better.clone());
            graph.metrics.insert(edge.metric.clone());
            graph.edges.push(edge);
        }
        let expected = header.u64("edges")? as usize;
        if expected != graph.edges.len() {
            return Err(header.invalid(
                "edges",
                format!(
                    "header says {expected} edges, file has {}",
                    graph.edges.len()
                ),
            ));
        }
        Ok(graph)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_text(path, &self.to_jsonl())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(metric: &str, lo: &str, vlo: f64, hi: &str, vhi: f64) -> ComparisonRecord {
        ComparisonRecord {
            metric: metric.into(),
            paper_lo: lo.into(),
            value_lo: vlo,
            paper_hi: hi.into(),
            value_hi: vhi,
            reporter: "P".into(),
        }
    }

    fn spec(name: &str, polarity: Polarity) -> MetricSpec {
        MetricSpec {
            name: name.into(),
            polarity,
        }
    }

    #[test]
    fn orient_by_polarity() {
        let e = orient(
            &rec("f1", "X", 0.5, "Y", 0.6),
            &spec("f1", Polarity::Benefit),
        )
        .unwrap();
        assert_eq!((e.worse.as_str(), e.better.as_str()), ("X", "Y"));
        let e = orient(
            &rec("time", "X", 10.0, "Y", 12.0),
            &spec("time", Polarity::Cost),
        )
        .unwrap();
        assert_eq!((e.worse.as_str(), e.better.as_str()), ("Y", "X"));
        assert!(orient(
            &rec("f1", "X", 0.5, "Y", 0.5),
            &spec("f1", Polarity::Benefit)
        )
        .is_none());
        assert!(orient(
            &rec("f1", "X", 0.0, "Y", 0.5),
            &spec("f1", Polarity::Benefit)
        )
        .is_none());
    }

    #[test]
    fn rei_values() {
        // (0.6 - 0.5) / 0.5
        assert!((compute_rei(0.5, 0.6, Polarity::Benefit).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(compute_rei(0.7, 0.7, Polarity::Benefit).unwrap(), 0.0);
        // (12 - 10) / 10 relative to the smaller cost
        assert!((compute_rei(12.0, 10.0, Polarity::Cost).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(compute_rei(0.0, 1.0, Polarity::Benefit), Err(UndefinedRei));
        assert_eq!(compute_rei(1.0, 0.0, Polarity::Cost), Err(UndefinedRei));
        // 775% improvement: 8.75x the worse score
        assert!((compute_rei(4.0, 35.0, Polarity::Benefit).unwrap() - 7.75).abs() < 1e-12);
        // negative log-likelihoods stay positive
        assert!((compute_rei(-2.0, -1.0, Polarity::Benefit).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_records() {
        let (g, report) = build_raw_graph(&[], &MetricRegistry::default());
        assert_eq!(g, ImprovementGraph::default());
        assert_eq!(report, DropReport::default());
    }

    #[test]
    fn three_by_two_graph() {
        let records = vec![
            rec("z1", "B", 0.65, "A", 0.70),
            rec("z1", "B", 0.65, "C", 0.80),
            rec("z1", "A", 0.70, "C", 0.80),
            rec("z2", "A", 0.60, "B", 0.68),
            rec("z2", "B", 0.68, "C", 0.75),
            rec("z2", "A", 0.60, "C", 0.75),
        ];
        let (g, report) = build_raw_graph(&records, &MetricRegistry::default());
        assert_eq!(report.total(), 0);
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 6);
        assert_eq!(g.metrics.iter().collect::<Vec<_>>(), ["z1", "z2"]);
        let count = |w: &str, b: &str| {
            g.edges
                .iter()
                .filter(|e| e.worse == w && e.better == b)
                .count()
        };
        assert_eq!(count("B", "C"), 2);
        assert_eq!((count("A", "B"), count("B", "A")), (1, 1));
    }

    #[test]
    fn self_comparison_is_counted() {
        let records = vec![rec("f1", "X", 0.5, "X", 0.6), rec("f1", "X", 0.5, "Y", 0.6)];
        let (g, report) = build_raw_graph(&records, &MetricRegistry::default());
        assert_eq!(report.self_comparisons, 1);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn dump_round_trip_keeps_isolated_nodes() {
        let records = vec![rec("f1", "X", 0.5, "Y", 0.6), rec("f1", "Z", 0.5, "W", 0.5)];
        let (g, _) = build_raw_graph(&records, &MetricRegistry::default());
        assert_eq!(g.isolated().len(), 2);
        let text = g.to_jsonl();
        assert_eq!(ImprovementGraph::from_jsonl(&text).unwrap(), g);
        assert!(text.starts_with(
            r#"{"edges":1,"isolated":["W","Z"],"kind":"improvement","metrics":1,"nodes":4}"#
        ));
    }

    proptest! {
        #[test]
        fn edges_plus_drops_equal_records(
            raw in proptest::collection::vec(
                (0u8..5, -3i32..4, 0u8..5, -3i32..4, prop_oneof![Just("f1"), Just("time"), Just("loss")]),
                0..40,
            )
        ) {
            let records: Vec<_> = raw
                .iter()
                .map(|&(a, va, b, vb, m)| {
                    let (va, vb) = (va as f64, vb as f64);
                    let (lo, vlo, hi, vhi) = if va <= vb { (a, va, b, vb) } else { (b, vb, a, va) };
                    rec(m, &format!("p{lo}"), vlo, &format!("p{hi}"), vhi)
                })
                .collect();
            let registry = MetricRegistry::default();
            let (g, report) = build_raw_graph(&records, &registry);
            prop_assert_eq!(g.edges.len() + report.total(), records.len());
            for e in &g.edges {
                prop_assert!(e.rei > 0.0);
                prop_assert!(e.worse != e.better);
                match registry.resolve(&e.metric).polarity {
                    Polarity::Benefit => prop_assert!(e.score_better > e.score_worse),
                    Polarity::Cost => prop_assert!(e.score_better < e.score_worse),
                }
            }
        }
    }
}
