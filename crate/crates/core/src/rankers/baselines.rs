//! Structural baselines: sink nodes, dense cocitation and net wins.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::ImprovementGraph;
use crate::ingest::ComparisonRecord;
use crate::sanitize::WeightedDigraph;

use super::pagerank::{pagerank, PageRankConfig};
use super::{Diagnostics, Ranker, Scores};

/// Papers that never lost (out-degree 0) score 1, everyone else 0. Within
/// each class PageRank on the same graph breaks ties.
pub fn sink_nodes(graph: &WeightedDigraph) -> Scores {
    let with_out_edges: BTreeSet<&str> = graph.edges.keys().map(|(w, _)| w.as_str()).collect();
    let values = graph
        .real_nodes()
        .map(|n| {
            let sink = if with_out_edges.contains(n.as_str()) {
                0.0
            } else {
                1.0
            };
            (n.clone(), sink)
        })
        .collect();
    let mut scores = Scores::new(Ranker::Sink, values, Diagnostics::exact());
    scores.tiebreak = pagerank(graph, &PageRankConfig::default()).values;
    scores
}

/// Scores each paper by the number of distinct papers it was compared with
/// in some table; ties go to the larger number of comparisons.
pub fn cocitation_rank(records: &[ComparisonRecord]) -> Scores {
    let mut partners: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut multiplicity: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        partners.entry(&r.paper_lo).or_default();
        partners.entry(&r.paper_hi).or_default();
        if r.paper_lo == r.paper_hi {
            continue;
        }
        partners
            .get_mut(r.paper_lo.as_str())
            .unwrap()
            .insert(&r.paper_hi);
        partners
            .get_mut(r.paper_hi.as_str())
            .unwrap()
            .insert(&r.paper_lo);
        *multiplicity.entry(&r.paper_lo).or_default() += 1;
        *multiplicity.entry(&r.paper_hi).or_default() += 1;
    }
    let values = partners
        .iter()
        .map(|(p, set)| (p.to_string(), set.len() as f64))
        .collect();
    let mut scores = Scores::new(Ranker::Cocitation, values, Diagnostics::exact());
    scores.tiebreak = multiplicity
        .into_iter()
        .map(|(p, m)| (p.to_string(), m as f64))
        .collect();
    scores
}

/// Net wins over raw multi-edges: in-degree minus out-degree.
pub fn numeric_comparison_rank(graph: &ImprovementGraph) -> Scores {
    let mut values: BTreeMap<String, f64> = graph.nodes.iter().map(|n| (n.clone(), 0.0)).collect();
    for e in &graph.edges {
        *values.entry(e.better.clone()).or_default() += 1.0;
        *values.entry(e.worse.clone()).or_default() -= 1.0;
    }
    Scores::new(Ranker::Numeric, values, Diagnostics::exact())
}
