use std::collections::BTreeMap;

use crate::sanitize::WeightedDigraph;

use super::{Diagnostics, Ranker, Scores};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    /// L1 change between iterates below which the iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.90,
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

/// Weighted PageRank over `worse -> better` edges.
///
/// Each node passes its mass to its out-neighbors in proportion to edge
/// weight. Dangling nodes spread their mass uniformly and the teleport is
/// uniform. Dummy nodes take part in the walk but are not reported.
pub fn pagerank(graph: &WeightedDigraph, cfg: &PageRankConfig) -> Scores {
    let nodes: Vec<&String> = graph.nodes.iter().collect();
    let n = nodes.len();
    if n == 0 {
        return Scores::new(Ranker::PageRank, BTreeMap::new(), Diagnostics::exact());
    }
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut out_weight = vec![0.0; n];
    let mut links: Vec<(usize, usize, f64)> = Vec::with_capacity(graph.edges.len());
    for ((worse, better), &w) in &graph.edges {
        let (u, v) = (index[worse.as_str()], index[better.as_str()]);
        out_weight[u] += w;
        links.push((u, v, w));
    }

    let nf = n as f64;
    let alpha = cfg.damping;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let dangling: f64 = (0..n)
            .filter(|&i| out_weight[i] == 0.0)
            .map(|i| rank[i])
            .sum();
        next.fill((1.0 - alpha) / nf + alpha * dangling / nf);
        for &(u, v, w) in &links {
            next[v] += alpha * rank[u] * w / out_weight[u];
        }
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < cfg.tolerance {
            break;
        }
    }

    let values = nodes
        .iter()
        .zip(rank)
        .filter(|(id, _)| !graph.is_dummy(id))
        .map(|(id, r)| ((*id).clone(), r))
        .collect();
    Scores::new(
        Ranker::PageRank,
        values,
        Diagnostics {
            iterations,
            residual,
            converged: residual < cfg.tolerance,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sanitize::{add_dummy, DummyMode, Scheme};

    #[test]
    fn symmetric_two_cycle() {
        let mut g = WeightedDigraph::new(Scheme::Unweighted);
        g.add_edge("u", "v", 0.7);
        g.add_edge("v", "u", 0.7);
        let s = pagerank(&g, &PageRankConfig::default());
        assert!((s.get("u").unwrap() - 0.5).abs() < 1e-10);
        assert!((s.get("v").unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn single_node() {
        let mut g = WeightedDigraph::new(Scheme::Unweighted);
        g.nodes.insert("x".into());
        let s = pagerank(&g, &PageRankConfig::default());
        assert!((s.get("x").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_graph() {
        let s = pagerank(
            &WeightedDigraph::new(Scheme::All),
            &PageRankConfig::default(),
        );
        assert!(s.is_empty());
    }

    #[test]
    fn better_paper_collects_mass() {
        let mut g = WeightedDigraph::new(Scheme::Unweighted);
        g.add_edge("a", "b", 1.0);
        g.add_edge("b", "c", 1.0);
        g.add_edge("a", "c", 1.0);
        let s = pagerank(&g, &PageRankConfig::default());
        assert_eq!(s.order(), ["c", "b", "a"]);
        let total: f64 = s.values.values().sum();
        assert!((total - 1.0).abs() < 1e-8);
        let floor = (1.0 - 0.9) / 3.0;
        assert!(s.values.values().all(|&v| v >= floor - 1e-12));
    }

    #[test]
    fn dummy_is_not_reported() {
        let mut g = WeightedDigraph::new(Scheme::Unweighted);
        g.add_edge("a", "b", 1.0);
        let g = add_dummy(&g, DummyMode::Loser).unwrap();
        let s = pagerank(&g, &PageRankConfig::default());
        assert_eq!(s.len(), 2);
        assert_eq!(s.order(), ["b", "a"]);
    }
}
