//! Outlier pruning, multi-edge aggregation and dummy nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::ImprovementGraph;
use crate::jsonl;

/// Default pruning threshold: edges improving by more than 100% are dropped.
pub const DEFAULT_REI_THRESHOLD: f64 = 1.0;

/// Reserved id of the synthetic winner/loser node.
pub const DUMMY_ID: &str = "__dummy__";

/// How parallel edges are collapsed into one weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Weight 1 for every connected ordered pair.
    #[serde(rename = "UNW")]
    Unweighted,
    /// Number of parallel comparisons.
    #[serde(rename = "ALL")]
    All,
    /// Mean sigmoid of the parallel REIs.
    #[serde(rename = "SIG_AVG")]
    SigmoidAvg,
    /// Max sigmoid of the parallel REIs.
    #[serde(rename = "SIG_MAX")]
    SigmoidMax,
}

impl Scheme {
    pub const ALL_SCHEMES: [Scheme; 4] = [
        Scheme::Unweighted,
        Scheme::All,
        Scheme::SigmoidAvg,
        Scheme::SigmoidMax,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Unweighted => "UNW",
            Scheme::All => "ALL",
            Scheme::SigmoidAvg => "SIG_AVG",
            Scheme::SigmoidMax => "SIG_MAX",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Scheme::ALL_SCHEMES
            .into_iter()
            .find(|scheme| scheme.as_str() == key)
            .ok_or_else(|| Error::UnknownName {
                kind: "aggregation scheme",
                name: s.to_string(),
                expected: "UNW, ALL, SIG_AVG, SIG_MAX".to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DummyMode {
    #[default]
    None,
    /// The dummy beats every paper: an edge from each paper into the dummy.
    Winner,
    /// The dummy loses to every paper: an edge from the dummy to each paper.
    Loser,
}

impl FromStr for DummyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(DummyMode::None),
            "winner" => Ok(DummyMode::Winner),
            "loser" => Ok(DummyMode::Loser),
            _ => Err(Error::UnknownName {
                kind: "dummy mode",
                name: s.to_string(),
                expected: "none, winner, loser".to_string(),
            }),
        }
    }
}

impl fmt::Display for DummyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DummyMode::None => "none",
            DummyMode::Winner => "winner",
            DummyMode::Loser => "loser",
        })
    }
}

/// A tournament graph with at most one weighted edge per ordered pair.
/// Edge keys are `(worse, better)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), f64>,
    pub scheme: Scheme,
    pub dummy: Option<String>,
}

impl WeightedDigraph {
    pub fn new(scheme: Scheme) -> Self {
        WeightedDigraph {
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
            scheme,
            dummy: None,
        }
    }

    pub fn add_edge(&mut self, worse: &str, better: &str, weight: f64) {
        self.nodes.insert(worse.to_string());
        self.nodes.insert(better.to_string());
        self.edges
            .insert((worse.to_string(), better.to_string()), weight);
    }

    pub fn weight(&self, worse: &str, better: &str) -> Option<f64> {
        self.edges
            .get(&(worse.to_string(), better.to_string()))
            .copied()
    }

    pub fn is_dummy(&self, node: &str) -> bool {
        self.dummy.as_deref() == Some(node)
    }

    pub fn out_degree(&self, node: &str) -> usize {
        self.edges.keys().filter(|(w, _)| w == node).count()
    }

    /// Real (non-dummy) nodes in id order.
    pub fn real_nodes(&self) -> impl Iterator<Item = &String> {
        self.nodes.iter().filter(|n| !self.is_dummy(n))
    }

    pub fn isolated(&self) -> BTreeSet<String> {
        let mut isolated = self.nodes.clone();
        for (w, b) in self.edges.keys() {
            isolated.remove(w);
            isolated.remove(b);
        }
        isolated
    }

    /// Number of weakly connected components.
    pub fn weak_components(&self) -> usize {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (w, b) in self.edges.keys() {
            let (a, b) = (
                find(&mut parent, index[w.as_str()]),
                find(&mut parent, index[b.as_str()]),
            );
            parent[a] = b;
        }
        (0..parent.len())
            .filter(|&i| find(&mut parent, i) == i)
            .count()
    }

    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct EdgeLine<'a> {
            worse: &'a str,
            better: &'a str,
            weight: f64,
        }
        let header = json!({
            "kind": "weighted",
            "scheme": self.scheme,
            "nodes": self.nodes.len(),
            "edges": self.edges.len(),
            "isolated": self.isolated(),
            "dummy": self.dummy,
        });
        let mut out = format!("{header}\n");
        out.push_str(&jsonl::to_string(self.edges.iter().map(
            |((w, b), &weight)| EdgeLine {
                worse: w,
                better: b,
                weight,
            },
        )));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let lines = jsonl::parse_lines(text)?;
        let Some((header, body)) = lines.split_first() else {
            return Err(Error::MissingHeader {
                line: 1,
                key: "kind",
            });
        };
        if header.object.get("kind").and_then(|k| k.as_str()) != Some("weighted") {
            return Err(Error::MissingHeader {
                line: header.line,
                key: "kind",
            });
        }
        let scheme: Scheme = header.str("scheme")?.parse()?;
        let mut graph = WeightedDigraph::new(scheme);
        graph.nodes.extend(header.str_list("isolated")?);
        graph.dummy = match header.object.get("dummy") {
            None | Some(serde_json::Value::Null) => None,
            Some(_) => Some(header.str("dummy")?),
        };
        for line in body {
            let weight = line.f64("weight")?;
            if weight <= 0.0 {
                return Err(line.invalid("weight", "weights must be positive".to_string()));
            }
            graph.add_edge(&line.str("worse")?, &line.str("better")?, weight);
        }
        if let Some(d) = &graph.dummy {
            graph.nodes.insert(d.clone());
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

/// Keeps edges whose REI is at most `threshold`. Nodes are never removed.
pub fn prune_outliers(graph: &ImprovementGraph, threshold: f64) -> ImprovementGraph {
    ImprovementGraph {
        nodes: graph.nodes.clone(),
        edges: graph
            .edges
            .iter()
            .filter(|e| e.rei <= threshold)
            .cloned()
            .collect(),
        metrics: graph.metrics.clone(),
    }
}

pub fn sigmoid_weight(rei: f64) -> f64 {
    1.0 / (1.0 + (-rei).exp())
}

/// Collapses parallel edges into one weighted edge per ordered pair.
/// Anti-parallel edges stay independent. The graph is not re-pruned.
pub fn aggregate(graph: &ImprovementGraph, scheme: Scheme) -> WeightedDigraph {
    let mut parallel: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for e in &graph.edges {
        parallel
            .entry((e.worse.clone(), e.better.clone()))
            .or_default()
            .push(e.rei);
    }
    let edges = parallel
        .into_iter()
        .map(|(pair, reis)| {
            let weight = match scheme {
                Scheme::Unweighted => 1.0,
                Scheme::All => reis.len() as f64,
                Scheme::SigmoidAvg => {
                    reis.iter().map(|&r| sigmoid_weight(r)).sum::<f64>() / reis.len() as f64
                }
                Scheme::SigmoidMax => reis
                    .iter()
                    .map(|&r| sigmoid_weight(r))
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            (pair, weight)
        })
        .collect();
    WeightedDigraph {
        nodes: graph.nodes.clone(),
        edges,
        scheme,
        dummy: None,
    }
}

/// Attaches the reserved dummy node with a unit-weight edge to or from
/// every real node.
pub fn add_dummy(graph: &WeightedDigraph, mode: DummyMode) -> Result<WeightedDigraph> {
    add_dummy_with_id(graph, mode, DUMMY_ID)
}

pub fn add_dummy_with_id(
    graph: &WeightedDigraph,
    mode: DummyMode,
    dummy_id: &str,
) -> Result<WeightedDigraph> {
    if mode == DummyMode::None {
        return Err(Error::NoDummyMode);
    }
    if graph.nodes.contains(dummy_id) {
        return Err(Error::DummyCollision(dummy_id.to_string()));
    }
    let mut out = graph.clone();
    for node in &graph.nodes {
        let key = match mode {
            DummyMode::Winner => (node.clone(), dummy_id.to_string()),
            DummyMode::Loser => (dummy_id.to_string(), node.clone()),
            DummyMode::None => unreachable!(),
        };
        out.edges.insert(key, 1.0);
    }
    out.nodes.insert(dummy_id.to_string());
    out.dummy = Some(dummy_id.to_string());
    Ok(out)
}
