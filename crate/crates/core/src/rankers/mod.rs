//! Ranking schemes over tournament graphs.

mod baselines;
mod exponential;
mod linear;
mod pagerank;
mod stats;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::jsonl;

pub use baselines::{cocitation_rank, numeric_comparison_rank, sink_nodes};
pub use exponential::{
    exponential_tournament, fit_exponential, ExponentialConfig, ExponentialFit, VALUE_CLAMP,
};
pub use linear::{linear_tournament, LinearConfig};
pub use pagerank::{pagerank, PageRankConfig};
pub use stats::{to_match_stats, MatchStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ranker {
    Sink,
    Cocitation,
    Numeric,
    Linear,
    Exponential,
    PageRank,
}

impl Ranker {
    pub const ALL: [Ranker; 6] = [
        Ranker::Sink,
        Ranker::Cocitation,
        Ranker::Numeric,
        Ranker::Linear,
        Ranker::Exponential,
        Ranker::PageRank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ranker::Sink => "sink",
            Ranker::Cocitation => "cocitation",
            Ranker::Numeric => "numeric",
            Ranker::Linear => "linear",
            Ranker::Exponential => "exponential",
            Ranker::PageRank => "pagerank",
        }
    }

    /// Whether the ranker consumes the aggregated weighted graph (as opposed
    /// to raw multi-edges or comparison records).
    pub fn uses_weighted_graph(self) -> bool {
        !matches!(self, Ranker::Cocitation | Ranker::Numeric)
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ranker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Ranker::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| Error::UnknownName {
                kind: "ranker",
                name: s.to_string(),
                expected: Ranker::ALL.map(Ranker::as_str).join(", "),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl Diagnostics {
    /// For closed-form rankers.
    pub fn exact() -> Self {
        Diagnostics {
            iterations: 0,
            residual: 0.0,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub paper_id: String,
    pub score: f64,
    pub rank: usize,
}

/// Per-paper scores. Ordering is score descending, then `tiebreak`
/// descending, then paper id ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub ranker: Ranker,
    pub values: BTreeMap<String, f64>,
    /// Secondary key for rankers whose primary score ties often.
    pub tiebreak: BTreeMap<String, f64>,
    pub diagnostics: Diagnostics,
}

impl Scores {
    pub fn new(ranker: Ranker, values: BTreeMap<String, f64>, diagnostics: Diagnostics) -> Self {
        Scores {
            ranker,
            values,
            tiebreak: BTreeMap::new(),
            diagnostics,
        }
    }

    pub fn get(&self, paper: &str) -> Option<f64> {
        self.values.get(paper).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn compare(&self, a: &str, b: &str) -> Ordering {
        let tb = |p: &str| self.tiebreak.get(p).copied().unwrap_or(0.0);
        self.values[b]
            .total_cmp(&self.values[a])
            .then_with(|| tb(b).total_cmp(&tb(a)))
            .then_with(|| a.cmp(b))
    }

    /// Paper ids in rank order.
    pub fn order(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.values.keys().map(String::as_str).collect();
        ids.sort_by(|a, b| self.compare(a, b));
        ids
    }

    pub fn ranked(&self) -> Vec<RankedEntry> {
        self.order()
            .into_iter()
            .enumerate()
            .map(|(i, id)| RankedEntry {
                paper_id: id.to_string(),
                score: self.values[id],
                rank: i + 1,
            })
            .collect()
    }

    /// Rank-ordered JSON lines followed by a diagnostics line.
    pub fn to_jsonl(&self) -> String {
        let mut out = jsonl::to_string(self.ranked());
        let diag = json!({ "diagnostics": {
            "ranker": self.ranker,
            "iterations": self.diagnostics.iterations,
            "residual": self.diagnostics.residual,
            "converged": self.diagnostics.converged,
        }});
        out.push_str(&format!("{diag}\n"));
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_text(path, &self.to_jsonl())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_uses_tiebreak_then_id() {
        let values: BTreeMap<String, f64> = [("b", 1.0), ("a", 1.0), ("c", 1.0), ("d", 2.0)]
            .map(|(k, v)| (k.to_string(), v))
            .into();
        let mut scores = Scores::new(Ranker::Sink, values, Diagnostics::exact());
        assert_eq!(scores.order(), ["d", "a", "b", "c"]);
        scores.tiebreak.insert("c".into(), 0.5);
        assert_eq!(scores.order(), ["d", "c", "a", "b"]);
        let ranked = scores.ranked();
        assert_eq!(
            ranked.iter().map(|e| e.rank).collect::<Vec<_>>(),
            [1, 2, 3, 4]
        );
    }

    #[test]
    fn ranker_names() {
        for r in Ranker::ALL {
            assert_eq!(r.as_str().parse::<Ranker>().unwrap(), r);
        }
        let err = "hits".parse::<Ranker>().unwrap_err().to_string();
        assert!(err.contains("pagerank") && err.contains("cocitation"));
    }

    #[test]
    fn dump_has_trailing_diagnostics() {
        let values: BTreeMap<String, f64> =
            [("x".to_string(), 0.25), ("y".to_string(), 0.75)].into();
        let text = Scores::new(Ranker::PageRank, values, Diagnostics::exact()).to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"paper_id":"y","score":0.75,"rank":1}"#);
        assert!(lines[2].starts_with(r#"{"diagnostics":"#));
    }
}
