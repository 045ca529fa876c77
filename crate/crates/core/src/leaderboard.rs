//! Query-driven leaderboard generation: retrieve candidate papers by text,
//! induce their tournament graph, rank, and keep the candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ImprovementGraph;
use crate::ingest::ComparisonRecord;
use crate::jsonl;
use crate::rankers::{
    cocitation_rank, exponential_tournament, linear_tournament, numeric_comparison_rank, pagerank,
    sink_nodes, to_match_stats, ExponentialConfig, LinearConfig, PageRankConfig, Ranker, Scores,
};
use crate::sanitize::{add_dummy, aggregate, DummyMode, Scheme, WeightedDigraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub year: i32,
}

/// Paper metadata with an inverted index over title and abstract tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusIndex {
    pub papers: BTreeMap<String, PaperMeta>,
    tokens: BTreeMap<String, BTreeSet<String>>,
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl CorpusIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a paper.
    pub fn insert(&mut self, paper_id: &str, meta: PaperMeta) {
        if let Some(old) = self.papers.remove(paper_id) {
            for token in tokenize(&old.title).chain(tokenize(&old.abstract_text)) {
                if let Some(set) = self.tokens.get_mut(&token) {
                    set.remove(paper_id);
                }
            }
            self.tokens.retain(|_, set| !set.is_empty());
        }
        for token in tokenize(&meta.title).chain(tokenize(&meta.abstract_text)) {
            self.tokens
                .entry(token)
                .or_default()
                .insert(paper_id.to_string());
        }
        self.papers.insert(paper_id.to_string(), meta);
    }

    pub fn papers_with_token(&self, token: &str) -> Option<&BTreeSet<String>> {
        self.tokens.get(token)
    }

    /// Reads `{paper_id, title, abstract, year}` lines.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut index = CorpusIndex::new();
        for line in jsonl::parse_lines(text)? {
            let year = line.get("year")?;
            let year = year
                .as_i64()
                .and_then(|y| i32::try_from(y).ok())
                .ok_or_else(|| line.invalid("year", "expected an integer year".to_string()))?;
            index.insert(
                &line.str("paper_id")?,
                PaperMeta {
                    title: line.str("title")?,
                    abstract_text: line.str("abstract")?,
                    year,
                },
            );
        }
        Ok(index)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

/// Papers whose title or abstract contains every query token.
pub fn find_candidates(query: &str, index: &CorpusIndex) -> Result<BTreeSet<String>> {
    let mut tokens: Vec<String> = tokenize(query).collect();
    if tokens.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "query `{query}` has no searchable tokens"
        )));
    }
    tokens.sort();
    tokens.dedup();
    let mut result: Option<BTreeSet<String>> = None;
    for token in &tokens {
        let Some(papers) = index.papers_with_token(token) else {
            return Ok(BTreeSet::new());
        };
        result = Some(match result {
            None => papers.clone(),
            Some(acc) => acc.intersection(papers).cloned().collect(),
        });
    }
    Ok(result.unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedGraph {
    pub graph: WeightedDigraph,
    /// Candidates that are not nodes of the source graph.
    pub unknown: usize,
}

/// Candidates plus their direct comparison neighbors, with every edge among
/// them.
pub fn induce_subgraph(graph: &WeightedDigraph, candidates: &BTreeSet<String>) -> InducedGraph {
    induce_subgraph_hops(graph, candidates, 1)
}

/// As [`induce_subgraph`] with a configurable neighbor closure depth.
pub fn induce_subgraph_hops(
    graph: &WeightedDigraph,
    candidates: &BTreeSet<String>,
    hops: usize,
) -> InducedGraph {
    let known: BTreeSet<String> = candidates.intersection(&graph.nodes).cloned().collect();
    let unknown = candidates.len() - known.len();

    let mut neighbors: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (w, b) in graph.edges.keys() {
        neighbors.entry(w).or_default().push(b);
        neighbors.entry(b).or_default().push(w);
    }
    let mut keep = known.clone();
    let mut frontier = known;
    for _ in 0..hops {
        let mut next = BTreeSet::new();
        for node in &frontier {
            for &n in neighbors.get(node.as_str()).into_iter().flatten() {
                if !keep.contains(n) {
                    next.insert(n.to_string());
                }
            }
        }
        if next.is_empty() {
            break;
        }
        keep.extend(next.iter().cloned());
        frontier = next;
    }

    let edges = graph
        .edges
        .iter()
        .filter(|((w, b), _)| keep.contains(w) && keep.contains(b))
        .map(|(k, &v)| (k.clone(), v))
        .collect();
    InducedGraph {
        graph: WeightedDigraph {
            nodes: keep,
            edges,
            scheme: graph.scheme,
            dummy: None,
        },
        unknown,
    }
}

/// Ranker, aggregation scheme and dummy mode of one leaderboard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeTag {
    pub ranker: Ranker,
    pub aggregation: Scheme,
    pub dummy: DummyMode,
}

impl Default for SchemeTag {
    fn default() -> Self {
        SchemeTag {
            ranker: Ranker::PageRank,
            aggregation: Scheme::SigmoidAvg,
            dummy: DummyMode::None,
        }
    }
}

/// Solver settings shared by every ranker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    pub pagerank: PageRankConfig,
    pub linear: LinearConfig,
    pub exponential: ExponentialConfig,
    /// Neighbor closure depth for induced subgraphs.
    pub hops: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            pagerank: PageRankConfig::default(),
            linear: LinearConfig::default(),
            exponential: ExponentialConfig::default(),
            hops: 1,
        }
    }
}

/// Runs `scheme` on a sanitized improvement graph.
///
/// Weighted rankers see the graph aggregated under `scheme.aggregation`,
/// with the dummy node attached when requested. Net wins use the raw
/// multi-edges and cocitation the compared pairs. Every node of `graph`
/// receives a score.
pub fn rank_graph(
    graph: &ImprovementGraph,
    scheme: &SchemeTag,
    opts: &RankOptions,
) -> Result<Scores> {
    match scheme.ranker {
        Ranker::Numeric => Ok(numeric_comparison_rank(graph)),
        Ranker::Cocitation => {
            let records: Vec<ComparisonRecord> = graph
                .edges
                .iter()
                .map(|e| ComparisonRecord {
                    metric: e.metric.clone(),
                    paper_lo: e.worse.clone(),
                    value_lo: e.score_worse,
                    paper_hi: e.better.clone(),
                    value_hi: e.score_better,
                    reporter: e.reporter.clone(),
                })
                .collect();
            let mut scores = cocitation_rank(&records);
            for n in &graph.nodes {
                scores.values.entry(n.clone()).or_insert(0.0);
            }
            Ok(scores)
        }
        _ => rank_weighted(&aggregate(graph, scheme.aggregation), scheme, opts),
    }
}

/// Runs a weighted ranker on an aggregated graph.
pub fn rank_weighted(
    graph: &WeightedDigraph,
    scheme: &SchemeTag,
    opts: &RankOptions,
) -> Result<Scores> {
    let with_dummy;
    let graph = if scheme.dummy == DummyMode::None || graph.dummy.is_some() {
        graph
    } else {
        with_dummy = add_dummy(graph, scheme.dummy)?;
        &with_dummy
    };
    let mut scores = match scheme.ranker {
        Ranker::PageRank => pagerank(graph, &opts.pagerank),
        Ranker::Sink => sink_nodes(graph),
        Ranker::Linear => linear_tournament(&to_match_stats(graph), &opts.linear),
        Ranker::Exponential => exponential_tournament(&to_match_stats(graph), &opts.exponential),
        Ranker::Numeric | Ranker::Cocitation => {
            return Err(Error::InvalidParameter(format!(
                "ranker `{}` needs the improvement graph, not an aggregated one",
                scheme.ranker
            )))
        }
    };
    if let Some(dummy) = &graph.dummy {
        scores.values.remove(dummy);
        scores.tiebreak.remove(dummy);
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub paper_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedLeaderboard {
    pub query: String,
    pub scheme: SchemeTag,
    pub k: usize,
    pub entries: Vec<LeaderboardEntry>,
    /// Candidates retrieved by text before graph filtering.
    pub candidates: usize,
    /// Candidates absent from the graph.
    pub unknown: usize,
}

impl RankedLeaderboard {
    pub fn paper_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.paper_id.as_str()).collect()
    }

    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            query: &'a str,
            ranker: Ranker,
            aggregation: Scheme,
            dummy: DummyMode,
            rank: usize,
            paper_id: &'a str,
            score: f64,
        }
        jsonl::to_string(self.entries.iter().map(|e| Line {
            query: &self.query,
            ranker: self.scheme.ranker,
            aggregation: self.scheme.aggregation,
            dummy: self.scheme.dummy,
            rank: e.rank,
            paper_id: &e.paper_id,
            score: e.score,
        }))
    }

    /// Aligned plain-text table; titles are shown when a corpus is given.
    pub fn to_text(&self, corpus: Option<&CorpusIndex>) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# query: {} | ranker: {} | aggregation: {} | dummy: {} | k: {}",
            self.query, self.scheme.ranker, self.scheme.aggregation, self.scheme.dummy, self.k
        );
        if self.entries.is_empty() {
            out.push_str("# no candidate papers\n");
            return out;
        }
        let scores: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{:.6}", e.score))
            .collect();
        let rank_w = self.entries.len().to_string().len().max("rank".len());
        let id_w = self
            .entries
            .iter()
            .map(|e| e.paper_id.chars().count())
            .max()
            .unwrap_or(0)
            .max("paper_id".len());
        let score_w = scores
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max("score".len());
        let _ = writeln!(
            out,
            "{:>rank_w$}  {:<id_w$}  {:>score_w$}  title",
            "rank", "paper_id", "score"
        );
        for (e, score) in self.entries.iter().zip(&scores) {
            let title = corpus
                .and_then(|c| c.papers.get(&e.paper_id))
                .map_or("", |m| m.title.as_str());
            let line = format!(
                "{:>rank_w$}  {:<id_w$}  {:>score_w$}  {title}",
                e.rank, e.paper_id, score
            );
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}

/// Two-phase leaderboard generation over a sanitized improvement graph.
pub fn generate(
    query: &str,
    scheme: &SchemeTag,
    k: usize,
    corpus: &CorpusIndex,
    graph: &ImprovementGraph,
    opts: &RankOptions,
) -> Result<RankedLeaderboard> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".to_string()));
    }
    let candidates = find_candidates(query, corpus)?;
    let mut board = RankedLeaderboard {
        query: query.to_string(),
        scheme: *scheme,
        k,
        entries: Vec::new(),
        candidates: candidates.len(),
        unknown: 0,
    };
    if candidates.is_empty() {
        return Ok(board);
    }

    let global = aggregate(graph, scheme.aggregation);
    let induced = induce_subgraph_hops(&global, &candidates, opts.hops);
    board.unknown = induced.unknown;
    let scores = if scheme.ranker.uses_weighted_graph() {
        rank_weighted(&induced.graph, scheme, opts)?
    } else {
        rank_graph(&graph.restrict(&induced.graph.nodes), scheme, opts)?
    };
    board.entries = top_candidates(&scores, &candidates, k);
    Ok(board)
}

/// Leaderboard generation over an already aggregated graph. Only the
/// weighted rankers apply; `scheme.aggregation` must match the graph.
pub fn generate_weighted(
    query: &str,
    scheme: &SchemeTag,
    k: usize,
    corpus: &CorpusIndex,
    graph: &WeightedDigraph,
    opts: &RankOptions,
) -> Result<RankedLeaderboard> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".to_string()));
    }
    if scheme.aggregation != graph.scheme {
        return Err(Error::InvalidParameter(format!(
            "graph is aggregated with {}, not {}",
            graph.scheme, scheme.aggregation
        )));
    }
    let candidates = find_candidates(query, corpus)?;
    let mut board = RankedLeaderboard {
        query: query.to_string(),
        scheme: *scheme,
        k,
        entries: Vec::new(),
        candidates: candidates.len(),
        unknown: 0,
    };
    if candidates.is_empty() {
        return Ok(board);
    }
    let mut base = graph.clone();
    if let Some(d) = base.dummy.take() {
        base.nodes.remove(&d);
        base.edges.retain(|(w, b), _| *w != d && *b != d);
    }
    let induced = induce_subgraph_hops(&base, &candidates, opts.hops);
    board.unknown = induced.unknown;
    let scores = rank_weighted(&induced.graph, scheme, opts)?;
    board.entries = top_candidates(&scores, &candidates, k);
    Ok(board)
}

fn top_candidates(
    scores: &Scores,
    candidates: &BTreeSet<String>,
    k: usize,
) -> Vec<LeaderboardEntry> {
    scores
        .order()
        .into_iter()
        .filter(|id| candidates.contains(*id))
        .take(k)
        .enumerate()
        .map(|(i, id)| LeaderboardEntry {
            rank: i + 1,
            paper_id: id.to_string(),
            score: scores.values[id],
        })
        .collect()
}
