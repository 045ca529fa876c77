//! Leaderboard quality against organic (manually curated) leaderboards.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// An organic leaderboard: relevant papers, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    pub relevant: Vec<String>,
}

impl GroundTruth {
    pub fn from_jsonl(text: &str) -> Result<Vec<GroundTruth>> {
        jsonl::parse_lines(text)?
            .iter()
            .map(|line| {
                let relevant = line.str_list("relevant")?;
                if relevant.is_empty() {
                    return Err(line.invalid("relevant", "list is empty".to_string()));
                }
                let unique: BTreeSet<&String> = relevant.iter().collect();
                if unique.len() != relevant.len() {
                    return Err(line.invalid("relevant", "ids must be unique".to_string()));
                }
                let metric = match line.object.get("metric") {
                    None | Some(serde_json::Value::Null) => None,
                    Some(_) => Some(line.str("metric")?),
                };
                Ok(GroundTruth {
                    query: line.str("query")?,
                    metric,
                    relevant,
                })
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Vec<GroundTruth>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

/// Which relevant papers count in the recall denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallDenominator {
    /// Every relevant paper.
    #[default]
    AllRelevant,
    /// Only relevant papers known to the corpus.
    InCorpus,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".to_string()));
    }
    Ok(())
}

/// Fraction of `relevant` found among the first `k` ranked papers.
pub fn recall_at_k<S: AsRef<str>>(ranked: &[S], relevant: &[S], k: usize) -> Result<f64> {
    check_k(k)?;
    let truth: BTreeSet<&str> = relevant.iter().map(AsRef::as_ref).collect();
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let hits: BTreeSet<&str> = ranked
        .iter()
        .take(k)
        .map(AsRef::as_ref)
        .filter(|id| truth.contains(id))
        .collect();
    Ok(hits.len() as f64 / truth.len() as f64)
}

/// Recall with the denominator restricted to relevant papers in `corpus`.
pub fn recall_at_k_in_corpus<S: AsRef<str>>(
    ranked: &[S],
    relevant: &[S],
    k: usize,
    corpus: &BTreeSet<String>,
) -> Result<f64> {
    let present: Vec<&str> = relevant
        .iter()
        .map(AsRef::as_ref)
        .filter(|id| corpus.contains(*id))
        .collect();
    recall_at_k(
        &ranked.iter().map(AsRef::as_ref).collect::<Vec<_>>(),
        &present,
        k,
    )
}

/// NDCG@k with binary relevance. The ideal DCG places `min(k, |relevant|)`
/// hits at the top.
pub fn ndcg_at_k<S: AsRef<str>>(ranked: &[S], relevant: &[S], k: usize) -> Result<f64> {
    check_k(k)?;
    let truth: BTreeSet<&str> = relevant.iter().map(AsRef::as_ref).collect();
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let discount = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let mut seen = BTreeSet::new();
    let mut dcg = 0.0;
    for (i, id) in ranked.iter().take(k).enumerate() {
        let id = id.as_ref();
        if truth.contains(id) && seen.insert(id) {
            dcg += discount(i);
        }
    }
    let ideal: f64 = (0..k.min(truth.len())).map(discount).sum();
    Ok(dcg / ideal)
}

/// Ranks 1..n with ties sharing their average rank. Larger values get
/// larger ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantRanking);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman correlation of two paired score vectors: Pearson correlation of
/// their average-rank vectors.
pub fn spearman_scores(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "score vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::TooFewCommon(x.len()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Spearman correlation between two orderings (best first), restricted to
/// the papers present in both.
pub fn spearman<S: AsRef<str>>(ranked: &[S], truth_order: &[S]) -> Result<f64> {
    let position = |list: &[S]| -> BTreeMap<String, usize> {
        let mut pos = BTreeMap::new();
        for (i, id) in list.iter().enumerate() {
            pos.entry(id.as_ref().to_string()).or_insert(i);
        }
        pos
    };
    let a = position(ranked);
    let b = position(truth_order);
    let common: Vec<&String> = a.keys().filter(|id| b.contains_key(*id)).collect();
    if common.len() < 2 {
        return Err(Error::TooFewCommon(common.len()));
    }
    let x: Vec<f64> = common.iter().map(|id| a[*id] as f64).collect();
    let y: Vec<f64> = common.iter().map(|id| b[*id] as f64).collect();
    spearman_scores(&x, &y)
}

/// Kendall rank correlation (tau-a) of two paired score vectors.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::TooFewCommon(x.len().min(y.len())));
    }
    let n = x.len();
    let mut concordance = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let s = (x[i] - x[j]).signum() * (y[i] - y[j]).signum();
            concordance += s as i64;
        }
    }
    Ok(concordance as f64 / (n * (n - 1) / 2) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    pub recall: BTreeMap<usize, f64>,
    pub ndcg: BTreeMap<usize, f64>,
    pub spearman: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage {
    pub queries: usize,
    pub recall: BTreeMap<usize, f64>,
    pub ndcg: BTreeMap<usize, f64>,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub denominator: RecallDenominator,
    pub queries: Vec<QueryEval>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroAverage,
}

impl EvalReport {
    /// Queries that produced no metric at all.
    pub fn failed(&self) -> usize {
        self.queries.iter().filter(|q| q.recall.is_empty()).count()
    }
}

/// Scores generated leaderboards (query → ranked ids) against ground truth.
/// Recall and NDCG macro averages cover every query that has a leaderboard;
/// Spearman averages over queries where it is defined.
pub fn evaluate(
    leaderboards: &BTreeMap<String, Vec<String>>,
    truths: &[GroundTruth],
    ks: &[usize],
    denominator: RecallDenominator,
    corpus: Option<&BTreeSet<String>>,
) -> Result<EvalReport> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one k is required".to_string(),
        ));
    }
    for &k in ks {
        check_k(k)?;
    }
    let mut queries = Vec::new();
    for truth in truths {
        let mut q = QueryEval {
            query: truth.query.clone(),
            metric: truth.metric.clone(),
            recall: BTreeMap::new(),
            ndcg: BTreeMap::new(),
            spearman: None,
            errors: Vec::new(),
        };
        let Some(ranked) = leaderboards.get(&truth.query) else {
            q.errors
                .push(format!("no leaderboard for query `{}`", truth.query));
            queries.push(q);
            continue;
        };
        for &k in ks {
            let recall = match (denominator, corpus) {
                (RecallDenominator::InCorpus, Some(corpus)) => {
                    recall_at_k_in_corpus(ranked, &truth.relevant, k, corpus)
                }
                _ => recall_at_k(ranked, &truth.relevant, k),
            };
            match recall {
                Ok(v) => {
                    q.recall.insert(k, v);
                }
                Err(e) => q.errors.push(format!("recall@{k}: {e}")),
            }
            match ndcg_at_k(ranked, &truth.relevant, k) {
                Ok(v) => {
                    q.ndcg.insert(k, v);
                }
                Err(e) => q.errors.push(format!("ndcg@{k}: {e}")),
            }
        }
        match spearman(ranked, &truth.relevant) {
            Ok(v) => q.spearman = Some(v),
            Err(e) => q.errors.push(format!("spearman: {e}")),
        }
        queries.push(q);
    }

    let scored: Vec<&QueryEval> = queries.iter().filter(|q| !q.recall.is_empty()).collect();
    let mean_at = |pick: fn(&QueryEval) -> &BTreeMap<usize, f64>| -> BTreeMap<usize, f64> {
        ks.iter()
            .filter_map(|&k| {
                let vals: Vec<f64> = scored
                    .iter()
                    .filter_map(|q| pick(q).get(&k).copied())
                    .collect();
                (!vals.is_empty()).then(|| (k, vals.iter().sum::<f64>() / vals.len() as f64))
            })
            .collect()
    };
    let rhos: Vec<f64> = queries.iter().filter_map(|q| q.spearman).collect();
    let macro_avg = MacroAverage {
        queries: scored.len(),
        recall: mean_at(|q| &q.recall),
        ndcg: mean_at(|q| &q.ndcg),
        spearman: (!rhos.is_empty()).then(|| rhos.iter().sum::<f64>() / rhos.len() as f64),
    };
    Ok(EvalReport {
        ks: ks.to_vec(),
        denominator,
        queries,
        macro_avg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn recall_examples() {
        let truth = ids(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        assert_eq!(recall_at_k(&truth, &truth, 8).unwrap(), 1.0);
        assert_eq!(recall_at_k(&ids(&["x", "y"]), &truth, 2).unwrap(), 0.0);
        assert_eq!(
            recall_at_k(&ids(&["a", "x", "c", "y"]), &truth, 10).unwrap(),
            0.25
        );
        assert!(matches!(
            recall_at_k(&truth, &[], 3),
            Err(Error::EmptyTruth)
        ));
        assert!(recall_at_k(&truth, &truth, 0).is_err());
    }

    #[test]
    fn recall_in_corpus_denominator() {
        let corpus: BTreeSet<String> = ["a", "b", "x"].map(String::from).into();
        let truth = ids(&["a", "b", "c", "d"]);
        let ranked = ids(&["a", "x"]);
        assert_eq!(recall_at_k(&ranked, &truth, 5).unwrap(), 0.25);
        assert_eq!(
            recall_at_k_in_corpus(&ranked, &truth, 5, &corpus).unwrap(),
            0.5
        );
    }

    #[test]
    fn ndcg_examples() {
        let truth = ids(&["a", "b"]);
        assert_eq!(ndcg_at_k(&ids(&["a", "b", "x"]), &truth, 10).unwrap(), 1.0);
        assert_eq!(ndcg_at_k(&ids(&["x", "y"]), &truth, 10).unwrap(), 0.0);
        let v = ndcg_at_k(&ids(&["x", "a"]), &ids(&["a"]), 10).unwrap();
        assert!((v - 0.6309).abs() < 1e-4);
        assert!(matches!(ndcg_at_k(&truth, &[], 1), Err(Error::EmptyTruth)));
    }

    #[test]
    fn ndcg_can_drop_while_ideal_grows() {
        let truth = ids(&["a", "b"]);
        let ranked = ids(&["a", "x"]);
        assert_eq!(ndcg_at_k(&ranked, &truth, 1).unwrap(), 1.0);
        assert!(ndcg_at_k(&ranked, &truth, 2).unwrap() < 1.0);
    }

    #[test]
    fn spearman_examples() {
        let a = ids(&["1", "2", "3", "4"]);
        assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let rev = ids(&["4", "3", "2", "1"]);
        assert!((spearman(&a, &rev).unwrap() + 1.0).abs() < 1e-12);
        let swapped = ids(&["2", "1", "4", "3"]);
        assert!((spearman(&a, &swapped).unwrap() - 0.6).abs() < 1e-12);
        assert!(matches!(
            spearman(&a, &ids(&["1", "z"])),
            Err(Error::TooFewCommon(1))
        ));
    }

    #[test]
    fn spearman_uses_intersection() {
        let ranked = ids(&["a", "x", "b", "c"]);
        let truth = ids(&["a", "b", "y", "c"]);
        assert!((spearman(&ranked, &truth).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 30.0]),
            [1.5, 3.0, 1.5, 4.0]
        );
    }

    #[test]
    fn kendall() {
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(),
            1.0
        );
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0
        );
    }

    #[test]
    fn evaluate_macro_and_errors() {
        let mut boards = BTreeMap::new();
        boards.insert("q1".to_string(), ids(&["a", "b"]));
        boards.insert("q2".to_string(), ids(&["x", "y"]));
        let truths = vec![
            GroundTruth {
                query: "q1".into(),
                metric: None,
                relevant: ids(&["a", "b"]),
            },
            GroundTruth {
                query: "q2".into(),
                metric: Some("f1".into()),
                relevant: ids(&["y", "z"]),
            },
            GroundTruth {
                query: "q3".into(),
                metric: None,
                relevant: ids(&["a"]),
            },
        ];
        let report = evaluate(
            &boards,
            &truths,
            &[1, 10],
            RecallDenominator::AllRelevant,
            None,
        )
        .unwrap();
        assert_eq!(report.queries.len(), 3);
        assert_eq!(report.failed(), 1);
        assert_eq!(report.queries[0].recall[&10], 1.0);
        assert_eq!(report.queries[1].recall[&10], 0.5);
        assert_eq!(report.macro_avg.recall[&10], 0.75);
        // q2 shares only one paper with its truth
        assert!(report.queries[1].spearman.is_none());
        assert_eq!(report.macro_avg.spearman, Some(1.0));
    }

    #[test]
    fn truth_file_validation() {
        let ok = r#"{"query":"q","metric":"f1","relevant":["a","b"]}"#;
        assert_eq!(GroundTruth::from_jsonl(ok).unwrap()[0].relevant.len(), 2);
        assert!(GroundTruth::from_jsonl(r#"{"query":"q","relevant":[]}"#).is_err());
        assert!(GroundTruth::from_jsonl(r#"{"query":"q","relevant":["a","a"]}"#).is_err());
    }

    proptest! {
        #[test]
        fn metrics_monotone_in_k(
            ranked in proptest::collection::vec(0u8..12, 0..12),
            relevant in proptest::collection::btree_set(0u8..12, 1..6),
        ) {
            let ranked: Vec<String> = ranked.iter().map(|x| x.to_string()).collect();
            let relevant: Vec<String> = relevant.iter().map(|x| x.to_string()).collect();
            let mut prev = (0.0, 0.0);
            for k in 1..15 {
                let r = recall_at_k(&ranked, &relevant, k).unwrap();
                let n = ndcg_at_k(&ranked, &relevant, k).unwrap();
                prop_assert!((0.0..=1.0).contains(&r));
                prop_assert!((0.0..=1.0 + 1e-12).contains(&n));
                prop_assert!(r >= prev.0);
                // once k covers every relevant paper the ideal DCG is fixed
                if k > relevant.len() {
                    prop_assert!(n >= prev.1);
                }
                prev = (r, n);
            }
        }

        #[test]
        fn spearman_symmetric_and_reflexive(perm in Just((0..8).collect::<Vec<u32>>()).prop_shuffle()) {
            let base: Vec<String> = (0..8).map(|x: u32| x.to_string()).collect();
            let other: Vec<String> = perm.iter().map(|x| x.to_string()).collect();
            prop_assert!((spearman(&base, &base).unwrap() - 1.0).abs() < 1e-12);
            prop_assert_eq!(spearman(&base, &other).unwrap(), spearman(&other, &base).unwrap());
        }
    }
}
