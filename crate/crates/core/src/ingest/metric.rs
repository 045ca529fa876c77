use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Name used when a header contains nothing but markup and punctuation.
pub const UNKNOWN_METRIC: &str = "unknown-metric";

/// Whether a larger metric value is an improvement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Higher is better (accuracy, F1, BLEU, ...).
    Benefit,
    /// Lower is better (running time, error rate, perplexity, ...).
    Cost,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Benefit => f.write_str("benefit"),
            Polarity::Cost => f.write_str("cost"),
        }
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "benefit" | "higher" => Ok(Polarity::Benefit),
            "cost" | "lower" => Ok(Polarity::Cost),
            other => Err(Error::UnknownName {
                kind: "polarity",
                name: other.to_string(),
                expected: "benefit, cost".to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub name: String,
    pub polarity: Polarity,
}

const SEED_BENEFIT: &[&str] = &[
    "accuracy",
    "f1",
    "recall",
    "precision",
    "map",
    "auc",
    "bleu",
    "iou",
    "exact match",
];
const SEED_COST: &[&str] = &["time", "error", "perplexity", "wer"];

/// Canonical metric names and their polarity.
///
/// Lookup is exact first. Failing that, the longest registered name that
/// occurs as a whole-word phrase inside the queried name decides the
/// polarity, so `"top-1 error (%)"` resolves through `"error"`. Anything
/// else falls back to `default_polarity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRegistry {
    entries: BTreeMap<String, MetricSpec>,
    pub default_polarity: Polarity,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        let mut registry = MetricRegistry::empty();
        for name in SEED_BENEFIT {
            registry.insert(name, Polarity::Benefit);
        }
        for name in SEED_COST {
            registry.insert(name, Polarity::Cost);
        }
        registry
    }
}

impl MetricRegistry {
    pub fn empty() -> Self {
        MetricRegistry {
            entries: BTreeMap::new(),
            default_polarity: Polarity::Benefit,
        }
    }

    /// Registers `name` (normalized first) with the given polarity,
    /// replacing any previous entry.
    pub fn insert(&mut self, name: &str, polarity: Polarity) {
        let name = normalize_metric(name);
        self.entries
            .insert(name.clone(), MetricSpec { name, polarity });
    }

    pub fn entries(&self) -> impl Iterator<Item = &MetricSpec> {
        self.entries.values()
    }

    /// Canonical name for a raw header.
    pub fn canonical(&self, raw_header: &str) -> String {
        normalize_metric(raw_header)
    }

    /// Resolves a metric name to exactly one spec.
    ///
    /// The returned spec always carries the queried canonical name; only
    /// the polarity is borrowed from the matching entry.
    pub fn resolve(&self, name: &str) -> MetricSpec {
        let name = normalize_metric(name);
        if let Some(spec) = self.entries.get(&name) {
            return spec.clone();
        }
        let tokens = tokenize(&name);
        let polarity = self
            .entries
            .values()
            .filter(|spec| contains_phrase(&tokens, &tokenize(&spec.name)))
            .max_by(|a, b| {
                a.name
                    .len()
                    .cmp(&b.name.len())
                    .then_with(|| b.name.cmp(&a.name))
            })
            .map(|spec| spec.polarity)
            .unwrap_or(self.default_polarity);
        MetricSpec { name, polarity }
    }
}

fn tokenize(s: &str) -> Vec<&str> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect()
}

fn contains_phrase(haystack: &[&str], needle: &[&str]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Canonicalizes a raw column header.
///
/// LaTeX commands are dropped while their brace arguments are kept, math
/// `$` delimiters and braces disappear, escaped specials (`\%`, `\&`, `\_`,
/// `\#`) become the literal character, and `~` is a space. The result is
/// lowercased, stripped of surrounding whitespace and trailing/leading
/// separator punctuation, and has internal whitespace collapsed.
pub fn normalize_metric(raw_header: &str) -> String {
    let mut plain = String::with_capacity(raw_header.len());
    let mut chars = raw_header.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.peek().copied() {
                Some(next) if next.is_ascii_alphabetic() => {
                    while chars.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                        chars.next();
                    }
                    if chars.peek() == Some(&'*') {
                        chars.next();
                    }
                    plain.push(' ');
                }
                Some(next) => {
                    chars.next();
                    match next {
                        '%' | '&' | '_' | '#' => plain.push(next),
                        _ => plain.push(' '),
                    }
                }
                None => {}
            },
            '$' | '{' | '}' => {}
            '~' => plain.push(' '),
            c => plain.extend(c.to_lowercase()),
        }
    }

    let collapsed = plain.split_whitespace().collect::<Vec<_>>().join(" ");
    let trimmed = collapsed.trim_matches(|c: char| c.is_whitespace() || is_edge_punct(c));
    if trimmed.is_empty() {
        UNKNOWN_METRIC.to_string()
    } else {
        trimmed.to_string()
    }
}

fn is_edge_punct(c: char) -> bool {
    matches!(c, ':' | ';' | ',' | '.' | '*' | '^' | '†' | '‡' | '|' | '-')
}
