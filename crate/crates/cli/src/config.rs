use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use perfgraph::leaderboard::RankOptions;
use perfgraph::rankers::{PageRankConfig, Ranker};
use perfgraph::sanitize::{DummyMode, Scheme, DEFAULT_REI_THRESHOLD};
use serde::Deserialize;

/// Pipeline settings. Values come from defaults, then the config file, then
/// command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub rei_threshold: f64,
    pub aggregation: Scheme,
    pub dummy: DummyMode,
    pub pagerank: PageRankConfig,
    pub ranker: Ranker,
    pub k: usize,
    pub hops: usize,
    pub corpus: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rei_threshold: DEFAULT_REI_THRESHOLD,
            aggregation: Scheme::SigmoidAvg,
            dummy: DummyMode::None,
            pagerank: PageRankConfig::default(),
            ranker: Ranker::PageRank,
            k: 50,
            hops: 1,
            corpus: None,
            records: None,
            graph: None,
            truth: None,
        }
    }
}

/// The flat key-value config file. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rei_threshold: Option<f64>,
    aggregation: Option<String>,
    dummy: Option<String>,
    pagerank_alpha: Option<f64>,
    pagerank_tol: Option<f64>,
    pagerank_max_iter: Option<usize>,
    ranker: Option<String>,
    k: Option<usize>,
    hops: Option<usize>,
    corpus: Option<PathBuf>,
    records: Option<PathBuf>,
    graph: Option<PathBuf>,
    truth: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        let mut cfg = PipelineConfig::default();
        let rel = |p: PathBuf| if p.is_relative() { base_dir.join(p) } else { p };
        if let Some(v) = file.rei_threshold {
            cfg.rei_threshold = v;
        }
        if let Some(v) = file.aggregation {
            cfg.aggregation = v.parse()?;
        }
        if let Some(v) = file.dummy {
            cfg.dummy = v.parse()?;
        }
        if let Some(v) = file.pagerank_alpha {
            cfg.pagerank.damping = v;
        }
        if let Some(v) = file.pagerank_tol {
            cfg.pagerank.tolerance = v;
        }
        if let Some(v) = file.pagerank_max_iter {
            cfg.pagerank.max_iterations = v;
        }
        if let Some(v) = file.ranker {
            cfg.ranker = v.parse()?;
        }
        if let Some(v) = file.k {
            cfg.k = v;
        }
        if let Some(v) = file.hops {
            cfg.hops = v;
        }
        cfg.corpus = file.corpus.map(rel);
        cfg.records = file.records.map(rel);
        cfg.graph = file.graph.map(rel);
        cfg.truth = file.truth.map(rel);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(
            self.rei_threshold > 0.0,
            "rei_threshold must be positive, got {}",
            self.rei_threshold
        );
        let alpha = self.pagerank.damping;
        anyhow::ensure!(
            alpha > 0.0 && alpha < 1.0,
            "pagerank_alpha must be in (0, 1), got {alpha}"
        );
        anyhow::ensure!(
            self.pagerank.tolerance > 0.0,
            "pagerank_tol must be positive"
        );
        anyhow::ensure!(self.k >= 1, "k must be at least 1");
        Ok(())
    }

    pub fn rank_options(&self) -> RankOptions {
        RankOptions {
            pagerank: self.pagerank,
            hops: self.hops,
            ..RankOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.rei_threshold, 1.0);
        assert_eq!(cfg.aggregation, Scheme::SigmoidAvg);
        assert_eq!(cfg.dummy, DummyMode::None);
        assert_eq!(cfg.pagerank.damping, 0.90);
        assert_eq!(cfg.pagerank.tolerance, 1e-10);
        assert_eq!(cfg.pagerank.max_iterations, 200);
        assert_eq!(cfg.ranker, Ranker::PageRank);
        assert_eq!(cfg.k, 50);
    }

    #[test]
    fn file_values_and_relative_paths() {
        let text = r#"
            rei_threshold = 10.0
            aggregation = "ALL"
            dummy = "winner"
            ranker = "exponential"
            k = 5
            corpus = "corpus.jsonl"
        "#;
        let cfg = PipelineConfig::from_toml(text, Path::new("/data")).unwrap();
        assert_eq!(cfg.rei_threshold, 10.0);
        assert_eq!(cfg.aggregation, Scheme::All);
        assert_eq!(cfg.dummy, DummyMode::Winner);
        assert_eq!(cfg.ranker, Ranker::Exponential);
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.corpus, Some(PathBuf::from("/data/corpus.jsonl")));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(PipelineConfig::from_toml("alpha = 0.5", Path::new(".")).is_err());
        assert!(PipelineConfig::from_toml("ranker = \"hits\"", Path::new(".")).is_err());
        assert!(PipelineConfig::from_toml("pagerank_alpha = 1.5", Path::new(".")).is_err());
        assert!(PipelineConfig::from_toml("k = 0", Path::new(".")).is_err());
    }
}
