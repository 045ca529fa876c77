//! Command-line pipeline: `extract`, `build`, `rank`, `leaderboard`, `eval`.

pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use perfgraph::eval::{evaluate, EvalReport, GroundTruth, RecallDenominator};
use perfgraph::graph::{build_raw_graph, ImprovementGraph};
use perfgraph::ingest::{extract_document, load_records, records_to_string, MetricRegistry};
use perfgraph::jsonl;
use perfgraph::leaderboard::{
    generate, generate_weighted, rank_graph, rank_weighted, CorpusIndex, RankedLeaderboard,
    SchemeTag,
};
use perfgraph::rankers::{Ranker, Scores};
use perfgraph::sanitize::{aggregate, prune_outliers, DummyMode, Scheme, WeightedDigraph};

pub use config::PipelineConfig;

pub const RAW_GRAPH_FILE: &str = "raw.jsonl";
pub const SANITIZED_GRAPH_FILE: &str = "sanitized.jsonl";
pub const AGGREGATED_GRAPH_FILE: &str = "aggregated.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(
    name = "perfgraph",
    version,
    about = "Leaderboards from paper comparison tables"
)]
pub struct Cli {
    /// Flat TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format where a command supports both.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file (or directory for `build`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract comparison records from a directory of .tex files.
    Extract {
        /// Directory searched recursively for .tex sources.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Build raw, sanitized and aggregated graphs from a records file.
    Build {
        #[arg(long)]
        records: Option<PathBuf>,
        /// Edges with REI above this value are pruned.
        #[arg(long)]
        rei_threshold: Option<f64>,
        /// Keep every edge regardless of REI.
        #[arg(long, conflicts_with = "rei_threshold")]
        no_prune: bool,
        #[arg(long)]
        aggregation: Option<Scheme>,
    },
    /// Score every paper of a graph.
    Rank {
        /// Graph file, or a `build` output directory.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        rank: RankFlags,
    },
    /// Generate leaderboards for text queries.
    Leaderboard {
        /// Query text; repeat for several leaderboards.
        #[arg(long, required = true)]
        query: Vec<String>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Graph file, or a `build` output directory.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// Neighbor closure depth of the induced graph.
        #[arg(long)]
        hops: Option<usize>,
        #[command(flatten)]
        rank: RankFlags,
    },
    /// Score leaderboards against ground truth.
    Eval {
        /// JSON-lines leaderboard file written by `leaderboard --format json`.
        #[arg(long)]
        leaderboard: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Cutoffs, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10,20")]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value = "all")]
        denominator: Denominator,
        /// Corpus file; required with `--denominator in-corpus`.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Denominator {
    All,
    InCorpus,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RankFlags {
    /// One of: sink, cocitation, numeric, linear, exponential, pagerank.
    #[arg(long)]
    pub ranker: Option<Ranker>,
    /// One of: UNW, ALL, SIG_AVG, SIG_MAX.
    #[arg(long)]
    pub aggregation: Option<Scheme>,
    /// One of: none, winner, loser.
    #[arg(long)]
    pub dummy: Option<DummyMode>,
    /// PageRank damping factor.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// PageRank L1 tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// PageRank iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl RankFlags {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(r) = self.ranker {
            cfg.ranker = r;
        }
        if let Some(a) = self.aggregation {
            cfg.aggregation = a;
        }
        if let Some(d) = self.dummy {
            cfg.dummy = d;
        }
        if let Some(a) = self.alpha {
            cfg.pagerank.damping = a;
        }
        if let Some(t) = self.tol {
            cfg.pagerank.tolerance = t;
        }
        if let Some(m) = self.max_iter {
            cfg.pagerank.max_iterations = m;
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The command finished but every unit of work failed.
    AllFailed,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let out = cli.out.as_deref();
    match cli.command {
        Command::Extract { input } => {
            cmd_extract(&input, out)?;
            Ok(Outcome::Success)
        }
        Command::Build {
            records,
            rei_threshold,
            no_prune,
            aggregation,
        } => {
            if let Some(t) = rei_threshold {
                cfg.rei_threshold = t;
            }
            if no_prune {
                cfg.rei_threshold = f64::INFINITY;
            }
            if let Some(a) = aggregation {
                cfg.aggregation = a;
            }
            cfg.records = records.or(cfg.records);
            cfg.validate()?;
            let records = cfg
                .records
                .clone()
                .context("no records file given (--records)")?;
            let out = out.context("build needs an output directory (--out)")?;
            cmd_build(&records, out, &cfg)?;
            Ok(Outcome::Success)
        }
        Command::Rank { graph, rank } => {
            rank.apply(&mut cfg);
            cfg.graph = graph.or(cfg.graph);
            cfg.validate()?;
            let graph = cfg.graph.clone().context("no graph given (--graph)")?;
            let text = cmd_rank(&graph, &cfg, cli.format.unwrap_or(Format::Json))?;
            emit(out, &text)?;
            Ok(Outcome::Success)
        }
        Command::Leaderboard {
            query,
            corpus,
            graph,
            k,
            hops,
            rank,
        } => {
            rank.apply(&mut cfg);
            if let Some(k) = k {
                cfg.k = k;
            }
            if let Some(h) = hops {
                cfg.hops = h;
            }
            cfg.corpus = corpus.or(cfg.corpus);
            cfg.graph = graph.or(cfg.graph);
            cfg.validate()?;
            let boards = cmd_leaderboard(&query, &cfg)?;
            let corpus = CorpusIndex::load(cfg.corpus.as_deref().context("no corpus")?)?;
            let text = render_leaderboards(&boards, cli.format.unwrap_or(Format::Text), &corpus);
            for board in boards.iter().filter(|b| b.entries.is_empty()) {
                eprintln!("notice: no candidate papers for query `{}`", board.query);
            }
            emit(out, &text)?;
            Ok(Outcome::Success)
        }
        Command::Eval {
            leaderboard,
            truth,
            k,
            denominator,
            corpus,
        } => {
            cfg.truth = truth.or(cfg.truth);
            cfg.corpus = corpus.or(cfg.corpus);
            let truth = cfg
                .truth
                .clone()
                .context("no ground-truth file given (--truth)")?;
            let denominator = match denominator {
                Denominator::All => RecallDenominator::AllRelevant,
                Denominator::InCorpus => RecallDenominator::InCorpus,
            };
            let report = cmd_eval(&leaderboard, &truth, &k, denominator, cfg.corpus.as_deref())?;
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
                Format::Text => render_report(&report),
            };
            emit(out, &text)?;
            for q in &report.queries {
                for e in &q.errors {
                    eprintln!("query `{}`: {e}", q.query);
                }
            }
            if !report.queries.is_empty() && report.failed() == report.queries.len() {
                return Ok(Outcome::AllFailed);
            }
            Ok(Outcome::Success)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Summary of an extraction run.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct ExtractReport {
    pub files: usize,
    pub skipped: usize,
    pub tables: usize,
    pub records: usize,
    pub warnings: usize,
}

fn tex_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries =
            fs::read_dir(&d).with_context(|| format!("reading directory {}", d.display()))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "tex") {
                files.push(path);
            }
        }
    }
    files.sort();
    Ok(files)
}

/// Reporter id of a source file: its path below the input directory,
/// without the `.tex` extension.
fn reporter_id(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).unwrap_or(file).with_extension("");
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn cmd_extract(input: &Path, out: Option<&Path>) -> Result<ExtractReport> {
    let registry = MetricRegistry::default();
    let mut report = ExtractReport::default();
    let mut records = Vec::new();
    for file in tex_files(input)? {
        let source = match fs::read(&file) {
            Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", file.display());
                report.skipped += 1;
                continue;
            }
        };
        report.files += 1;
        let reporter = reporter_id(input, &file);
        let doc = extract_document(&source, &reporter, &registry);
        for w in &doc.warnings {
            eprintln!("warning: {}:{}: {}", file.display(), w.line, w.message);
        }
        report.tables += doc.tables;
        report.warnings += doc.warnings.len();
        records.extend(doc.records);
    }
    report.records = records.len();
    emit(out, &records_to_string(&records))?;
    eprintln!("{}", serde_json::to_string(&report)?);
    Ok(report)
}

/// Counts written to `summary.json` by `build`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BuildSummary {
    pub records: usize,
    pub nodes: usize,
    pub metrics: usize,
    pub raw_edges: usize,
    pub pruned: usize,
    pub sanitized_edges: usize,
    pub aggregated_edges: usize,
    pub aggregation: Scheme,
    pub rei_threshold: Option<f64>,
    pub drops: perfgraph::graph::DropReport,
}

pub fn cmd_build(
    records_path: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
) -> Result<BuildSummary> {
    let records = load_records(records_path)
        .with_context(|| format!("reading records {}", records_path.display()))?;
    let registry = MetricRegistry::default();
    let (raw, drops) = build_raw_graph(&records, &registry);
    let sanitized = prune_outliers(&raw, cfg.rei_threshold);
    let aggregated = aggregate(&sanitized, cfg.aggregation);

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    raw.save(&out_dir.join(RAW_GRAPH_FILE))?;
    sanitized.save(&out_dir.join(SANITIZED_GRAPH_FILE))?;
    aggregated.save(&out_dir.join(AGGREGATED_GRAPH_FILE))?;

    let summary = BuildSummary {
        records: records.len(),
        nodes: raw.nodes.len(),
        metrics: raw.metrics.len(),
        raw_edges: raw.edges.len(),
        pruned: raw.edges.len() - sanitized.edges.len(),
        sanitized_edges: sanitized.edges.len(),
        aggregated_edges: aggregated.edges.len(),
        aggregation: cfg.aggregation,
        rei_threshold: cfg.rei_threshold.is_finite().then_some(cfg.rei_threshold),
        drops,
    };
    let text = format!("{}\n", serde_json::to_string_pretty(&summary)?);
    jsonl::write_text(&out_dir.join(SUMMARY_FILE), &text)?;
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(summary)
}

/// A graph file of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphInput {
    Improvement(ImprovementGraph),
    Weighted(WeightedDigraph),
}

/// Loads a graph dump; a directory means its sanitized graph.
pub fn load_graph(path: &Path) -> Result<GraphInput> {
    let file = if path.is_dir() {
        path.join(SANITIZED_GRAPH_FILE)
    } else {
        path.to_path_buf()
    };
    let text =
        fs::read_to_string(&file).with_context(|| format!("reading graph {}", file.display()))?;
    let kind = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string));
    let graph = match kind.as_deref() {
        Some("weighted") => GraphInput::Weighted(WeightedDigraph::from_jsonl(&text)?),
        Some("improvement") | None => GraphInput::Improvement(ImprovementGraph::from_jsonl(&text)?),
        Some(other) => bail!("{}: unknown graph kind `{other}`", file.display()),
    };
    Ok(graph)
}

fn scheme_tag(cfg: &PipelineConfig) -> SchemeTag {
    SchemeTag {
        ranker: cfg.ranker,
        aggregation: cfg.aggregation,
        dummy: cfg.dummy,
    }
}

pub fn rank_scores(graph: &GraphInput, cfg: &PipelineConfig) -> Result<Scores> {
    let opts = cfg.rank_options();
    let scores = match graph {
        GraphInput::Improvement(g) => rank_graph(g, &scheme_tag(cfg), &opts)?,
        GraphInput::Weighted(g) => {
            let tag = SchemeTag {
                aggregation: g.scheme,
                ..scheme_tag(cfg)
            };
            rank_weighted(g, &tag, &opts)?
        }
    };
    Ok(scores)
}

pub fn cmd_rank(graph_path: &Path, cfg: &PipelineConfig, format: Format) -> Result<String> {
    let graph = load_graph(graph_path)?;
    let scores = rank_scores(&graph, cfg)?;
    Ok(match format {
        Format::Json => scores.to_jsonl(),
        Format::Text => render_scores(&scores),
    })
}

fn render_scores(scores: &Scores) -> String {
    let mut out = String::new();
    let ranked = scores.ranked();
    let id_w = ranked
        .iter()
        .map(|e| e.paper_id.len())
        .max()
        .unwrap_or(0)
        .max(8);
    let _ = writeln!(out, "{:>6}  {:<id_w$}  score", "rank", "paper_id");
    for e in &ranked {
        let _ = writeln!(out, "{:>6}  {:<id_w$}  {:.10}", e.rank, e.paper_id, e.score);
    }
    let d = scores.diagnostics;
    let _ = writeln!(
        out,
        "# ranker: {} | iterations: {} | residual: {:e} | converged: {}",
        scores.ranker, d.iterations, d.residual, d.converged
    );
    out
}

pub fn cmd_leaderboard(queries: &[String], cfg: &PipelineConfig) -> Result<Vec<RankedLeaderboard>> {
    let corpus_path = cfg
        .corpus
        .as_deref()
        .context("no corpus file given (--corpus)")?;
    let graph_path = cfg.graph.as_deref().context("no graph given (--graph)")?;
    let corpus = CorpusIndex::load(corpus_path)
        .with_context(|| format!("reading corpus {}", corpus_path.display()))?;
    let graph = load_graph(graph_path)?;
    let opts = cfg.rank_options();
    queries
        .iter()
        .map(|q| {
            let board = match &graph {
                GraphInput::Improvement(g) => {
                    generate(q, &scheme_tag(cfg), cfg.k, &corpus, g, &opts)?
                }
                GraphInput::Weighted(g) => {
                    let tag = SchemeTag {
                        aggregation: g.scheme,
                        ..scheme_tag(cfg)
                    };
                    generate_weighted(q, &tag, cfg.k, &corpus, g, &opts)?
                }
            };
            Ok(board)
        })
        .collect()
}

pub fn render_leaderboards(
    boards: &[RankedLeaderboard],
    format: Format,
    corpus: &CorpusIndex,
) -> String {
    match format {
        Format::Json => boards.iter().map(RankedLeaderboard::to_jsonl).collect(),
        Format::Text => boards
            .iter()
            .map(|b| b.to_text(Some(corpus)))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

/// Groups a leaderboard JSON-lines file by query, in rank order.
pub fn read_leaderboards(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let mut grouped: BTreeMap<String, Vec<(u64, String)>> = BTreeMap::new();
    for line in jsonl::read_lines(path)? {
        grouped
            .entry(line.str("query")?)
            .or_default()
            .push((line.u64("rank")?, line.str("paper_id")?));
    }
    Ok(grouped
        .into_iter()
        .map(|(q, mut entries)| {
            entries.sort();
            (q, entries.into_iter().map(|(_, id)| id).collect())
        })
        .collect())
}

pub fn cmd_eval(
    leaderboard: &Path,
    truth: &Path,
    ks: &[usize],
    denominator: RecallDenominator,
    corpus: Option<&Path>,
) -> Result<EvalReport> {
    let boards = read_leaderboards(leaderboard)
        .with_context(|| format!("reading leaderboard {}", leaderboard.display()))?;
    let truths =
        GroundTruth::load(truth).with_context(|| format!("reading truth {}", truth.display()))?;
    let corpus_ids = match (denominator, corpus) {
        (RecallDenominator::InCorpus, None) => bail!("--denominator in-corpus needs --corpus"),
        (_, Some(path)) => Some(CorpusIndex::load(path)?.papers.into_keys().collect()),
        (_, None) => None,
    };
    Ok(evaluate(
        &boards,
        &truths,
        ks,
        denominator,
        corpus_ids.as_ref(),
    )?)
}

fn render_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    let mut header = format!("{:<32}", "query");
    for k in &report.ks {
        let _ = write!(
            header,
            "  {:>9}  {:>9}",
            format!("R@{k}"),
            format!("NDCG@{k}")
        );
    }
    let _ = writeln!(out, "{header}  {:>8}", "spearman");
    let mut row = |name: &str,
                   recall: &BTreeMap<usize, f64>,
                   ndcg: &BTreeMap<usize, f64>,
                   rho: Option<f64>| {
        let mut line = format!("{name:<32}");
        for k in &report.ks {
            let _ = write!(
                line,
                "  {:>9}  {:>9}",
                fmt_opt(recall.get(k).copied()),
                fmt_opt(ndcg.get(k).copied())
            );
        }
        let _ = writeln!(out, "{line}  {:>8}", fmt_opt(rho));
    };
    for q in &report.queries {
        let name = match &q.metric {
            Some(m) => format!("{} [{m}]", q.query),
            None => q.query.clone(),
        };
        row(&name, &q.recall, &q.ndcg, q.spearman);
    }
    let m = &report.macro_avg;
    row(
        &format!("macro ({} queries)", m.queries),
        &m.recall,
        &m.ndcg,
        m.spearman,
    );
    out
}

/// Build summary line, used by tests that compare runs.
pub fn summary_json(summary: &BuildSummary) -> serde_json::Value {
    json!(summary)
}
