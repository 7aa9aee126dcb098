//! Command-line surface: `parse`, `compare`, `evaluate`, `combine`.
//!
//! Exit codes are part of the contract:
//!   2  unreadable or malformed input (text, graph, corpus, config, embeddings)
//!   3  missing or malformed lexicon
//!   4  candidate-cap overflow during matching
//!   5  external scores missing (flag, file, or pair)
//!   1  anything else
//!
//! stdout carries only the machine-readable payload; warnings and the
//! human-readable report table go to stderr.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gest_core::embed::EmbeddingTable;
use gest_core::matching::{
    self, build_affinity, sm_match, MatchConfig, MatchError,
};
use gest_core::model::GestGraph;
use gest_core::text::{parse_text, Lexicon};

use crate::corpus::{load_corpus, make_pairs, Corpus};
use crate::embeddings::load_embeddings;
use crate::json::{self, MatchConfigJson};
use crate::lexicon::load_lexicon;
use crate::report::{self, EvalReport};
use crate::table::{
    apply_external, load_external_scores, score_pairs, Metric, ScoreContext, ScoreTable,
};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> CliError {
        CliError {
            code,
            message: message.into(),
        }
    }
}

fn match_error(e: MatchError) -> CliError {
    let code = match e {
        MatchError::CandidateCapExceeded { .. } => 4,
        _ => 1,
    };
    CliError::new(code, e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "gest", about = "Story graphs: parse, compare, evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse controlled English into a story graph.
    Parse(ParseArgs),
    /// Score the similarity of two graphs (or texts).
    Compare(CompareArgs),
    /// Score a corpus and report discrimination metrics.
    Evaluate(EvaluateArgs),
    /// Fit a linear combination of two metrics on one corpus, report on another.
    Combine(CombineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Canonical,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Input text file; stdin when omitted.
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Graph (.json / .gest) or text file.
    pub a: PathBuf,
    /// Graph (.json / .gest) or text file.
    pub b: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Embedding dimension the file must have.
    #[arg(long)]
    pub dim: usize,
    /// Load at most this many words.
    #[arg(long)]
    pub vocab_limit: Option<usize>,
    /// Needed when an input is a text file.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Matching configuration: inline JSON or a path to a JSON file.
    #[arg(long)]
    pub config: Option<String>,
    /// Also print the node assignment with per-pair affinities.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Corpus JSONL file.
    pub corpus: PathBuf,
    /// Comma-separated: gest-sm, bleu4, rouge-l, external:<name>.
    #[arg(long, value_delimiter = ',', required = true)]
    pub metrics: Vec<String>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub vocab_limit: Option<usize>,
    /// Needed when gest-sm is requested and a record has only text.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Negatives sampled per positive pair; 0 keeps all cross-source pairs.
    #[arg(long, default_value_t = 0)]
    pub neg_per_pos: usize,
    /// Worker threads for pair scoring (never changes the output).
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Matching configuration: inline JSON or a path to a JSON file.
    #[arg(long)]
    pub config: Option<String>,
    /// External score columns, repeatable: --external name=scores.csv
    #[arg(long, value_name = "NAME=CSV")]
    pub external: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// Corpus JSONL the combination weight is fitted on.
    #[arg(long)]
    pub train: PathBuf,
    /// Corpus JSONL the combined metric is reported on.
    #[arg(long)]
    pub eval: PathBuf,
    #[arg(long)]
    pub metric_a: String,
    #[arg(long)]
    pub metric_b: String,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub vocab_limit: Option<usize>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub neg_per_pos: usize,
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long, value_name = "NAME=CSV")]
    pub external: Vec<String>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Combine(args) => cmd_combine(args),
    }
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::new(2, format!("cannot read {}: {e}", path.display()))),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::new(2, format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn load_lexicon_arg(path: &Path) -> Result<Lexicon, CliError> {
    load_lexicon(path).map_err(|e| CliError::new(3, e.to_string()))
}

fn load_config_arg(arg: Option<&str>) -> Result<MatchConfig, CliError> {
    let Some(arg) = arg else {
        return Ok(MatchConfig::default());
    };
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::new(2, format!("cannot read config {arg}: {e}")))?
    };
    let parsed: MatchConfigJson = serde_json::from_str(&text)
        .map_err(|e| CliError::new(2, format!("malformed config: {e}")))?;
    let config = MatchConfig::from(parsed);
    config
        .validate()
        .map_err(|e| CliError::new(2, e.to_string()))?;
    Ok(config)
}

fn cmd_parse(args: ParseArgs) -> Result<(), CliError> {
    let lexicon = load_lexicon_arg(&args.lexicon)?;
    let text = read_input(args.input.as_deref())?;
    let parsed = parse_text(&text, &lexicon);
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    match args.format {
        Format::Json => {
            println!("{}", json::graph_to_json(&parsed.graph));
        }
        Format::Canonical => {
            print!("{}", parsed.graph.to_canonical_string());
        }
    }
    Ok(())
}

/// Reads a compare input: `.json` is a graph in JSON form, `.gest` a
/// canonical string, anything else controlled English (needs --lexicon).
fn load_compare_input(path: &Path, lexicon: Option<&Lexicon>) -> Result<GestGraph, CliError> {
    let contents = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(2, format!("cannot read {}: {e}", path.display())))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "json" => json::graph_from_json(&contents)
            .map_err(|e| CliError::new(2, format!("{}: {e}", path.display()))),
        "gest" => gest_core::canonical::parse_canonical_string(&contents)
            .map_err(|e| CliError::new(2, format!("{}: {e}", path.display()))),
        _ => {
            let lexicon = lexicon.ok_or_else(|| {
                CliError::new(3, format!("--lexicon required to parse {}", path.display()))
            })?;
            let parsed = parse_text(&contents, lexicon);
            for warning in &parsed.warnings {
                eprintln!("warning: {}: {warning}", path.display());
            }
            Ok(parsed.graph)
        }
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let embeddings = load_embeddings(&args.embeddings, args.dim, args.vocab_limit)
        .map_err(|e| CliError::new(2, e.to_string()))?;
    let config = load_config_arg(args.config.as_deref())?;
    let lexicon = match &args.lexicon {
        Some(path) => Some(load_lexicon_arg(path)?),
        None => None,
    };
    let a = load_compare_input(&args.a, lexicon.as_ref())?;
    let b = load_compare_input(&args.b, lexicon.as_ref())?;
    let score = matching::graph_similarity(&a, &b, &embeddings, &config).map_err(match_error)?;
    println!("{score:.6}");
    if args.explain {
        explain_assignment(&a, &b, &embeddings, &config)?;
    }
    Ok(())
}

/// Prints one line per assigned node pair: ids from each input and the
/// pair's node affinity (the matching's diagonal term).
fn explain_assignment(
    a: &GestGraph,
    b: &GestGraph,
    embeddings: &EmbeddingTable,
    config: &MatchConfig,
) -> Result<(), CliError> {
    if a.is_empty() || b.is_empty() {
        return Ok(());
    }
    // Same orientation rule as the score, so the explanation matches it.
    let swapped = a.to_canonical_string() > b.to_canonical_string();
    let (g1, g2) = if swapped { (b, a) } else { (a, b) };
    let assignment = sm_match(g1, g2, embeddings, config).map_err(match_error)?;
    let m = build_affinity(g1, g2, embeddings, config).map_err(match_error)?;
    let ids1: Vec<&str> = g1.events().map(|e| e.id.as_str()).collect();
    let ids2: Vec<&str> = g2.events().map(|e| e.id.as_str()).collect();
    let mut lines: Vec<(String, String, f64)> = assignment
        .pairs
        .iter()
        .map(|&(i, x)| {
            let p = m.candidate(i, x);
            let affinity = m.get(p, p);
            if swapped {
                (ids2[x].to_string(), ids1[i].to_string(), affinity)
            } else {
                (ids1[i].to_string(), ids2[x].to_string(), affinity)
            }
        })
        .collect();
    lines.sort_by(|l, r| (&l.0, &l.1).cmp(&(&r.0, &r.1)));
    for (ia, ib, affinity) in lines {
        println!("{ia}\t{ib}\t{affinity:.6}");
    }
    Ok(())
}

/// Scoring inputs shared by evaluate and combine.
struct Pipeline {
    graphs: BTreeMap<String, GestGraph>,
    texts: BTreeMap<String, String>,
    embeddings: EmbeddingTable,
    config: MatchConfig,
    externals: BTreeMap<String, BTreeMap<(String, String), f64>>,
    parallel: usize,
}

impl Pipeline {
    fn score(&self, table: &mut ScoreTable, metrics: &[Metric]) -> Result<(), CliError> {
        for metric in metrics {
            if let Metric::External(name) = metric {
                let scores = self.externals.get(name).ok_or_else(|| {
                    CliError::new(5, format!("external metric '{name}' needs --external {name}=<csv>"))
                })?;
                apply_external(table, name, scores)
                    .map_err(|e| CliError::new(5, e.to_string()))?;
                continue;
            }
            let ctx = ScoreContext {
                graphs: &self.graphs,
                texts: &self.texts,
                embeddings: &self.embeddings,
                config: &self.config,
            };
            score_pairs(table, metric, &ctx, self.parallel).map_err(|e| match e {
                crate::table::TableError::Match(m) => match_error(m),
                other => CliError::new(1, other.to_string()),
            })?;
        }
        Ok(())
    }
}

fn parse_metrics(names: &[String]) -> Result<Vec<Metric>, CliError> {
    let mut metrics = Vec::with_capacity(names.len());
    for name in names {
        let metric = Metric::parse(name).ok_or_else(|| {
            CliError::new(
                1,
                format!("unknown metric '{name}' (expected gest-sm, bleu4, rouge-l, external:<name>)"),
            )
        })?;
        if !metrics.contains(&metric) {
            metrics.push(metric);
        }
    }
    Ok(metrics)
}

fn parse_external_args(
    args: &[String],
) -> Result<BTreeMap<String, BTreeMap<(String, String), f64>>, CliError> {
    let mut externals = BTreeMap::new();
    for arg in args {
        let (name, path) = arg.split_once('=').ok_or_else(|| {
            CliError::new(5, format!("--external expects NAME=CSV, got '{arg}'"))
        })?;
        let scores =
            load_external_scores(Path::new(path)).map_err(|e| CliError::new(5, e.to_string()))?;
        externals.insert(name.to_string(), scores);
    }
    Ok(externals)
}

/// Collects graphs (given or parsed from text) and texts by text_id.
fn resolve_corpus(
    corpus: &Corpus,
    metrics: &[Metric],
    lexicon: Option<&Lexicon>,
) -> Result<(BTreeMap<String, GestGraph>, BTreeMap<String, String>), CliError> {
    let needs_graphs = metrics.contains(&Metric::GestSm);
    let mut graphs = BTreeMap::new();
    let mut texts = BTreeMap::new();
    for record in &corpus.records {
        if let Some(text) = &record.text {
            texts.insert(record.text_id.clone(), text.clone());
        }
        match (&record.graph, &record.text) {
            (Some(graph), _) => {
                graphs.insert(record.text_id.clone(), graph.clone());
            }
            (None, Some(text)) if needs_graphs => {
                let lexicon = lexicon.ok_or_else(|| {
                    CliError::new(
                        3,
                        format!("--lexicon required: record '{}' has no graph", record.text_id),
                    )
                })?;
                let parsed = parse_text(text, lexicon);
                for warning in &parsed.warnings {
                    eprintln!("warning: {}: {warning}", record.text_id);
                }
                graphs.insert(record.text_id.clone(), parsed.graph);
            }
            _ => {}
        }
    }
    Ok((graphs, texts))
}

struct ScoringFlags<'a> {
    embeddings: Option<&'a Path>,
    dim: Option<usize>,
    vocab_limit: Option<usize>,
    lexicon: Option<&'a Path>,
    config: Option<&'a str>,
    external: &'a [String],
    parallel: usize,
}

fn build_pipeline(
    corpus: &Corpus,
    metrics: &[Metric],
    flags: &ScoringFlags,
) -> Result<Pipeline, CliError> {
    let config = load_config_arg(flags.config)?;
    let embeddings = if metrics.contains(&Metric::GestSm) {
        let path = flags
            .embeddings
            .ok_or_else(|| CliError::new(2, "--embeddings required for gest-sm"))?;
        let dim = flags
            .dim
            .ok_or_else(|| CliError::new(2, "--dim required for gest-sm"))?;
        load_embeddings(path, dim, flags.vocab_limit)
            .map_err(|e| CliError::new(2, e.to_string()))?
    } else {
        EmbeddingTable::new(1)
    };
    let lexicon = match flags.lexicon {
        Some(path) => Some(load_lexicon_arg(path)?),
        None => None,
    };
    let (graphs, texts) = resolve_corpus(corpus, metrics, lexicon.as_ref())?;
    Ok(Pipeline {
        graphs,
        texts,
        embeddings,
        config,
        externals: parse_external_args(flags.external)?,
        parallel: flags.parallel,
    })
}

fn emit_report(report: &EvalReport) {
    print!("{}", report::render_json(report));
    eprint!("{}", report::render_table(report));
}

fn report_error(e: report::ReportError) -> CliError {
    CliError::new(1, e.to_string())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let metrics = parse_metrics(&args.metrics)?;
    let corpus =
        load_corpus(&args.corpus).map_err(|e| CliError::new(2, e.to_string()))?;
    let flags = ScoringFlags {
        embeddings: args.embeddings.as_deref(),
        dim: args.dim,
        vocab_limit: args.vocab_limit,
        lexicon: args.lexicon.as_deref(),
        config: args.config.as_deref(),
        external: &args.external,
        parallel: args.parallel,
    };
    let pipeline = build_pipeline(&corpus, &metrics, &flags)?;
    let mut table = make_pairs(&corpus, args.neg_per_pos, args.seed);
    pipeline.score(&mut table, &metrics)?;
    let columns: Vec<String> = metrics.iter().map(|m| m.column_name()).collect();
    let report = report::build_report(&table, &columns, &pipeline.config, args.seed, args.neg_per_pos)
        .map_err(report_error)?;
    emit_report(&report);
    Ok(())
}

#[derive(serde::Serialize)]
struct CombineOutput {
    alpha: f64,
    report: EvalReport,
}

fn cmd_combine(args: CombineArgs) -> Result<(), CliError> {
    let metric_a = parse_metrics(std::slice::from_ref(&args.metric_a))?.remove(0);
    let metric_b = parse_metrics(std::slice::from_ref(&args.metric_b))?.remove(0);
    let metrics: Vec<Metric> = if metric_a == metric_b {
        vec![metric_a.clone()]
    } else {
        vec![metric_a.clone(), metric_b.clone()]
    };
    let train = load_corpus(&args.train).map_err(|e| CliError::new(2, e.to_string()))?;
    let eval = load_corpus(&args.eval).map_err(|e| CliError::new(2, e.to_string()))?;
    let flags = ScoringFlags {
        embeddings: args.embeddings.as_deref(),
        dim: args.dim,
        vocab_limit: args.vocab_limit,
        lexicon: args.lexicon.as_deref(),
        config: args.config.as_deref(),
        external: &args.external,
        parallel: args.parallel,
    };

    let train_pipeline = build_pipeline(&train, &metrics, &flags)?;
    let mut train_table = make_pairs(&train, args.neg_per_pos, args.seed);
    train_pipeline.score(&mut train_table, &metrics)?;
    let col_a = metric_a.column_name();
    let col_b = metric_b.column_name();
    let alpha = report::fit_alpha_on(&train_table, &col_a, &col_b).map_err(report_error)?;

    let eval_pipeline = build_pipeline(&eval, &metrics, &flags)?;
    let mut eval_table = make_pairs(&eval, args.neg_per_pos, args.seed);
    eval_pipeline.score(&mut eval_table, &metrics)?;
    let combined = report::combine_linear(&mut eval_table, &col_a, &col_b, alpha)
        .map_err(report_error)?;
    let columns = vec![col_a, col_b, combined];
    let report = report::build_report(
        &eval_table,
        &columns,
        &eval_pipeline.config,
        args.seed,
        args.neg_per_pos,
    )
    .map_err(report_error)?;

    let output = CombineOutput { alpha, report };
    let mut s = serde_json::to_string_pretty(&output).expect("output serializes");
    s.push('\n');
    print!("{s}");
    eprint!("{}", report::render_table(&output.report));
    Ok(())
}
