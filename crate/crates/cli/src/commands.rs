use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use atomdoc::atomizer::{Index, WhitespaceTokenCounter};
use atomdoc::corpus::{self, KeywordRecord, QueryRecord, SynthSpec};
use atomdoc::decoder::{
    decode_beam, decode_greedy, train_statistical_scorer, Endpoint, ExternalScorer, PrefixTrie, Scorer,
    StatisticalScorer, UniformScorer,
};
use atomdoc::eval::{self, SweepInputs, SweepParameter, SweepScorer};
use atomdoc::jsonl;
use clap::Args;
use serde::Serialize;

use crate::config::{require, EngineConfig};

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Also write the space report as JSON here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Query text; omit and pass --queries to decode a query file
    query: Option<String>,
    #[arg(long, conflicts_with = "query")]
    queries: Option<PathBuf>,
    /// Pure argmax decoding (one result per query)
    #[arg(long)]
    greedy: bool,
    /// Write JSON lines here instead of standard output
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Two-column relevance file (query id, document id)
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Report file; standard output when omitted
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Leave wall-clock timings out so reruns produce identical files
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Parameter to vary: theta or m
    #[arg(long, value_parser = parse_parameter)]
    param: SweepParameter,
    /// Comma-separated, strictly increasing grid values
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Keyword files, one per width; repeat for an m sweep
    #[arg(long)]
    keywords: Vec<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Training pairs, required with --scorer statistical
    #[arg(long)]
    training: Option<PathBuf>,
    /// Smoothing for the retrained statistical scorer
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write the generated files into
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 3)]
    concepts: usize,
    #[arg(long, value_delimiter = ',', default_value = "en,de,fr,vi")]
    languages: Vec<String>,
    #[arg(long, default_value_t = 5)]
    docs_per_cell: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 0.95)]
    intra_min: f64,
    #[arg(long, default_value_t = 0.30)]
    inter_max: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    training: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Model file to write
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_parameter(s: &str) -> Result<SweepParameter, String> {
    match s {
        "theta" => Ok(SweepParameter::Theta),
        "m" => Ok(SweepParameter::M),
        _ => Err(format!("expected theta or m, got {s:?}")),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => jsonl::write_atomic(p, text.as_bytes()).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load_index(cfg: &EngineConfig) -> Result<(PathBuf, Index)> {
    let path = require(None, cfg.paths.index.as_ref(), "index")?;
    let index = Index::load(&path).with_context(|| format!("cannot load index {}", path.display()))?;
    Ok((path, index))
}

/// Width of a keyword file, read from its first record.
fn keyword_width(path: &Path) -> Result<usize> {
    let lines = jsonl::read_lines(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (line, text) = lines.first().with_context(|| format!("{}: empty keyword file", path.display()))?;
    let rec: KeywordRecord =
        serde_json::from_str(text).with_context(|| format!("{}:{line}: malformed record", path.display()))?;
    Ok(rec.keywords.len())
}

fn load_inputs(
    cfg: &EngineConfig,
    corpus_flag: Option<&PathBuf>,
    keywords_path: &Path,
    m: usize,
) -> Result<(Vec<corpus::Document>, Vec<KeywordRecord>)> {
    let corpus_path = require(corpus_flag, cfg.paths.corpus.as_ref(), "corpus")?;
    let docs = corpus::load_corpus(&corpus_path)?;
    let records = corpus::load_keywords(keywords_path, &docs, m)?;
    Ok((docs, records))
}

fn load_embeddings(path: &Path, records: &[&[KeywordRecord]]) -> Result<atomdoc::corpus::EmbeddingMap<f64>> {
    let required: BTreeSet<String> =
        records.iter().flat_map(|rs| rs.iter()).flat_map(|r| r.keywords.iter().cloned()).collect();
    let loaded = corpus::load_embeddings::<f64>(path, &required)?;
    if !loaded.extra.is_empty() {
        log::warn!("{}: {} embeddings for keywords no document uses", path.display(), loaded.extra.len());
    }
    Ok(loaded.embeddings)
}

fn load_eval_queries(cfg: &EngineConfig, queries: Option<&PathBuf>, qrels: Option<&PathBuf>) -> Result<Vec<QueryRecord>> {
    let path = require(queries, cfg.paths.queries.as_ref(), "queries")?;
    let mut records = corpus::load_queries(&path)?;
    if let Some(q) = qrels.or(cfg.paths.qrels.as_ref()) {
        eval::attach_qrels(&mut records, &corpus::load_qrels(q)?);
    }
    Ok(records)
}

/// Resolves `uniform`, `statistical:<path>` or `external:<endpoint>`.
fn resolve_scorer(cfg: &EngineConfig) -> Result<Box<dyn Scorer<f64>>> {
    let spec = cfg.scorer.as_str();
    if spec == "uniform" {
        return Ok(Box::new(UniformScorer));
    }
    if let Some(path) = spec.strip_prefix("statistical:") {
        let model = StatisticalScorer::load(Path::new(path))?;
        return Ok(Box::new(model));
    }
    if let Some(ep) = spec.strip_prefix("external:") {
        let endpoint: Endpoint = ep.parse().map_err(anyhow::Error::msg)?;
        let scorer = ExternalScorer::connect(&endpoint, cfg.scorer_timeout)?;
        return Ok(Box::new(scorer));
    }
    bail!("unknown scorer {spec:?} (expected uniform, statistical:<path> or external:<endpoint>)")
}

pub fn build(cfg: &EngineConfig, args: BuildArgs) -> Result<()> {
    let keywords_path = require(args.keywords.as_ref(), cfg.paths.keywords.as_ref().and_then(|k| k.first()), "keywords")?;
    let (_, records) = load_inputs(cfg, args.corpus.as_ref(), &keywords_path, cfg.m)?;
    let emb_path = require(args.embeddings.as_ref(), cfg.paths.embeddings.as_ref(), "embeddings")?;
    let emb = load_embeddings(&emb_path, &[&records])?;
    let (index, collisions) = Index::build(&records, &emb, cfg.theta, cfg.collision_mode)?;
    let out = require(None, cfg.paths.index.as_ref(), "index")?;
    index.save(&out)?;
    let report = index.space_report(&records, &WhitespaceTokenCounter)?;
    if let Some(p) = &args.report {
        emit(Some(p), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    println!("documents           {}", report.documents);
    println!("distinct keywords   {}", report.keywords);
    println!("atoms               {} (ratio {:.4})", report.atoms, report.compression_ratio);
    println!("distinct docids     {}", report.distinct_docids);
    println!("collision groups    {}", collisions.len());
    println!(
        "ln search space     {:.3} -> {:.3}",
        report.ln_naive_space, report.ln_compressed_space
    );
    println!(
        "identifier tokens   {} -> {} (reduction {:.2}%)",
        report.baseline_tokens,
        report.compressed_tokens,
        100.0 * report.token_reduction
    );
    println!("index written to    {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct DecodedHit<'a> {
    rank: usize,
    doc_key: &'a str,
    atoms: &'a [atomdoc::atomizer::AtomId],
    #[serde(with = "jsonl::log_prob")]
    log_prob: f64,
}

#[derive(Serialize)]
struct DecodedQuery<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    query_id: Option<&'a str>,
    query: &'a str,
    results: Vec<DecodedHit<'a>>,
}

pub fn decode(cfg: &EngineConfig, args: DecodeArgs) -> Result<()> {
    let (_, index) = load_index(cfg)?;
    let trie = PrefixTrie::from_index(&index)?;
    let queries: Vec<(Option<String>, String)> = match (&args.query, &args.queries) {
        (Some(q), _) => vec![(None, q.clone())],
        (None, Some(path)) => corpus::load_queries(path)?.into_iter().map(|q| (Some(q.query_key), q.text)).collect(),
        (None, None) => bail!("give a query text or --queries <file>"),
    };
    let scorer = resolve_scorer(cfg)?;
    let mut out = String::new();
    for (id, text) in &queries {
        let result = if args.greedy {
            decode_greedy::<f64, _>(&trie, &scorer, text)
        } else {
            decode_beam::<f64, _>(&trie, &scorer, text, cfg.beam_width)
        }
        .with_context(|| format!("decoding {:?}", id.as_deref().unwrap_or(text)))?;
        let ranked = result.ranked_documents();
        let line = DecodedQuery {
            query_id: id.as_deref(),
            query: text,
            results: ranked
                .iter()
                .enumerate()
                .map(|(i, d)| DecodedHit {
                    rank: i + 1,
                    doc_key: &d.doc_key,
                    atoms: &d.atoms,
                    log_prob: d.log_prob,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    emit(args.output.as_deref(), &out)
}

fn print_rows(report: &eval::EvalReport) {
    eprintln!("{:<8} {:>7} {:>9} {:>9} {:>9}", "lang", "queries", "R@1", "R@10", "R@100");
    for row in report.rows.iter().chain([&report.average]) {
        let r100 = row.recall_at_100.map_or("-".to_string(), |r| format!("{r:.4}"));
        eprintln!(
            "{:<8} {:>7} {:>9.4} {:>9.4} {:>9}",
            row.lang, row.queries, row.recall_at_1, row.recall_at_10, r100
        );
    }
    if report.failures > 0 {
        eprintln!("{} queries failed to decode", report.failures);
    }
}

pub fn eval(cfg: &EngineConfig, args: EvalArgs) -> Result<()> {
    let (_, index) = load_index(cfg)?;
    let trie = PrefixTrie::from_index(&index)?;
    let queries = load_eval_queries(cfg, args.queries.as_ref(), args.qrels.as_ref())?;
    let scorer = resolve_scorer(cfg)?;
    let mut report = eval::evaluate::<f64, _>(&trie, &scorer, &queries, cfg.beam_width)?;
    if args.omit_timing {
        report = report.without_timing();
    }
    print_rows(&report);
    emit(args.output.as_deref().or(cfg.paths.output.as_deref()), &report.to_json())
}

pub fn sweep(cfg: &EngineConfig, args: SweepArgs) -> Result<()> {
    let corpus_path = require(args.corpus.as_ref(), cfg.paths.corpus.as_ref(), "corpus")?;
    let docs = corpus::load_corpus(&corpus_path)?;
    let keyword_paths: Vec<PathBuf> = if args.keywords.is_empty() {
        cfg.paths.keywords.clone().unwrap_or_default()
    } else {
        args.keywords.clone()
    };
    if keyword_paths.is_empty() {
        bail!("no keywords path given (use --keywords or set paths.keywords in the config file)");
    }
    let mut keywords = BTreeMap::new();
    for p in &keyword_paths {
        let m = keyword_width(p)?;
        let records = corpus::load_keywords(p, &docs, m)?;
        if keywords.insert(m, records).is_some() {
            bail!("two keyword files of width {m}");
        }
    }
    let all: Vec<&[KeywordRecord]> = keywords.values().map(Vec::as_slice).collect();
    let emb_path = require(args.embeddings.as_ref(), cfg.paths.embeddings.as_ref(), "embeddings")?;
    let emb = load_embeddings(&emb_path, &all)?;
    let queries = load_eval_queries(cfg, args.queries.as_ref(), args.qrels.as_ref())?;

    let pairs;
    let external;
    let scorer = match cfg.scorer.as_str() {
        "uniform" => SweepScorer::Uniform,
        "statistical" => {
            let path = require(args.training.as_ref(), cfg.paths.training.as_ref(), "training")?;
            pairs = corpus::load_training_pairs(&path)?;
            SweepScorer::Statistical { pairs: &pairs, alpha: cfg.alpha }
        }
        s if s.starts_with("external:") => {
            external = resolve_scorer(cfg)?;
            SweepScorer::Fixed(&*external)
        }
        s => bail!("sweep needs --scorer uniform, statistical or external:<endpoint>, got {s:?}"),
    };
    let inputs = SweepInputs {
        keywords: &keywords,
        embeddings: &emb,
        queries: &queries,
        theta: cfg.theta,
        m: cfg.m,
        mode: cfg.collision_mode,
        width: cfg.beam_width,
        scorer,
    };
    let mut result = eval::sweep(args.param, &args.grid, &inputs)?;
    if args.omit_timing {
        result = result.without_timing();
    }
    eprintln!("{:>8} {:>6} {:>9} {:>9} {:>9}", args.param.to_string(), "atoms", "docids", "R@1", "R@10");
    for p in &result.points {
        eprintln!(
            "{:>8} {:>6} {:>9} {:>9.4} {:>9.4}",
            p.value, p.atoms, p.distinct_docids, p.report.average.recall_at_1, p.report.average.recall_at_10
        );
    }
    emit(args.output.as_deref().or(cfg.paths.output.as_deref()), &result.to_json())
}

pub fn stats(cfg: &EngineConfig, args: StatsArgs) -> Result<()> {
    let (_, index) = load_index(cfg)?;
    let keywords_path = require(args.keywords.as_ref(), cfg.paths.keywords.as_ref().and_then(|k| k.first()), "keywords")?;
    let (_, records) = load_inputs(cfg, args.corpus.as_ref(), &keywords_path, index.m())?;
    let report = index.space_report(&records, &WhitespaceTokenCounter)?;
    emit(args.output.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

pub fn synth(cfg: &EngineConfig, args: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        concepts: args.concepts,
        languages: args.languages,
        docs_per_cell: args.docs_per_cell,
        m: cfg.m,
        dim: args.dim,
        intra_min: args.intra_min,
        inter_max: args.inter_max,
        seed: cfg.seed,
    };
    let out = corpus::generate_synthetic_corpus::<f64>(&spec)?;
    std::fs::create_dir_all(&args.output).with_context(|| format!("cannot create {}", args.output.display()))?;
    out.write_to_dir(&args.output)?;
    println!(
        "{} documents, {} queries, {} training pairs written to {}",
        out.documents.len(),
        out.queries.len(),
        out.training_pairs.len(),
        args.output.display()
    );
    Ok(())
}

pub fn train_scorer(cfg: &EngineConfig, args: TrainArgs) -> Result<()> {
    let (_, index) = load_index(cfg)?;
    let path = require(args.training.as_ref(), cfg.paths.training.as_ref(), "training")?;
    let pairs = corpus::load_training_pairs(&path)?;
    let model = train_statistical_scorer(&pairs, index.docids(), index.vocab(), cfg.alpha)?;
    let out = require(args.output.as_ref(), cfg.paths.output.as_ref(), "output")?;
    model.save(&out)?;
    println!(
        "trained on {} pairs ({} terms), written to {}",
        pairs.len(),
        model.vocabulary_size(),
        out.display()
    );
    Ok(())
}
