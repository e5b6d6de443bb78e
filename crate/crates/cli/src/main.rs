//! `atomdoc` command-line interface.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "atomdoc", version, about = "Cross-lingual generative retrieval over shared keyword atoms")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Shared {
    /// TOML configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Index file to write (build) or read (other commands)
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    /// Cosine threshold for merging keywords into one atom
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Keywords per document (docid length)
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Beam width
    #[arg(long, global = true)]
    width: Option<usize>,
    /// uniform | statistical:<model.json> | external:<cmd:..|tcp:host:port|unix:path>
    #[arg(long, global = true)]
    scorer: Option<String>,
    /// Seconds to wait for an external scorer response
    #[arg(long, global = true)]
    scorer_timeout: Option<f64>,
    /// Random seed for corpus generation
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fail when two documents receive the same docid
    #[arg(long, global = true)]
    strict_collisions: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster keywords, assign docids and write the index
    Build(commands::BuildArgs),
    /// Decode queries against an index
    Decode(commands::DecodeArgs),
    /// Evaluate recall per query language
    Eval(commands::EvalArgs),
    /// Rebuild and evaluate over a grid of theta or m values
    Sweep(commands::SweepArgs),
    /// Report identifier-space statistics for an index
    Stats(commands::StatsArgs),
    /// Generate the synthetic cross-lingual benchmark
    Synth(commands::SynthArgs),
    /// Train the count-based scorer on (query, document) pairs
    TrainScorer(commands::TrainArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = cli.shared.config.as_deref().map(config::ConfigFile::load).transpose()?;
    let flags = config::Overrides {
        m: cli.shared.m,
        theta: cli.shared.theta,
        strict_collisions: cli.shared.strict_collisions,
        width: cli.shared.width,
        alpha: None,
        scorer: cli.shared.scorer,
        scorer_timeout_secs: cli.shared.scorer_timeout,
        seed: cli.shared.seed,
        index: cli.shared.index,
    };
    match cli.command {
        Command::Build(a) => commands::build(&config::EngineConfig::resolve(file, &flags)?, a),
        Command::Decode(a) => commands::decode(&config::EngineConfig::resolve(file, &flags)?, a),
        Command::Eval(a) => commands::eval(&config::EngineConfig::resolve(file, &flags)?, a),
        Command::Sweep(a) => {
            let flags = config::Overrides { alpha: a.alpha, ..flags };
            commands::sweep(&config::EngineConfig::resolve(file, &flags)?, a)
        }
        Command::Stats(a) => commands::stats(&config::EngineConfig::resolve(file, &flags)?, a),
        Command::Synth(a) => commands::synth(&config::EngineConfig::resolve(file, &flags)?, a),
        Command::TrainScorer(a) => {
            let flags = config::Overrides { alpha: a.alpha, ..flags };
            commands::train_scorer(&config::EngineConfig::resolve(file, &flags)?, a)
        }
    }
}

/// Joins the error chain, skipping causes whose text the previous message
/// already contains.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ATOMDOC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::FAILURE
        }
    }
}
