//! `vendi`: diversity-aware retrieval and iterative question answering.

mod commands;
mod config;

use clap::{Parser, Subcommand};

/// Diversity-aware retrieval with an iterative answer-and-judge loop.
///
/// Exit codes: 0 success, 1 operational error, 2 usage error.
#[derive(Parser)]
#[command(name = "vendi", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk, embed, and index a corpus.
    Ingest(commands::ingest::IngestArgs),
    /// One-shot retrieval against an index (no LLM involved).
    Search(commands::search::SearchArgs),
    /// Answer a question with the iterative pipeline.
    Query(commands::query::QueryArgs),
    /// Score a QA dataset end to end.
    Eval(commands::eval::EvalArgs),
    /// Measure ranking sensitivity to the diversity weight.
    Sensitivity(commands::sensitivity::SensitivityArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Search(args) => commands::search::run(args),
        Command::Query(args) => commands::query::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Sensitivity(args) => commands::sensitivity::run(args),
    };
    if let Err(error) = outcome {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
