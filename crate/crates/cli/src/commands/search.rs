//! `vendi search`: one-shot retrieval against an index, no LLM involved.
//! This is the direct surface for the selection strategies and their
//! parameters; `vendi query` drives the same machinery iteratively.

use super::{embed_query, load_index, write_json};
use crate::config::{CliError, Effective, EmbeddingArgs, Resolver, RetrievalArgs};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;
use vendi_core::embed::build_provider;
use vendi_core::retrieval::{SelectionStep, StrategyRegistry, VrsBreakdown};

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Index file to search.
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,

    /// Query text.
    #[arg(long, value_name = "TEXT")]
    pub question: String,

    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the selection as JSON here (a table prints to stdout
    /// either way).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub retrieval: RetrievalArgs,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

#[derive(Serialize)]
struct SelectedChunk {
    rank: usize,
    chunk_id: String,
    title: String,
    similarity: f64,
    text: String,
}

#[derive(Serialize)]
struct SearchOutput<'a> {
    command: &'static str,
    config: &'a Effective<'a>,
    question: &'a str,
    strategy: &'a str,
    scores: VrsBreakdown,
    steps: &'a [SelectionStep],
    chunks: Vec<SelectedChunk>,
}

pub fn run(args: &SearchArgs) -> Result<(), CliError> {
    let resolver = Resolver::load(args.config.as_deref())?;
    let index = load_index(&args.index)?;
    let spec = resolver.embedding_spec_for_index(&args.embedding, &index)?;
    let retrieval = resolver.retrieval(&args.retrieval);
    let effective = Effective {
        embedding: &spec,
        llm: None,
        retrieval: Some(&retrieval),
        pipeline: None,
        chunking: None,
    };
    effective.log();

    let provider = build_provider(&spec)?;
    let query = embed_query(provider.as_ref(), &args.question)?;
    let pool = index.top_m(&query, retrieval.m)?;
    let registry = StrategyRegistry::with_defaults();
    let strategy = registry.get(&retrieval.strategy)?;
    let result = strategy.select(&pool, &retrieval)?;

    let chunks: Vec<SelectedChunk> = result
        .chunks
        .iter()
        .enumerate()
        .map(|(i, scored)| SelectedChunk {
            rank: i + 1,
            chunk_id: scored.chunk.chunk_id.clone(),
            title: scored.chunk.title.clone(),
            similarity: scored.similarity,
            text: scored.chunk.text.clone(),
        })
        .collect();
    for chunk in &chunks {
        println!(
            "{:>3}  {:.4}  {}  {}",
            chunk.rank, chunk.similarity, chunk.chunk_id, chunk.title
        );
    }
    println!(
        "VRS {:.4} (VS {:.4}, SS {:.4}, s {})",
        result.scores.vrs, result.scores.vs, result.scores.ss, result.s
    );

    if let Some(path) = &args.out {
        let output = SearchOutput {
            command: "search",
            config: &effective,
            question: &args.question,
            strategy: &result.strategy,
            scores: result.scores,
            steps: &result.steps,
            chunks,
        };
        write_json(path, &output)?;
    }
    Ok(())
}
