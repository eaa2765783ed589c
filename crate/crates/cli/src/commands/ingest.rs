//! `vendi ingest`: chunk, embed, and index a corpus file.

use super::{read_corpus, write_json};
use crate::config::{ChunkingConfig, CliError, Effective, EmbeddingArgs, Resolver};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;
use vendi_core::embed::build_provider;
use vendi_core::index::{IndexMetadata, IngestReport, VectorIndex};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus file: one JSON document {"id","title","text"} per line.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,

    /// Index file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Chunk size in whitespace tokens.
    #[arg(long, value_name = "N")]
    pub max_tokens: Option<usize>,

    /// Token overlap between consecutive chunks.
    #[arg(long, value_name = "N")]
    pub overlap: Option<usize>,

    /// Write the ingestion report as JSON here as well as to stdout.
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

#[derive(Serialize)]
struct IngestOutput<'a> {
    command: &'static str,
    config: &'a Effective<'a>,
    corpus: String,
    out: String,
    report: &'a IngestReport,
}

pub fn run(args: &IngestArgs) -> Result<(), CliError> {
    let resolver = Resolver::load(args.config.as_deref())?;
    let spec = resolver.embedding_spec(&args.embedding)?;
    let (max_tokens, overlap) = resolver.chunking(args.max_tokens, args.overlap);
    let effective = Effective {
        embedding: &spec,
        llm: None,
        retrieval: None,
        pipeline: None,
        chunking: Some(ChunkingConfig {
            max_tokens,
            overlap,
        }),
    };
    effective.log();

    let provider = build_provider(&spec)?;
    let documents = read_corpus(&args.corpus)?;
    let corpus_name = args
        .corpus
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.corpus.display().to_string());
    let mut index = VectorIndex::new(
        spec.dim,
        IndexMetadata {
            corpus: corpus_name,
            provider_fingerprint: spec.fingerprint(),
            max_tokens,
            overlap,
        },
    );
    let report = index.ingest_documents(&documents, provider.as_ref(), spec.batch_size)?;
    index
        .save(&args.out)
        .map_err(|e| CliError::Run(format!("cannot write index {}: {e}", args.out.display())))?;
    log::info!(
        "indexed {} chunks from {} documents into {} ({} failures)",
        report.chunks_indexed,
        report.documents,
        args.out.display(),
        report.failures.len()
    );

    let output = IngestOutput {
        command: "ingest",
        config: &effective,
        corpus: args.corpus.display().to_string(),
        out: args.out.display().to_string(),
        report: &report,
    };
    if let Some(path) = &args.report_out {
        write_json(path, &output)?;
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}
