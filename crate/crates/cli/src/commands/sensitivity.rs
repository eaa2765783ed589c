//! `vendi sensitivity`: how far retrieval rankings drift from the pure
//! similarity baseline as the diversity weight grows.

use super::{load_index, read_query_lines};
use crate::config::{CliError, Effective, EmbeddingArgs, Resolver, RetrievalArgs};
use clap::Args;
use std::io::Write;
use std::path::PathBuf;
use vendi_core::embed::build_provider;
use vendi_core::eval::sensitivity_analysis;

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Index file to rank against.
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,

    /// Query file: one query per line; blank lines and # comments are
    /// skipped.
    #[arg(long, value_name = "FILE")]
    pub queries: PathBuf,

    /// Comma-separated diversity weights. Must include the 0.0 baseline.
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    pub s: Vec<f64>,

    /// Table file to write (CSV).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Candidate pool size ranked per query.
    #[arg(long, value_name = "N")]
    pub pool: Option<usize>,

    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

pub fn run(args: &SensitivityArgs) -> Result<(), CliError> {
    let resolver = Resolver::load(args.config.as_deref())?;
    let index = load_index(&args.index)?;
    let spec = resolver.embedding_spec_for_index(&args.embedding, &index)?;
    let retrieval = resolver.retrieval(&RetrievalArgs {
        pool: args.pool,
        ..Default::default()
    });
    let effective = Effective {
        embedding: &spec,
        llm: None,
        retrieval: Some(&retrieval),
        pipeline: None,
        chunking: None,
    };
    effective.log();

    let provider = build_provider(&spec)?;
    let queries = read_query_lines(&args.queries)?;
    let rows = sensitivity_analysis(&index, provider.as_ref(), &queries, &args.s, retrieval.m)?;

    let mut file = std::fs::File::create(&args.out)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", args.out.display())))?;
    writeln!(file, "# vendi sensitivity: rank correlation vs the s=0 baseline")?;
    writeln!(file, "# queries: {}, pool: {}", queries.len(), retrieval.m)?;
    writeln!(file, "# config: {}", serde_json::to_string(&effective)?)?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(["s", "tau", "rho"])?;
    for row in &rows {
        writer.write_record([
            row.s.to_string(),
            row.mean_tau.to_string(),
            row.mean_rho.to_string(),
        ])?;
    }
    writer.flush()?;

    println!("{:>6}  {:>8}  {:>8}", "s", "tau", "rho");
    for row in &rows {
        println!("{:>6.2}  {:>8.4}  {:>8.4}", row.s, row.mean_tau, row.mean_rho);
    }
    Ok(())
}
