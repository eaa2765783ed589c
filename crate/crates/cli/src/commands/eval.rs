//! `vendi eval`: score a QA dataset end to end through the pipeline.

use super::{load_index, now_unix, write_json};
use crate::config::{
    CliError, Effective, EmbeddingArgs, LlmArgs, PipelineArgs, Resolver, RetrievalArgs,
};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;
use vendi_core::embed::build_provider;
use vendi_core::eval::{
    evaluate_dataset, load_dataset, sample_examples, DatasetFormat, EvalAggregates, EvalContext,
    ExampleFailure, ExampleRow,
};
use vendi_core::llm::build_chat_provider;
use vendi_core::retrieval::StrategyRegistry;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset file.
    #[arg(long, value_name = "FILE")]
    pub dataset: PathBuf,

    /// Dataset format: hotpotqa, musique, 2wiki, or generic-jsonl.
    #[arg(long, value_name = "FMT")]
    pub format: String,

    /// Index file to retrieve from.
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,

    /// Report file to write (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Also write the aggregates as a one-row CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Evaluate a seeded random sample of this many examples.
    #[arg(long, value_name = "N")]
    pub sample: Option<usize>,

    /// Sampling seed.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Worker threads for per-example evaluation.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Score the accuracy column as strict exact match instead of
    /// gold-containment.
    #[arg(long)]
    pub strict_acc: bool,

    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[command(flatten)]
    pub llm: LlmArgs,

    #[command(flatten)]
    pub retrieval: RetrievalArgs,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    command: &'static str,
    /// The only timestamp in the report; everything else is
    /// byte-reproducible across runs.
    generated_unix: u64,
    config: &'a Effective<'a>,
    dataset: String,
    format: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<usize>,
    seed: u64,
    jobs: usize,
    strict_acc: bool,
    aggregates: &'a EvalAggregates,
    per_example: &'a [ExampleRow],
    failures: &'a [ExampleFailure],
}

fn write_aggregates_csv(
    path: &PathBuf,
    effective: &Effective<'_>,
    aggregates: &EvalAggregates,
) -> Result<(), CliError> {
    use std::io::Write;
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))?;
    writeln!(file, "# vendi eval aggregates")?;
    writeln!(file, "# config: {}", serde_json::to_string(effective)?)?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record([
        "em_pct",
        "f1_mean",
        "acc_pct",
        "vs_mean",
        "mpd_mean",
        "iterations_mean",
        "scored",
        "failed",
        "total",
    ])?;
    writer.write_record([
        aggregates.em_pct.to_string(),
        aggregates.f1_mean.to_string(),
        aggregates.acc_pct.to_string(),
        aggregates.vs_mean.to_string(),
        aggregates.mpd_mean.to_string(),
        aggregates.iterations_mean.to_string(),
        aggregates.scored.to_string(),
        aggregates.failed.to_string(),
        aggregates.total.to_string(),
    ])?;
    writer.flush()?;
    Ok(())
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let format: DatasetFormat = args
        .format
        .parse()
        .map_err(|e: vendi_core::eval::EvalError| CliError::Usage(e.to_string()))?;
    let resolver = Resolver::load(args.config.as_deref())?;
    let index = load_index(&args.index)?;
    let embedding_spec = resolver.embedding_spec_for_index(&args.embedding, &index)?;
    let llm_spec = resolver.llm_spec(&args.llm)?;
    let retrieval = resolver.retrieval(&args.retrieval);
    let pipeline = resolver.pipeline(&args.pipeline, retrieval);
    let effective = Effective {
        embedding: &embedding_spec,
        llm: Some(&llm_spec),
        retrieval: None,
        pipeline: Some(&pipeline),
        chunking: None,
    };
    effective.log();

    let embedder = build_provider(&embedding_spec)?;
    let llm = build_chat_provider(&llm_spec)?;
    let templates = resolver.templates(&args.llm)?;
    let registry = StrategyRegistry::with_defaults();

    let mut examples = load_dataset(&args.dataset, format)?;
    let total_loaded = examples.len();
    let sample = resolver.sample(args.sample);
    let seed = resolver.sample_seed(args.seed);
    if let Some(n) = sample {
        examples = sample_examples(&examples, n, seed);
    }
    let jobs = resolver.jobs(args.jobs);
    let strict_acc = resolver.strict_acc(args.strict_acc);
    log::info!(
        "evaluating {} of {} example(s) with {} worker(s)",
        examples.len(),
        total_loaded,
        jobs
    );

    let ctx = EvalContext {
        index: &index,
        embedder: embedder.as_ref(),
        llm: llm.as_ref(),
        templates: &templates,
        registry: &registry,
        pipeline: &pipeline,
        strict_acc,
    };
    let report = evaluate_dataset(&examples, &ctx, jobs)?;

    let output = EvalOutput {
        command: "eval",
        generated_unix: now_unix(),
        config: &effective,
        dataset: args.dataset.display().to_string(),
        format: &args.format,
        sample,
        seed,
        jobs,
        strict_acc,
        aggregates: &report.aggregates,
        per_example: &report.per_example,
        failures: &report.failures,
    };
    write_json(&args.out, &output)?;
    if let Some(csv_path) = &args.csv {
        write_aggregates_csv(csv_path, &effective, &report.aggregates)?;
    }

    let a = &report.aggregates;
    println!(
        "EM {:.1}%  F1 {:.3}  Acc {:.1}%  VS {:.3}  MPD {:.3}  ({} scored, {} failed of {})",
        a.em_pct, a.f1_mean, a.acc_pct, a.vs_mean, a.mpd_mean, a.scored, a.failed, a.total
    );
    Ok(())
}
