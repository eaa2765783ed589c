//! `vendi query`: answer one question with the iterative pipeline.

use super::{load_index, write_json};
use crate::config::{
    CliError, Effective, EmbeddingArgs, LlmArgs, PipelineArgs, Resolver, RetrievalArgs,
};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;
use vendi_core::chunk::Chunk;
use vendi_core::embed::build_provider;
use vendi_core::index::VectorIndex;
use vendi_core::llm::{
    assemble_answer_prompt, assemble_judge_prompt, assemble_reasoning_prompt,
    assemble_rewrite_prompt, build_chat_provider, PromptTemplates,
};
use vendi_core::pipeline::{run_pipeline, PipelineResult};
use vendi_core::retrieval::StrategyRegistry;

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Index file to retrieve from.
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,

    /// The question to answer.
    #[arg(long, value_name = "TEXT")]
    pub question: String,

    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the full iteration trace as JSON.
    #[arg(long, value_name = "FILE")]
    pub trace_out: Option<PathBuf>,

    /// Include the reconstructed prompts in the trace output.
    #[arg(long)]
    pub verbose_trace: bool,

    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[command(flatten)]
    pub llm: LlmArgs,

    #[command(flatten)]
    pub retrieval: RetrievalArgs,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

/// The prompts behind one iteration, rebuilt from the trace. The judge
/// prompt is absent when judging was disabled; the rewrite prompt is
/// absent on the final iteration, which never rewrites.
#[derive(Serialize)]
struct IterationPrompts {
    iteration: usize,
    reasoning: String,
    answer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    judge: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rewrite: Option<String>,
}

#[derive(Serialize)]
struct QueryOutput<'a> {
    command: &'static str,
    config: &'a Effective<'a>,
    question: &'a str,
    result: &'a PipelineResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompts: Option<Vec<IterationPrompts>>,
}

fn reconstruct_prompts(
    result: &PipelineResult,
    index: &VectorIndex,
    templates: &PromptTemplates,
    question: &str,
) -> Result<Vec<IterationPrompts>, CliError> {
    let mut history: Vec<String> = Vec::new();
    let mut prompts = Vec::with_capacity(result.trace.len());
    for (i, state) in result.trace.iter().enumerate() {
        let chunks: Vec<Chunk> = state
            .selection
            .chunk_ids
            .iter()
            .map(|id| {
                index.get(id).map(|(c, _)| c.clone()).ok_or_else(|| {
                    CliError::Run(format!("trace chunk {id} is missing from the index"))
                })
            })
            .collect::<Result<_, _>>()?;
        let reasoning = assemble_reasoning_prompt(templates, question, &chunks);
        history.push(state.reasoning.clone());
        let answer = assemble_answer_prompt(templates, question, &chunks, &history);
        let judge = state
            .verdict
            .is_some()
            .then(|| assemble_judge_prompt(templates, question, &state.answer, &chunks));
        let rewrite = (i + 1 < result.trace.len())
            .then(|| assemble_rewrite_prompt(templates, &state.query, &state.answer, &state.reasoning));
        prompts.push(IterationPrompts {
            iteration: state.iteration,
            reasoning,
            answer,
            judge,
            rewrite,
        });
    }
    Ok(prompts)
}

pub fn run(args: &QueryArgs) -> Result<(), CliError> {
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

    let result = run_pipeline(
        &args.question,
        &index,
        embedder.as_ref(),
        llm.as_ref(),
        &templates,
        &registry,
        &pipeline,
    )?;
    log::info!(
        "{} iteration(s), terminated by {:?}, answering iteration {}",
        result.trace.len(),
        result.terminated_by,
        result.best_iteration
    );
    println!("{}", result.final_answer);

    if let Some(path) = &args.trace_out {
        let prompts = if args.verbose_trace {
            Some(reconstruct_prompts(&result, &index, &templates, &args.question)?)
        } else {
            None
        };
        let output = QueryOutput {
            command: "query",
            config: &effective,
            question: &args.question,
            result: &result,
            prompts,
        };
        write_json(path, &output)?;
    }
    Ok(())
}
