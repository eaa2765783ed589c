//! The iterative inference loop: retrieve with the current diversity
//! weight, reason, answer, judge, adapt the weight, rewrite the query,
//! repeat.
//!
//! Each iteration t retrieves with query q_t at weight s_t, generates
//! chain-of-thought reasoning and a candidate answer from the original
//! question, and has a judge score the answer on a 1-10 scale. A
//! normalized quality at or above the threshold ends the loop; otherwise
//! the next weight is `1 - quality / 10` (high quality shifts retrieval
//! toward relevance, low quality toward diversity), the query is
//! rewritten to target what is still missing, and the loop continues up
//! to the iteration budget.
//!
//! Retrieval uses the rewritten query so later rounds can chase missing
//! facts; reasoning, answering, and judging always use the original
//! question, which is the thing actually being answered.
//!
//! Every iteration is recorded in a serializable trace. Runs with a
//! scripted provider replay byte-identically.

use crate::embed::{EmbedError, EmbeddingProvider};
use crate::index::{IndexError, VectorIndex};
use crate::llm::{
    generate_answer, generate_reasoning, judge_answer, rewrite_query, ChatProvider,
    JudgeVerdict, LlmError, PromptTemplates,
};
use crate::retrieval::{
    RetrievalConfig, RetrievalError, SelectionResult, SelectionStep, StrategyRegistry,
    VrsBreakdown,
};
use serde::{Deserialize, Serialize};

/// Default initial diversity weight.
pub const DEFAULT_S1: f64 = 0.8;
/// Default quality threshold on the normalized [0, 1] scale.
pub const DEFAULT_TAU: f64 = 0.85;
/// Default iteration budget.
pub const DEFAULT_MAX_ITERATIONS: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum PipelineErrorKind {
    #[error("invalid pipeline config: {message}")]
    Config { message: String },

    #[error("judge quality {quality} is outside [1, 10]")]
    QualityRange { quality: f64 },

    #[error(transparent)]
    Retrieval(#[from] RetrievalError),

    #[error(transparent)]
    Llm(#[from] LlmError),

    #[error(transparent)]
    Index(#[from] IndexError),

    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// A pipeline failure, carrying the trace of every iteration that
/// completed before the abort.
#[derive(Debug)]
pub struct PipelineError {
    pub kind: PipelineErrorKind,
    pub partial_trace: Vec<PipelineState>,
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (after {} completed iteration(s))",
            self.kind,
            self.partial_trace.len()
        )
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.kind)
    }
}

/// How the diversity weight evolves across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SSchedule {
    /// s_{t+1} = 1 - quality_t / 10.
    Dynamic,
    /// s_t stays at s1 for every iteration.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Initial diversity weight s_1.
    pub s1: f64,
    /// Quality threshold on the normalized [0, 1] scale.
    pub tau: f64,
    /// Iteration budget N.
    pub max_iterations: usize,
    pub retrieval: RetrievalConfig,
    pub s_schedule: SSchedule,
    /// When false, the loop runs exactly one iteration at s1 and returns
    /// its answer unjudged.
    pub judge_enabled: bool,
    /// On budget exhaustion return the last iteration's answer verbatim
    /// instead of the best-judged one.
    pub strict_final_answer: bool,
    /// Exclude chunks selected in earlier iterations from later pools.
    pub exclude_seen: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            s1: DEFAULT_S1,
            tau: DEFAULT_TAU,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            retrieval: RetrievalConfig::default(),
            s_schedule: SSchedule::Dynamic,
            judge_enabled: true,
            strict_final_answer: false,
            exclude_seen: false,
        }
    }
}

impl PipelineConfig {
    fn validate(&self) -> Result<(), PipelineErrorKind> {
        if !(0.0..=1.0).contains(&self.s1) {
            return Err(PipelineErrorKind::Config {
                message: format!("s1 must be in [0, 1], got {}", self.s1),
            });
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(PipelineErrorKind::Config {
                message: format!("tau must be in (0, 1], got {}", self.tau),
            });
        }
        if self.max_iterations == 0 {
            return Err(PipelineErrorKind::Config {
                message: "max_iterations must be at least 1".to_string(),
            });
        }
        Ok(())
    }
}

/// Serializable summary of one iteration's selection: chunk ids instead
/// of full chunks, scores, and the greedy step log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub strategy: String,
    pub chunk_ids: Vec<String>,
    pub scores: VrsBreakdown,
    pub steps: Vec<SelectionStep>,
}

impl SelectionTrace {
    fn from_result(result: &SelectionResult) -> Self {
        Self {
            strategy: result.strategy.clone(),
            chunk_ids: result
                .chunks
                .iter()
                .map(|c| c.chunk.chunk_id.clone())
                .collect(),
            scores: result.scores,
            steps: result.steps.clone(),
        }
    }
}

/// Everything that happened in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    /// 1-based iteration number t.
    pub iteration: usize,
    /// The retrieval query q_t (rewritten from iteration 2 on).
    pub query: String,
    /// The diversity weight s_t used for this iteration's selection.
    pub s: f64,
    pub selection: SelectionTrace,
    pub reasoning: String,
    pub answer: String,
    /// Absent only when the judge is disabled.
    pub verdict: Option<JudgeVerdict>,
    /// verdict quality / 10.
    pub q_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminatedBy {
    /// An iteration reached q_norm >= tau.
    Threshold,
    /// The iteration budget ran out.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub final_answer: String,
    /// 1-based iteration the final answer came from.
    pub best_iteration: usize,
    pub terminated_by: TerminatedBy,
    pub trace: Vec<PipelineState>,
}

/// The weight update: `1 - quality / 10`, mapping judge quality in
/// [1, 10] onto a next-round diversity weight in [0, 0.9]. Strictly
/// decreasing: better answers mean less diversity pressure.
pub fn update_s(previous_quality: f64) -> Result<f64, PipelineErrorKind> {
    if !(1.0..=10.0).contains(&previous_quality) {
        return Err(PipelineErrorKind::QualityRange {
            quality: previous_quality,
        });
    }
    Ok(1.0 - previous_quality / 10.0)
}

/// Runs the full loop for one question. On error the partial trace of
/// completed iterations is attached.
pub fn run_pipeline(
    question: &str,
    index: &VectorIndex,
    embedder: &dyn EmbeddingProvider,
    llm: &dyn ChatProvider,
    templates: &PromptTemplates,
    registry: &StrategyRegistry,
    config: &PipelineConfig,
) -> Result<PipelineResult, PipelineError> {
    let mut trace: Vec<PipelineState> = Vec::new();
    match run_loop(
        question, index, embedder, llm, templates, registry, config, &mut trace,
    ) {
        Ok(result) => Ok(result),
        Err(kind) => Err(PipelineError {
            kind,
            partial_trace: trace,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_loop(
    question: &str,
    index: &VectorIndex,
    embedder: &dyn EmbeddingProvider,
    llm: &dyn ChatProvider,
    templates: &PromptTemplates,
    registry: &StrategyRegistry,
    config: &PipelineConfig,
    trace: &mut Vec<PipelineState>,
) -> Result<PipelineResult, PipelineErrorKind> {
    config.validate()?;
    if question.trim().is_empty() {
        return Err(PipelineErrorKind::Config {
            message: "question must not be empty".to_string(),
        });
    }
    let strategy = registry.get(&config.retrieval.strategy)?;

    let mut query = question.to_string();
    let mut s = config.s1;
    let mut history: Vec<String> = Vec::new();
    let mut seen: Vec<String> = Vec::new();

    for iteration in 1..=config.max_iterations {
        let query_embedding = embedder.embed_batch(&[query.as_str()])?.remove(0);
        let mut pool = index.top_m(&query_embedding, config.retrieval.m)?;
        if config.exclude_seen {
            pool.retain(|c| !seen.contains(&c.chunk.chunk_id));
        }
        let mut retrieval = config.retrieval.clone();
        retrieval.s = s;
        let selection = strategy.select(&pool, &retrieval)?;
        let chunks: Vec<_> = selection.chunks.iter().map(|c| c.chunk.clone()).collect();
        seen.extend(chunks.iter().map(|c| c.chunk_id.clone()));

        let reasoning = generate_reasoning(llm, templates, question, &chunks)?;
        history.push(reasoning.clone());
        let answer = generate_answer(llm, templates, question, &chunks, &history)?;

        if !config.judge_enabled {
            trace.push(PipelineState {
                iteration,
                query: query.clone(),
                s,
                selection: SelectionTrace::from_result(&selection),
                reasoning,
                answer: answer.clone(),
                verdict: None,
                q_norm: None,
            });
            return Ok(PipelineResult {
                final_answer: answer,
                best_iteration: iteration,
                terminated_by: TerminatedBy::Budget,
                trace: trace.clone(),
            });
        }

        let verdict = judge_answer(llm, templates, question, &answer, &chunks)?;
        let q_norm = verdict.q_norm();
        let quality = verdict.quality;
        trace.push(PipelineState {
            iteration,
            query: query.clone(),
            s,
            selection: SelectionTrace::from_result(&selection),
            reasoning: reasoning.clone(),
            answer: answer.clone(),
            verdict: Some(verdict),
            q_norm: Some(q_norm),
        });

        if q_norm >= config.tau {
            return Ok(PipelineResult {
                final_answer: answer,
                best_iteration: iteration,
                terminated_by: TerminatedBy::Threshold,
                trace: trace.clone(),
            });
        }
        if iteration == config.max_iterations {
            break;
        }

        s = match config.s_schedule {
            SSchedule::Dynamic => update_s(quality)?,
            SSchedule::Fixed => config.s1,
        };
        query = rewrite_query(llm, templates, &query, &answer, &reasoning)?;
    }

    // Budget exhausted: hand back the best-judged answer (ties go to the
    // earliest iteration), or the last one in strict mode.
    let best_iteration = if config.strict_final_answer {
        trace.len()
    } else {
        trace
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| {
                let qa = a.q_norm.unwrap_or(0.0);
                let qb = b.q_norm.unwrap_or(0.0);
                qa.partial_cmp(&qb)
                    .expect("q_norm is finite")
                    .then(j.cmp(i))
            })
            .map(|(i, _)| i + 1)
            .expect("at least one iteration ran")
    };
    Ok(PipelineResult {
        final_answer: trace[best_iteration - 1].answer.clone(),
        best_iteration,
        terminated_by: TerminatedBy::Budget,
        trace: trace.clone(),
    })
}
