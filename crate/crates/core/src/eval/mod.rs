//! Evaluation: QA metrics, dataset loading, the end-to-end harness, and
//! the diversity-weight sensitivity analysis.

mod dataset;
mod metrics;
mod sensitivity;

pub use dataset::{load_dataset, DatasetFormat, QaExample};
pub use metrics::{accuracy, exact_match, normalize_answer, rank_correlations, token_f1};
pub use sensitivity::{sensitivity_analysis, SensitivityRow};

use crate::embed::{EmbedError, EmbeddingProvider};
use crate::index::{IndexError, VectorIndex};
use crate::llm::{ChatProvider, PromptTemplates};
use crate::math::{cosine_kernel, max_pairwise_distance, vendi_score, EmbeddingVector};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineResult};
use crate::retrieval::{RetrievalError, StrategyRegistry};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("bad dataset file {path} (line {line}): {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid evaluation config: {message}")]
    Config { message: String },

    #[error("rankings do not match: {message}")]
    RankingMismatch { message: String },

    #[error("need at least {needed} items, got {got}")]
    InsufficientInput { needed: usize, got: usize },

    #[error(transparent)]
    Retrieval(#[from] RetrievalError),

    #[error(transparent)]
    Index(#[from] IndexError),

    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// One scored example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub example_id: String,
    /// Exact match, 0 or 1.
    pub em: u8,
    pub f1: f64,
    /// Containment accuracy, 0 or 1.
    pub acc: u8,
    /// Vendi Score of the answering iteration's selected documents.
    pub vs: f64,
    /// Max pairwise distance of the same documents; 0 for a single doc.
    pub mpd: f64,
    pub iterations: usize,
    pub answer: String,
    pub gold_answer: String,
}

/// One example that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleFailure {
    pub example_id: String,
    pub message: String,
}

/// Aggregates over the scored rows only; `scored`, `failed`, and `total`
/// disclose the denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalAggregates {
    pub em_pct: f64,
    pub f1_mean: f64,
    pub acc_pct: f64,
    pub vs_mean: f64,
    pub mpd_mean: f64,
    pub iterations_mean: f64,
    pub scored: usize,
    pub failed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_example: Vec<ExampleRow>,
    pub failures: Vec<ExampleFailure>,
    pub aggregates: EvalAggregates,
}

impl EvalReport {
    fn from_rows(per_example: Vec<ExampleRow>, failures: Vec<ExampleFailure>) -> Self {
        let aggregates = Self::aggregate(&per_example, &failures);
        Self {
            per_example,
            failures,
            aggregates,
        }
    }

    /// Recomputes aggregates from the rows. Public so report consumers
    /// can verify integrity.
    pub fn aggregate(rows: &[ExampleRow], failures: &[ExampleFailure]) -> EvalAggregates {
        let n = rows.len();
        let mean = |f: &dyn Fn(&ExampleRow) -> f64| -> f64 {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(|r| f(r)).sum::<f64>() / n as f64
            }
        };
        EvalAggregates {
            em_pct: 100.0 * mean(&|r| f64::from(r.em)),
            f1_mean: mean(&|r| r.f1),
            acc_pct: 100.0 * mean(&|r| f64::from(r.acc)),
            vs_mean: mean(&|r| r.vs),
            mpd_mean: mean(&|r| r.mpd),
            iterations_mean: mean(&|r| r.iterations as f64),
            scored: n,
            failed: failures.len(),
            total: n + failures.len(),
        }
    }
}

/// Everything an evaluation run needs, shared across worker threads.
pub struct EvalContext<'a> {
    pub index: &'a VectorIndex,
    pub embedder: &'a dyn EmbeddingProvider,
    pub llm: &'a dyn ChatProvider,
    pub templates: &'a PromptTemplates,
    pub registry: &'a StrategyRegistry,
    pub pipeline: &'a PipelineConfig,
    /// Score the accuracy column as strict exact match instead of
    /// gold-containment.
    pub strict_acc: bool,
}

/// Deterministic sample of `n` examples. Selection is seeded; the sampled
/// examples keep their dataset order.
pub fn sample_examples(examples: &[QaExample], n: usize, seed: u64) -> Vec<QaExample> {
    if n >= examples.len() {
        return examples.to_vec();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, examples.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| examples[i].clone()).collect()
}

/// Diversity metrics of the documents the final answer was produced
/// from: the answering iteration's selection, looked up in the index.
fn diversity_of(
    result: &PipelineResult,
    index: &VectorIndex,
) -> Result<(f64, f64), String> {
    let state = &result.trace[result.best_iteration - 1];
    let embeddings: Vec<EmbeddingVector> = state
        .selection
        .chunk_ids
        .iter()
        .map(|id| {
            index
                .get(id)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| format!("chunk {id} missing from index"))
        })
        .collect::<Result<_, _>>()?;
    let kernel = cosine_kernel(&embeddings).map_err(|e| e.to_string())?;
    let vs = vendi_score(&kernel).map_err(|e| e.to_string())?;
    let mpd = if embeddings.len() < 2 {
        0.0
    } else {
        max_pairwise_distance(&embeddings).map_err(|e| e.to_string())?
    };
    Ok((vs, mpd))
}

fn evaluate_one(example: &QaExample, ctx: &EvalContext) -> Result<ExampleRow, ExampleFailure> {
    let fail = |message: String| ExampleFailure {
        example_id: example.example_id.clone(),
        message,
    };
    let result = run_pipeline(
        &example.question,
        ctx.index,
        ctx.embedder,
        ctx.llm,
        ctx.templates,
        ctx.registry,
        ctx.pipeline,
    )
    .map_err(|e| fail(e.to_string()))?;
    let (vs, mpd) = diversity_of(&result, ctx.index).map_err(fail)?;
    let answer = result.final_answer;
    let acc = if ctx.strict_acc {
        exact_match(&answer, &example.gold_answer, &example.aliases)
    } else {
        accuracy(&answer, &example.gold_answer, &example.aliases)
    };
    Ok(ExampleRow {
        example_id: example.example_id.clone(),
        em: u8::from(exact_match(&answer, &example.gold_answer, &example.aliases)),
        f1: token_f1(&answer, &example.gold_answer),
        acc: u8::from(acc),
        vs,
        mpd,
        iterations: result.trace.len(),
        answer,
        gold_answer: example.gold_answer.clone(),
    })
}

/// Runs the pipeline over every example with `jobs` workers and scores
/// the answers. Per-example failures become report rows rather than
/// aborting the run. Rows come back sorted by example id.
pub fn evaluate_dataset(
    examples: &[QaExample],
    ctx: &EvalContext,
    jobs: usize,
) -> Result<EvalReport, EvalError> {
    if examples.is_empty() {
        return Err(EvalError::Config {
            message: "dataset is empty".to_string(),
        });
    }
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<ExampleRow>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<ExampleFailure>> = Mutex::new(Vec::new());
    let workers = jobs.max(1).min(examples.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= examples.len() {
                    break;
                }
                match evaluate_one(&examples[i], ctx) {
                    Ok(row) => rows.lock().unwrap().push(row),
                    Err(failure) => failures.lock().unwrap().push(failure),
                }
            });
        }
    });
    let mut rows = rows.into_inner().unwrap();
    let mut failures = failures.into_inner().unwrap();
    rows.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    failures.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    Ok(EvalReport::from_rows(rows, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{DeterministicEmbedder, EmbeddingProviderSpec};
    use crate::index::{Document, IndexMetadata};
    use crate::llm::{LlmProviderSpec, RoleScript, Scenario, ScriptedProvider};

    fn embedder() -> DeterministicEmbedder {
        DeterministicEmbedder::new(EmbeddingProviderSpec::deterministic(32, 7))
    }

    fn test_index() -> VectorIndex {
        let mut index = VectorIndex::new(
            32,
            IndexMetadata {
                corpus: "eval-test".to_string(),
                provider_fingerprint: String::new(),
                max_tokens: 512,
                overlap: 50,
            },
        );
        let docs: Vec<Document> = (0..8)
            .map(|i| Document {
                id: format!("doc{i}"),
                title: format!("Title {i}"),
                text: format!("document {i} talks about subject {} in detail", i % 3),
            })
            .collect();
        index.ingest_documents(&docs, &embedder(), 10_000).unwrap();
        index
    }

    fn examples(n: usize) -> Vec<QaExample> {
        (0..n)
            .map(|i| QaExample {
                example_id: format!("q{i:02}"),
                question: format!("what is subject {} about?", i % 3),
                gold_answer: format!("gold answer {i}"),
                contexts: Vec::new(),
                aliases: Vec::new(),
            })
            .collect()
    }

    /// Scripted provider answering every question with one iteration;
    /// `answers` are consumed in dataset order.
    fn provider(answers: Vec<String>) -> ScriptedProvider {
        let n = answers.len();
        let mut scenario = Scenario::new();
        scenario.insert(
            "reasoning".to_string(),
            RoleScript {
                responses: vec!["because the documents say so".to_string(); n],
                ..RoleScript::default()
            },
        );
        scenario.insert(
            "answer".to_string(),
            RoleScript {
                responses: answers,
                ..RoleScript::default()
            },
        );
        scenario.insert(
            "judge".to_string(),
            RoleScript {
                responses: vec![r#"{"C":9,"R":9,"Q":9}"#.to_string(); n],
                ..RoleScript::default()
            },
        );
        ScriptedProvider::new(LlmProviderSpec::scripted("unused.json"), scenario)
    }

    fn context<'a>(
        index: &'a VectorIndex,
        embedder: &'a DeterministicEmbedder,
        llm: &'a ScriptedProvider,
        templates: &'a PromptTemplates,
        registry: &'a StrategyRegistry,
        pipeline: &'a PipelineConfig,
    ) -> EvalContext<'a> {
        EvalContext {
            index,
            embedder,
            llm,
            templates,
            registry,
            pipeline,
            strict_acc: false,
        }
    }

    #[test]
    fn oracle_provider_scores_perfectly() {
        let index = test_index();
        let embedder = embedder();
        let examples = examples(4);
        let answers: Vec<String> = examples.iter().map(|e| e.gold_answer.clone()).collect();
        let llm = provider(answers);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let ctx = context(&index, &embedder, &llm, &templates, &registry, &pipeline);
        let report = evaluate_dataset(&examples, &ctx, 1).unwrap();
        assert_eq!(report.aggregates.em_pct, 100.0);
        assert_eq!(report.aggregates.f1_mean, 1.0);
        assert_eq!(report.aggregates.acc_pct, 100.0);
        assert_eq!(report.aggregates.scored, 4);
        assert_eq!(report.aggregates.failed, 0);
        for row in &report.per_example {
            assert!(row.vs >= 1.0);
            assert!(row.mpd >= 0.0);
            assert_eq!(row.iterations, 1);
        }
    }

    #[test]
    fn embedded_gold_separates_em_from_acc() {
        let index = test_index();
        let embedder = embedder();
        let examples = examples(2);
        let answers: Vec<String> = examples
            .iter()
            .map(|e| format!("i believe the answer is {} overall", e.gold_answer))
            .collect();
        let llm = provider(answers);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let ctx = context(&index, &embedder, &llm, &templates, &registry, &pipeline);
        let report = evaluate_dataset(&examples, &ctx, 1).unwrap();
        assert_eq!(report.aggregates.em_pct, 0.0);
        assert_eq!(report.aggregates.acc_pct, 100.0);
    }

    #[test]
    fn strict_acc_collapses_containment_onto_exact_match() {
        let index = test_index();
        let embedder = embedder();
        let examples = examples(2);
        let answers: Vec<String> = examples
            .iter()
            .map(|e| format!("i believe the answer is {} overall", e.gold_answer))
            .collect();
        let llm = provider(answers);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let mut ctx = context(&index, &embedder, &llm, &templates, &registry, &pipeline);
        ctx.strict_acc = true;
        let report = evaluate_dataset(&examples, &ctx, 1).unwrap();
        assert_eq!(report.aggregates.em_pct, 0.0);
        assert_eq!(report.aggregates.acc_pct, 0.0);
    }

    #[test]
    fn provider_failure_becomes_a_report_row() {
        let index = test_index();
        let embedder = embedder();
        let examples = examples(2);
        // Only one example's worth of responses: the second fails.
        let llm = provider(vec!["gold answer 0".to_string()]);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let ctx = context(&index, &embedder, &llm, &templates, &registry, &pipeline);
        let report = evaluate_dataset(&examples, &ctx, 1).unwrap();
        assert_eq!(report.per_example.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].example_id, "q01");
        assert_eq!(report.aggregates.scored, 1);
        assert_eq!(report.aggregates.failed, 1);
        assert_eq!(report.aggregates.total, 2);
        assert_eq!(report.aggregates.em_pct, 100.0);
    }

    #[test]
    fn aggregates_are_recomputable_from_rows() {
        let index = test_index();
        let embedder = embedder();
        let examples = examples(3);
        let llm = provider(vec![
            "gold answer 0".to_string(),
            "wrong".to_string(),
            "the full gold answer 2 sentence".to_string(),
        ]);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let ctx = context(&index, &embedder, &llm, &templates, &registry, &pipeline);
        let report = evaluate_dataset(&examples, &ctx, 1).unwrap();
        assert_eq!(
            report.aggregates,
            EvalReport::aggregate(&report.per_example, &report.failures)
        );
    }

    #[test]
    fn parallel_workers_produce_the_same_report() {
        let index = test_index();
        let embedder = embedder();
        let examples = examples(6);
        // Identical responses per role make worker interleaving moot.
        let llm_a = provider(vec!["gold answer 1".to_string(); 6]);
        let llm_b = provider(vec!["gold answer 1".to_string(); 6]);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let ctx_a = context(&index, &embedder, &llm_a, &templates, &registry, &pipeline);
        let ctx_b = context(&index, &embedder, &llm_b, &templates, &registry, &pipeline);
        let sequential = evaluate_dataset(&examples, &ctx_a, 1).unwrap();
        let parallel = evaluate_dataset(&examples, &ctx_b, 4).unwrap();
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn sampling_is_seeded_and_order_preserving() {
        let examples = examples(10);
        let a = sample_examples(&examples, 4, 7);
        let b = sample_examples(&examples, 4, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        // Dataset order is preserved among the sampled examples.
        for pair in a.windows(2) {
            assert!(pair[0].example_id < pair[1].example_id);
        }
        let c = sample_examples(&examples, 4, 8);
        assert_ne!(a, c, "different seeds should pick different samples");
        assert_eq!(sample_examples(&examples, 99, 7).len(), 10);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let index = test_index();
        let embedder = embedder();
        let llm = provider(vec![]);
        let templates = PromptTemplates::builtin();
        let registry = StrategyRegistry::with_defaults();
        let pipeline = PipelineConfig::default();
        let ctx = context(&index, &embedder, &llm, &templates, &registry, &pipeline);
        assert!(matches!(
            evaluate_dataset(&[], &ctx, 1),
            Err(EvalError::Config { .. })
        ));
    }
}
