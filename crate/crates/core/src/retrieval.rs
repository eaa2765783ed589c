//! Selection strategies over a candidate pool.
//!
//! Retrieval runs in two phases: an exact top-m similarity scan builds a
//! candidate pool (see [`crate::index`]), then a strategy picks k chunks
//! from that pool. Three strategies ship in the box:
//!
//! - `similarity` (alias `ss`): plain top-k by query similarity.
//! - `mmr`: maximal marginal relevance, the classic relevance-redundancy
//!   trade-off with weight lambda.
//! - `vendi`: greedy selection maximizing the Vendi Retrieval Score, a
//!   convex combination of normalized Vendi Score (diversity) and mean
//!   query similarity (relevance) weighted by `s`.
//!
//! Strategies live behind a trait and are looked up by name in a
//! [`StrategyRegistry`], so a caller can switch selection behavior from
//! configuration alone.

use crate::index::ScoredChunk;
use crate::math::{cosine_kernel, vendi_score, MathError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Default candidate pool size for the top-m scan.
pub const DEFAULT_POOL_SIZE: usize = 50;
/// Default number of chunks to select.
pub const DEFAULT_SELECTION_SIZE: usize = 10;
/// Default diversity weight.
pub const DEFAULT_DIVERSITY_WEIGHT: f64 = 0.8;
/// Default MMR relevance weight.
pub const DEFAULT_MMR_LAMBDA: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("candidate pool is empty")]
    EmptyPool,

    #[error("invalid retrieval config: {message}")]
    InvalidConfig { message: String },

    #[error("unknown strategy {name:?}; available: {available}")]
    UnknownStrategy { name: String, available: String },

    #[error(transparent)]
    Math(#[from] MathError),
}

/// Knobs shared by every strategy. `s` weights diversity against
/// relevance for the vendi strategy; `mmr_lambda` weights relevance
/// against redundancy for MMR; the others read only `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub strategy: String,
    /// Candidate pool size for the first-phase scan.
    pub m: usize,
    /// Number of chunks to select from the pool.
    pub k: usize,
    /// Diversity weight in [0, 1]. 0 reduces to similarity ranking.
    pub s: f64,
    pub mmr_lambda: f64,
    /// Use the raw Vendi Score in the combination instead of the
    /// normalized one. Changes the score's scale from [0, 1] to [1, k].
    pub raw_vs: bool,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            strategy: "vendi".to_string(),
            m: DEFAULT_POOL_SIZE,
            k: DEFAULT_SELECTION_SIZE,
            s: DEFAULT_DIVERSITY_WEIGHT,
            mmr_lambda: DEFAULT_MMR_LAMBDA,
            raw_vs: false,
        }
    }
}

impl RetrievalConfig {
    fn validate(&self) -> Result<(), RetrievalError> {
        if self.k == 0 {
            return Err(RetrievalError::InvalidConfig {
                message: "k must be at least 1".to_string(),
            });
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(RetrievalError::InvalidConfig {
                message: format!("s must be in [0, 1], got {}", self.s),
            });
        }
        if !(0.0..=1.0).contains(&self.mmr_lambda) {
            return Err(RetrievalError::InvalidConfig {
                message: format!("mmr_lambda must be in [0, 1], got {}", self.mmr_lambda),
            });
        }
        Ok(())
    }
}

/// Score components of one selected set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VrsBreakdown {
    /// Combined score actually maximized by the vendi strategy.
    pub vrs: f64,
    /// Raw Vendi Score of the set, in [1, k].
    pub vs: f64,
    /// Vendi Score rescaled to [0, 1]; 0 for singleton sets.
    pub vs_norm: f64,
    /// Mean query similarity, each term clamped to [0, 1].
    pub ss: f64,
}

/// One greedy step: which chunk was added and the scores of the set
/// after adding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub step: usize,
    pub chunk_id: String,
    pub similarity: f64,
    pub vrs: f64,
    pub vs: f64,
    pub ss: f64,
}

/// Final output of a strategy: chunks in selection order, the scores of
/// the full set, and a per-step log for tracing.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub strategy: String,
    pub s: f64,
    pub chunks: Vec<ScoredChunk>,
    pub scores: VrsBreakdown,
    pub steps: Vec<SelectionStep>,
}

/// Mean query similarity with each term clamped to [0, 1].
pub fn similarity_score(selected: &[ScoredChunk]) -> f64 {
    if selected.is_empty() {
        return 0.0;
    }
    let total: f64 = selected.iter().map(|c| c.similarity.clamp(0.0, 1.0)).sum();
    total / selected.len() as f64
}

/// Scores a selected set: Vendi Score of the set's cosine kernel,
/// normalized form, mean query similarity, and their combination
/// `s * diversity + (1 - s) * relevance`.
pub fn vendi_retrieval_score(
    selected: &[ScoredChunk],
    s: f64,
    raw_vs: bool,
) -> Result<VrsBreakdown, RetrievalError> {
    if selected.is_empty() {
        return Err(RetrievalError::EmptyPool);
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(RetrievalError::InvalidConfig {
            message: format!("s must be in [0, 1], got {s}"),
        });
    }
    let embeddings: Vec<_> = selected.iter().map(|c| c.embedding.clone()).collect();
    let kernel = cosine_kernel(&embeddings)?;
    let vs = vendi_score(&kernel)?;
    let k = selected.len();
    let vs_norm = if k >= 2 { (vs - 1.0) / (k as f64 - 1.0) } else { 0.0 };
    let ss = similarity_score(selected);
    let diversity = if raw_vs { vs } else { vs_norm };
    Ok(VrsBreakdown {
        vrs: s * diversity + (1.0 - s) * ss,
        vs,
        vs_norm,
        ss,
    })
}

/// A way of picking k chunks from a candidate pool. Implementations must
/// be deterministic: identical inputs give identical outputs.
pub trait SelectionStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn select(
        &self,
        pool: &[ScoredChunk],
        config: &RetrievalConfig,
    ) -> Result<SelectionResult, RetrievalError>;
}

/// Name-keyed strategy lookup. `with_defaults` registers the three
/// built-in strategies; callers may register their own.
pub struct StrategyRegistry {
    strategies: BTreeMap<String, Arc<dyn SelectionStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            strategies: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut registry = Self::empty();
        let similarity = Arc::new(SimilarityStrategy);
        registry.register("similarity", similarity.clone());
        registry.register("ss", similarity);
        registry.register("mmr", Arc::new(MmrStrategy));
        registry.register("vendi", Arc::new(VendiGreedyStrategy));
        registry
    }

    pub fn register(&mut self, name: &str, strategy: Arc<dyn SelectionStrategy>) {
        self.strategies.insert(name.to_string(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SelectionStrategy>, RetrievalError> {
        self.strategies.get(name).cloned().ok_or_else(|| {
            RetrievalError::UnknownStrategy {
                name: name.to_string(),
                available: self.names().join(", "),
            }
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.strategies.keys().cloned().collect()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

/// Orders pool indices the way every greedy seed and tie-break does:
/// higher query similarity first, then ascending chunk id.
fn preference(a: &ScoredChunk, b: &ScoredChunk) -> std::cmp::Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.chunk.chunk_id.cmp(&b.chunk.chunk_id))
}

/// Builds the per-step log and final scores for a selection made in a
/// given order, recomputing the set scores after each addition.
fn finish_selection(
    strategy: &str,
    selected: Vec<ScoredChunk>,
    config: &RetrievalConfig,
) -> Result<SelectionResult, RetrievalError> {
    let mut steps = Vec::with_capacity(selected.len());
    for end in 1..=selected.len() {
        let scores = vendi_retrieval_score(&selected[..end], config.s, config.raw_vs)?;
        steps.push(SelectionStep {
            step: end,
            chunk_id: selected[end - 1].chunk.chunk_id.clone(),
            similarity: selected[end - 1].similarity,
            vrs: scores.vrs,
            vs: scores.vs,
            ss: scores.ss,
        });
    }
    let scores = vendi_retrieval_score(&selected, config.s, config.raw_vs)?;
    Ok(SelectionResult {
        strategy: strategy.to_string(),
        s: config.s,
        chunks: selected,
        scores,
        steps,
    })
}

// ── Similarity top-k ────────────────────────────────────────────────────

/// Plain top-k by query similarity. The relevance-only baseline.
pub struct SimilarityStrategy;

impl SelectionStrategy for SimilarityStrategy {
    fn name(&self) -> &'static str {
        "similarity"
    }

    fn select(
        &self,
        pool: &[ScoredChunk],
        config: &RetrievalConfig,
    ) -> Result<SelectionResult, RetrievalError> {
        config.validate()?;
        if pool.is_empty() {
            return Err(RetrievalError::EmptyPool);
        }
        let mut ranked: Vec<ScoredChunk> = pool.to_vec();
        ranked.sort_by(preference);
        ranked.truncate(config.k);
        finish_selection(self.name(), ranked, config)
    }
}

// ── Maximal marginal relevance ──────────────────────────────────────────

/// Greedy MMR: each step adds the candidate maximizing
/// `lambda * sim(query, c) - (1 - lambda) * max_{d in selected} sim(c, d)`.
pub struct MmrStrategy;

impl SelectionStrategy for MmrStrategy {
    fn name(&self) -> &'static str {
        "mmr"
    }

    fn select(
        &self,
        pool: &[ScoredChunk],
        config: &RetrievalConfig,
    ) -> Result<SelectionResult, RetrievalError> {
        config.validate()?;
        if pool.is_empty() {
            return Err(RetrievalError::EmptyPool);
        }
        let lambda = config.mmr_lambda;
        let take = config.k.min(pool.len());
        let mut remaining: Vec<ScoredChunk> = pool.to_vec();
        let mut selected: Vec<ScoredChunk> = Vec::with_capacity(take);
        while selected.len() < take {
            let mut best: Option<(usize, f64)> = None;
            for (i, candidate) in remaining.iter().enumerate() {
                let redundancy = selected
                    .iter()
                    .map(|d| candidate.embedding.cosine(&d.embedding).expect("same dim"))
                    .fold(f64::NEG_INFINITY, f64::max);
                let redundancy = if selected.is_empty() { 0.0 } else { redundancy };
                let score = lambda * candidate.similarity - (1.0 - lambda) * redundancy;
                let better = match best {
                    None => true,
                    Some((j, s)) => {
                        score > s
                            || (score == s
                                && preference(candidate, &remaining[j])
                                    == std::cmp::Ordering::Less)
                    }
                };
                if better {
                    best = Some((i, score));
                }
            }
            let (i, _) = best.expect("remaining is non-empty");
            selected.push(remaining.remove(i));
        }
        finish_selection(self.name(), selected, config)
    }
}

// ── Diversity-aware greedy selection ────────────────────────────────────

/// Greedy maximization of the Vendi Retrieval Score. Seeds with the most
/// query-similar chunk, then each step adds the candidate whose addition
/// yields the highest score for the augmented set. Ties go to the more
/// query-similar candidate, then the lexically smaller chunk id.
pub struct VendiGreedyStrategy;

impl SelectionStrategy for VendiGreedyStrategy {
    fn name(&self) -> &'static str {
        "vendi"
    }

    fn select(
        &self,
        pool: &[ScoredChunk],
        config: &RetrievalConfig,
    ) -> Result<SelectionResult, RetrievalError> {
        config.validate()?;
        if pool.is_empty() {
            return Err(RetrievalError::EmptyPool);
        }
        let take = config.k.min(pool.len());
        let mut remaining: Vec<ScoredChunk> = pool.to_vec();
        let seed = remaining
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| preference(a, b))
            .map(|(i, _)| i)
            .expect("pool is non-empty");
        let mut selected: Vec<ScoredChunk> = vec![remaining.remove(seed)];
        let mut trial: Vec<ScoredChunk> = selected.clone();
        while selected.len() < take && !remaining.is_empty() {
            let mut best: Option<(usize, f64)> = None;
            for (i, candidate) in remaining.iter().enumerate() {
                trial.push(candidate.clone());
                let scores = vendi_retrieval_score(&trial, config.s, config.raw_vs)?;
                trial.pop();
                let better = match best {
                    None => true,
                    Some((j, s)) => {
                        scores.vrs > s
                            || (scores.vrs == s
                                && preference(candidate, &remaining[j])
                                    == std::cmp::Ordering::Less)
                    }
                };
                if better {
                    best = Some((i, scores.vrs));
                }
            }
            let (i, _) = best.expect("remaining is non-empty");
            let chosen = remaining.remove(i);
            trial.push(chosen.clone());
            selected.push(chosen);
        }
        finish_selection(self.name(), selected, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Chunk;
    use crate::embed::{DeterministicEmbedder, EmbeddingProvider, EmbeddingProviderSpec};
    use crate::math::EmbeddingVector;
    use proptest::prelude::*;

    fn scored(id: &str, values: Vec<f64>, query: &EmbeddingVector) -> ScoredChunk {
        let embedding = EmbeddingVector::new(values).unwrap().normalized().unwrap();
        let similarity = query.cosine(&embedding).unwrap();
        ScoredChunk {
            chunk: Chunk {
                chunk_id: format!("{id}#0000"),
                doc_id: id.to_string(),
                title: String::new(),
                text: id.to_string(),
                token_span: (0, 1),
            },
            embedding,
            similarity,
        }
    }

    /// Five candidates: two near-duplicates close to the query, two
    /// equally relevant chunks on different axes, one off-topic.
    fn near_duplicate_pool() -> (EmbeddingVector, Vec<ScoredChunk>) {
        let query = EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let pool = vec![
            scored("dup-a", vec![1.0, 0.05, 0.0, 0.0], &query),
            scored("dup-b", vec![1.0, 0.06, 0.0, 0.0], &query),
            scored("mid-1", vec![0.8, 0.6, 0.0, 0.0], &query),
            scored("mid-2", vec![0.8, 0.0, 0.6, 0.0], &query),
            scored("off", vec![0.02, 0.0, 0.0, 1.0], &query),
        ];
        (query, pool)
    }

    /// Larger pool with organic similarity structure from the hash
    /// embedder.
    fn text_pool(n: usize) -> Vec<ScoredChunk> {
        let provider = DeterministicEmbedder::new(EmbeddingProviderSpec::deterministic(32, 7));
        let texts: Vec<String> = (0..n)
            .map(|i| format!("document number {i} about topic {} with shared words", i % 4))
            .collect();
        let refs: Vec<&str> = texts.iter().map(|t| t.as_str()).collect();
        let embeddings = provider.embed_batch(&refs).unwrap();
        let query = provider.embed_batch(&["topic 1 shared words"]).unwrap().remove(0);
        embeddings
            .into_iter()
            .enumerate()
            .map(|(i, embedding)| {
                let similarity = query.cosine(&embedding).unwrap();
                ScoredChunk {
                    chunk: Chunk {
                        chunk_id: format!("d{i:03}#0000"),
                        doc_id: format!("d{i:03}"),
                        title: String::new(),
                        text: texts[i].clone(),
                        token_span: (0, 8),
                    },
                    embedding,
                    similarity,
                }
            })
            .collect()
    }

    fn ids(result: &SelectionResult) -> Vec<&str> {
        result.chunks.iter().map(|c| c.chunk.chunk_id.as_str()).collect()
    }

    fn config(strategy: &str, k: usize, s: f64) -> RetrievalConfig {
        RetrievalConfig {
            strategy: strategy.to_string(),
            k,
            s,
            ..RetrievalConfig::default()
        }
    }

    #[test]
    fn similarity_takes_top_k_in_order() {
        let (_, pool) = near_duplicate_pool();
        let result = SimilarityStrategy.select(&pool, &config("similarity", 3, 0.5)).unwrap();
        assert_eq!(ids(&result), ["dup-a#0000", "dup-b#0000", "mid-1#0000"]);
    }

    #[test]
    fn vendi_at_s_zero_equals_similarity_ranking() {
        let pool = text_pool(20);
        let cfg = config("vendi", 8, 0.0);
        let vendi = VendiGreedyStrategy.select(&pool, &cfg).unwrap();
        let similarity = SimilarityStrategy.select(&pool, &cfg).unwrap();
        assert_eq!(ids(&vendi), ids(&similarity));
    }

    #[test]
    fn vendi_k1_picks_most_similar() {
        let (_, pool) = near_duplicate_pool();
        let result = VendiGreedyStrategy.select(&pool, &config("vendi", 1, 0.9)).unwrap();
        assert_eq!(ids(&result), ["dup-a#0000"]);
        // Singleton sets have no diversity; the score is pure relevance.
        assert_eq!(result.scores.vs, 1.0);
        assert_eq!(result.scores.vs_norm, 0.0);
    }

    #[test]
    fn vendi_avoids_near_duplicates() {
        let (_, pool) = near_duplicate_pool();
        let cfg = config("vendi", 3, 0.5);
        let vendi = VendiGreedyStrategy.select(&pool, &cfg).unwrap();
        let picked = ids(&vendi);
        let dupes = picked
            .iter()
            .filter(|id| id.starts_with("dup-"))
            .count();
        assert_eq!(dupes, 1, "picked both near-duplicates: {picked:?}");
        // The relevance-only baseline does pick both.
        let baseline = SimilarityStrategy.select(&pool, &cfg).unwrap();
        assert!(ids(&baseline).iter().filter(|id| id.starts_with("dup-")).count() == 2);
    }

    #[test]
    fn greedy_matches_exhaustive_search_on_small_pool() {
        let (_, pool) = near_duplicate_pool();
        let cfg = config("vendi", 3, 0.3);
        let greedy = VendiGreedyStrategy.select(&pool, &cfg).unwrap();

        // Exhaustive scan of all C(5, 3) subsets.
        let mut best_vrs = f64::NEG_INFINITY;
        let mut best_set: Vec<String> = Vec::new();
        for a in 0..pool.len() {
            for b in (a + 1)..pool.len() {
                for c in (b + 1)..pool.len() {
                    let subset = vec![pool[a].clone(), pool[b].clone(), pool[c].clone()];
                    let scores = vendi_retrieval_score(&subset, cfg.s, false).unwrap();
                    if scores.vrs > best_vrs {
                        best_vrs = scores.vrs;
                        best_set = subset
                            .iter()
                            .map(|x| x.chunk.chunk_id.clone())
                            .collect();
                    }
                }
            }
        }
        let mut greedy_set: Vec<String> =
            greedy.chunks.iter().map(|c| c.chunk.chunk_id.clone()).collect();
        greedy_set.sort();
        best_set.sort();
        assert_eq!(greedy_set, best_set);
        assert!((greedy.scores.vrs - best_vrs).abs() <= 1e-12);
    }

    #[test]
    fn mmr_lambda_one_equals_similarity() {
        let pool = text_pool(15);
        let cfg = RetrievalConfig {
            strategy: "mmr".to_string(),
            k: 6,
            mmr_lambda: 1.0,
            ..RetrievalConfig::default()
        };
        let mmr = MmrStrategy.select(&pool, &cfg).unwrap();
        let similarity = SimilarityStrategy.select(&pool, &cfg).unwrap();
        assert_eq!(ids(&mmr), ids(&similarity));
    }

    #[test]
    fn mmr_lambda_zero_spreads_the_selection() {
        let (_, pool) = near_duplicate_pool();
        let cfg = RetrievalConfig {
            strategy: "mmr".to_string(),
            k: 2,
            mmr_lambda: 0.0,
            ..RetrievalConfig::default()
        };
        let result = MmrStrategy.select(&pool, &cfg).unwrap();
        // First pick is the most relevant; second is the one farthest
        // from it, which is the off-topic chunk.
        assert_eq!(ids(&result), ["dup-a#0000", "off#0000"]);
    }

    #[test]
    fn breakdown_is_the_exact_convex_combination() {
        let (_, pool) = near_duplicate_pool();
        for s in [0.0, 0.15, 0.5, 0.85, 1.0] {
            let scores = vendi_retrieval_score(&pool[..3], s, false).unwrap();
            assert_eq!(scores.vrs, s * scores.vs_norm + (1.0 - s) * scores.ss);
        }
    }

    #[test]
    fn raw_vs_flag_switches_the_diversity_term() {
        let (_, pool) = near_duplicate_pool();
        let normalized = vendi_retrieval_score(&pool[..3], 0.5, false).unwrap();
        let raw = vendi_retrieval_score(&pool[..3], 0.5, true).unwrap();
        assert_eq!(raw.vs, normalized.vs);
        assert_eq!(raw.vrs, 0.5 * raw.vs + 0.5 * raw.ss);
        assert!(raw.vrs > normalized.vrs);
    }

    #[test]
    fn similarity_score_clamps_negative_cosines() {
        let query = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let pool = vec![
            scored("pos", vec![1.0, 0.0], &query),
            scored("neg", vec![-1.0, 0.0], &query),
        ];
        // The negative cosine contributes 0, not -1.
        assert_eq!(similarity_score(&pool), 0.5);
    }

    #[test]
    fn registry_resolves_builtin_names() {
        let registry = StrategyRegistry::with_defaults();
        for name in ["similarity", "ss", "mmr", "vendi"] {
            assert!(registry.get(name).is_ok(), "missing {name}");
        }
        assert_eq!(registry.get("ss").unwrap().name(), "similarity");
    }

    #[test]
    fn unknown_strategy_lists_available_names() {
        let registry = StrategyRegistry::with_defaults();
        match registry.get("bm25") {
            Err(RetrievalError::UnknownStrategy { name, available }) => {
                assert_eq!(name, "bm25");
                assert_eq!(available, "mmr, similarity, ss, vendi");
            }
            other => panic!("expected UnknownStrategy, got {:?}", other.map(|s| s.name())),
        }
    }

    #[test]
    fn selection_is_deterministic() {
        let pool = text_pool(25);
        let cfg = config("vendi", 10, 0.7);
        let a = VendiGreedyStrategy.select(&pool, &cfg).unwrap();
        let b = VendiGreedyStrategy.select(&pool, &cfg).unwrap();
        assert_eq!(ids(&a), ids(&b));
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn per_step_log_covers_every_pick() {
        let pool = text_pool(12);
        let cfg = config("vendi", 5, 0.6);
        let result = VendiGreedyStrategy.select(&pool, &cfg).unwrap();
        assert_eq!(result.steps.len(), result.chunks.len());
        for (i, step) in result.steps.iter().enumerate() {
            assert_eq!(step.step, i + 1);
            assert_eq!(step.chunk_id, result.chunks[i].chunk.chunk_id);
        }
        let last = result.steps.last().unwrap();
        assert_eq!(last.vrs, result.scores.vrs);
        assert_eq!(last.vs, result.scores.vs);
    }

    #[test]
    fn empty_pool_is_an_error() {
        let cfg = config("vendi", 3, 0.5);
        assert!(matches!(
            VendiGreedyStrategy.select(&[], &cfg),
            Err(RetrievalError::EmptyPool)
        ));
    }

    #[test]
    fn out_of_range_weight_is_rejected() {
        let (_, pool) = near_duplicate_pool();
        let cfg = config("vendi", 3, 1.5);
        assert!(matches!(
            VendiGreedyStrategy.select(&pool, &cfg),
            Err(RetrievalError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn selection_caps_at_pool_size() {
        let (_, pool) = near_duplicate_pool();
        let result = VendiGreedyStrategy.select(&pool, &config("vendi", 50, 0.5)).unwrap();
        assert_eq!(result.chunks.len(), pool.len());
    }

    proptest! {
        /// With s = 0 the greedy objective degenerates to mean
        /// similarity, so the selection must equal the similarity
        /// ranking on every pool, set and order both.
        #[test]
        fn s_zero_equivalence_holds_on_random_pools(
            seed in 0u64..500,
            n in 2usize..20,
            k in 1usize..10,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let query = EmbeddingVector::new(vec![1.0, 0.0, 0.0]).unwrap();
            let pool: Vec<ScoredChunk> = (0..n)
                .map(|i| {
                    let values: Vec<f64> =
                        (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
                    scored(&format!("r{i:03}"), values, &query)
                })
                .collect();
            let cfg = config("vendi", k, 0.0);
            let vendi = VendiGreedyStrategy.select(&pool, &cfg).unwrap();
            let similarity = SimilarityStrategy.select(&pool, &cfg).unwrap();
            prop_assert_eq!(ids(&vendi), ids(&similarity));
        }

        /// Selections never repeat a chunk and always return
        /// min(k, pool size) picks.
        #[test]
        fn selections_are_duplicate_free(
            seed in 0u64..200,
            n in 1usize..15,
            k in 1usize..12,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let query = EmbeddingVector::new(vec![1.0, 0.0, 0.0]).unwrap();
            let pool: Vec<ScoredChunk> = (0..n)
                .map(|i| {
                    let values: Vec<f64> =
                        (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
                    scored(&format!("p{i:03}"), values, &query)
                })
                .collect();
            for strategy in [
                &VendiGreedyStrategy as &dyn SelectionStrategy,
                &MmrStrategy,
                &SimilarityStrategy,
            ] {
                let result = strategy.select(&pool, &config("x", k, 0.4)).unwrap();
                prop_assert_eq!(result.chunks.len(), k.min(n));
                let mut seen: Vec<&str> = ids(&result);
                seen.sort();
                seen.dedup();
                prop_assert_eq!(seen.len(), result.chunks.len());
            }
        }
    }
}
