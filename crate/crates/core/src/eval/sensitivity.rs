//! Sensitivity of the retrieval ranking to the diversity weight.
//!
//! For each query, the candidate pool is ranked by running greedy
//! selection to exhaustion (selection order is the rank). The ranking at
//! s = 0 is the pure-similarity baseline; rankings at higher weights are
//! compared against it with Kendall's tau-b and Spearman's rho. Low
//! correlations mean the weight is materially reordering retrieval.

use super::metrics::rank_correlations;
use super::EvalError;
use crate::embed::EmbeddingProvider;
use crate::index::VectorIndex;
use crate::retrieval::{RetrievalConfig, SelectionStrategy, VendiGreedyStrategy};
use serde::{Deserialize, Serialize};

/// One row of the sensitivity table: mean correlations against the s = 0
/// baseline over all queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub s: f64,
    pub mean_tau: f64,
    pub mean_rho: f64,
}

/// Ranks the full pool for every query at every weight and reports mean
/// rank correlations against the s = 0 baseline. `s_values` must contain
/// 0.0, the baseline itself; its row is identically (1, 1).
pub fn sensitivity_analysis(
    index: &VectorIndex,
    embedder: &dyn EmbeddingProvider,
    queries: &[String],
    s_values: &[f64],
    pool_size: usize,
) -> Result<Vec<SensitivityRow>, EvalError> {
    if queries.is_empty() {
        return Err(EvalError::Config {
            message: "sensitivity analysis needs at least one query".to_string(),
        });
    }
    if !s_values.contains(&0.0) {
        return Err(EvalError::Config {
            message: "s values must include the 0.0 baseline".to_string(),
        });
    }
    if index.len() < 2 {
        return Err(EvalError::InsufficientInput {
            needed: 2,
            got: index.len(),
        });
    }

    // Selection-order ranking of the query's pool at one weight.
    let rank_at = |query: &str, s: f64| -> Result<Vec<String>, EvalError> {
        let query_embedding = embedder
            .embed_batch(&[query])
            .map_err(|e| EvalError::Config {
                message: format!("query embedding failed: {e}"),
            })?
            .remove(0);
        let pool = index.top_m(&query_embedding, pool_size)?;
        let config = RetrievalConfig {
            k: pool.len(),
            s,
            ..RetrievalConfig::default()
        };
        let selection = VendiGreedyStrategy.select(&pool, &config)?;
        Ok(selection
            .chunks
            .iter()
            .map(|c| c.chunk.chunk_id.clone())
            .collect())
    };

    let baselines: Vec<Vec<String>> = queries
        .iter()
        .map(|q| rank_at(q, 0.0))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let mut tau_sum = 0.0;
        let mut rho_sum = 0.0;
        for (query, baseline) in queries.iter().zip(&baselines) {
            let ranking = rank_at(query, s)?;
            let (tau, rho) = rank_correlations(baseline, &ranking)?;
            tau_sum += tau;
            rho_sum += rho;
        }
        rows.push(SensitivityRow {
            s,
            mean_tau: tau_sum / queries.len() as f64,
            mean_rho: rho_sum / queries.len() as f64,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Chunk;
    use crate::embed::EmbeddingProviderSpec;
    use crate::index::IndexMetadata;
    use crate::math::EmbeddingVector;
    use rand::{Rng, SeedableRng};

    fn metadata() -> IndexMetadata {
        IndexMetadata {
            corpus: "synthetic".to_string(),
            provider_fingerprint: String::new(),
            max_tokens: 512,
            overlap: 50,
        }
    }

    fn chunk(id: &str) -> Chunk {
        Chunk {
            chunk_id: format!("{id}#0000"),
            doc_id: id.to_string(),
            title: String::new(),
            text: id.to_string(),
            token_span: (0, 1),
        }
    }

    /// Three tight clusters around orthogonal axes, with seeded jitter so
    /// similarities are distinct but cluster structure dominates.
    fn clustered_index(dim: usize, per_cluster: usize) -> VectorIndex {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut index = VectorIndex::new(dim, metadata());
        for (cluster, axis) in [0usize, 1, 2].into_iter().enumerate() {
            for d in 0..per_cluster {
                let mut values = vec![0.0; dim];
                values[axis] = 1.0;
                for v in values.iter_mut() {
                    *v += rng.gen_range(-0.05..0.05);
                }
                let vector = EmbeddingVector::new(values).unwrap().normalized().unwrap();
                index
                    .insert(chunk(&format!("c{cluster}d{d}")), vector)
                    .unwrap();
            }
        }
        index
    }

    /// Embedder whose only job is to map the query text onto the first
    /// axis; the index was built from raw vectors, not text.
    struct AxisQueryEmbedder {
        dim: usize,
    }

    impl crate::embed::EmbeddingProvider for AxisQueryEmbedder {
        fn spec(&self) -> &EmbeddingProviderSpec {
            unimplemented!("not needed for sensitivity tests")
        }

        fn embed_batch(
            &self,
            texts: &[&str],
        ) -> Result<Vec<EmbeddingVector>, crate::embed::EmbedError> {
            Ok(texts
                .iter()
                .map(|t| {
                    // "axis:<i>:<jitter seed>" picks a direction.
                    let parts: Vec<&str> = t.split(':').collect();
                    let axis: usize = parts[1].parse().unwrap();
                    let seed: u64 = parts[2].parse().unwrap();
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let mut values = vec![0.0; self.dim];
                    values[axis] = 1.0;
                    for v in values.iter_mut() {
                        *v += rng.gen_range(-0.02..0.02);
                    }
                    EmbeddingVector::new(values).unwrap().normalized().unwrap()
                })
                .collect())
        }
    }

    fn queries(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("axis:0:{i}")).collect()
    }

    #[test]
    fn baseline_row_is_exactly_one() {
        let index = clustered_index(6, 4);
        let rows = sensitivity_analysis(
            &index,
            &AxisQueryEmbedder { dim: 6 },
            &queries(5),
            &[0.0, 0.5],
            index.len(),
        )
        .unwrap();
        assert_eq!(rows[0].s, 0.0);
        assert_eq!(rows[0].mean_tau, 1.0);
        assert_eq!(rows[0].mean_rho, 1.0);
    }

    #[test]
    fn correlation_decays_as_the_weight_grows() {
        let index = clustered_index(6, 4);
        let s_values = [0.0, 0.25, 0.5, 0.75, 1.0];
        let rows = sensitivity_analysis(
            &index,
            &AxisQueryEmbedder { dim: 6 },
            &queries(6),
            &s_values,
            index.len(),
        )
        .unwrap();
        for pair in rows.windows(2) {
            assert!(
                pair[1].mean_tau <= pair[0].mean_tau + 1e-9,
                "tau rose from {} (s={}) to {} (s={})",
                pair[0].mean_tau,
                pair[0].s,
                pair[1].mean_tau,
                pair[1].s
            );
        }
        let last = rows.last().unwrap();
        assert!(
            last.mean_tau < 0.9,
            "max weight barely moved the ranking: tau = {}",
            last.mean_tau
        );
        for row in &rows {
            assert!((-1.0..=1.0).contains(&row.mean_tau));
            assert!((-1.0..=1.0).contains(&row.mean_rho));
        }
    }

    #[test]
    fn identical_documents_do_not_crash() {
        let mut index = VectorIndex::new(4, metadata());
        let vector = EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        for i in 0..5 {
            index.insert(chunk(&format!("same{i}")), vector.clone()).unwrap();
        }
        let rows = sensitivity_analysis(
            &index,
            &AxisQueryEmbedder { dim: 4 },
            &queries(2),
            &[0.0, 1.0],
            index.len(),
        )
        .unwrap();
        for row in rows {
            assert!(row.mean_tau.abs() <= 1.0 + 1e-12);
            assert!(row.mean_rho.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn missing_baseline_weight_is_rejected() {
        let index = clustered_index(6, 3);
        let err = sensitivity_analysis(
            &index,
            &AxisQueryEmbedder { dim: 6 },
            &queries(2),
            &[0.5, 1.0],
            index.len(),
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::Config { .. }));
    }

    #[test]
    fn tiny_index_is_rejected() {
        let mut index = VectorIndex::new(4, metadata());
        index
            .insert(chunk("only"), EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        assert!(matches!(
            sensitivity_analysis(
                &index,
                &AxisQueryEmbedder { dim: 4 },
                &queries(1),
                &[0.0],
                1,
            ),
            Err(EvalError::InsufficientInput { .. })
        ));
    }
}
