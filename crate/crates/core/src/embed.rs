//! Embedding providers behind a common trait.
//!
//! Two kinds ship in the box:
//!
//! - `deterministic-test`: fully offline. Each whitespace token is hashed
//!   to a pseudo-random unit direction (seeded, so byte-identical across
//!   runs), the directions are averaged, and the result is L2-normalized.
//!   Texts sharing tokens share directions, which gives realistic cosine
//!   structure without any model.
//! - `remote-http`: a JSON embeddings POST in the common OpenAI-compatible
//!   shape (`{"model", "input": [...]}` in, `{"data": [{"index",
//!   "embedding"}]}` out). API key is read from `VENDI_EMBED_API_KEY`.
//!
//! Every provider returns unit-normalized vectors, so cosine similarity
//! downstream is a plain dot product.

use crate::math::EmbeddingVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::{Condvar, Mutex};

/// Env var holding the API key for the remote embedding endpoint.
pub const EMBED_API_KEY_VAR: &str = "VENDI_EMBED_API_KEY";
/// Default model name for the remote provider.
pub const DEFAULT_REMOTE_MODEL: &str = "all-mpnet-base-v2";
/// Dimension of the default remote model.
pub const DEFAULT_REMOTE_DIM: usize = 768;
/// Default dimension of the deterministic test embedder.
pub const DEFAULT_TEST_DIM: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("empty batch")]
    EmptyBatch,

    #[error("text at position {index} has no tokens")]
    EmptyText { index: usize },

    #[error("embedding provider failed after {attempts} attempt(s): {message}{}",
            if *.retryable { " (retryable)" } else { "" })]
    Provider {
        message: String,
        attempts: u32,
        retryable: bool,
    },

    #[error("provider returned {got} vectors for {expected} inputs")]
    ContractCount { expected: usize, got: usize },

    #[error("provider returned dimension {got}, spec says {expected}")]
    ContractDim { expected: usize, got: usize },

    #[error("provider returned a non-finite or zero-norm vector at position {index}")]
    ContractValue { index: usize },

    #[error("remote provider requires an endpoint URL")]
    MissingEndpoint,
}

/// Which provider implementation to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingKind {
    DeterministicTest,
    RemoteHttp,
}

/// Declarative description of an embedding provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingProviderSpec {
    pub kind: EmbeddingKind,
    pub model_name: String,
    pub dim: usize,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    /// Seed for the deterministic provider; ignored by remote.
    pub seed: u64,
    /// Max concurrent HTTP calls for the remote provider.
    pub max_in_flight: usize,
}

impl EmbeddingProviderSpec {
    pub fn deterministic(dim: usize, seed: u64) -> Self {
        Self {
            kind: EmbeddingKind::DeterministicTest,
            model_name: "deterministic-test".to_string(),
            dim,
            endpoint: None,
            batch_size: 10_000,
            seed,
            max_in_flight: 1,
        }
    }

    pub fn remote(endpoint: &str, model_name: &str, dim: usize) -> Self {
        Self {
            kind: EmbeddingKind::RemoteHttp,
            model_name: model_name.to_string(),
            dim,
            endpoint: Some(endpoint.to_string()),
            batch_size: 10_000,
            seed: 0,
            max_in_flight: 4,
        }
    }

    /// Stable identity string stored in index metadata, so a loaded index
    /// can be checked against the provider that will query it.
    pub fn fingerprint(&self) -> String {
        match self.kind {
            EmbeddingKind::DeterministicTest => format!(
                "deterministic-test:{}:dim={}:seed={}",
                self.model_name, self.dim, self.seed
            ),
            EmbeddingKind::RemoteHttp => {
                format!("remote-http:{}:dim={}", self.model_name, self.dim)
            }
        }
    }
}

/// A source of embeddings. Implementations must preserve input order and
/// return one unit-normalized vector of `spec().dim` per input text, and
/// must tolerate concurrent calls.
pub trait EmbeddingProvider: Send + Sync {
    fn spec(&self) -> &EmbeddingProviderSpec;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

/// Constructs the provider named by a spec.
pub fn build_provider(
    spec: &EmbeddingProviderSpec,
) -> Result<Box<dyn EmbeddingProvider>, EmbedError> {
    match spec.kind {
        EmbeddingKind::DeterministicTest => {
            Ok(Box::new(DeterministicEmbedder::new(spec.clone())))
        }
        EmbeddingKind::RemoteHttp => Ok(Box::new(RemoteEmbedder::new(spec.clone())?)),
    }
}

// ── Deterministic test embedder ─────────────────────────────────────────

/// Offline hash-based embedder. Byte-identical output for identical input.
pub struct DeterministicEmbedder {
    spec: EmbeddingProviderSpec,
}

impl DeterministicEmbedder {
    pub fn new(spec: EmbeddingProviderSpec) -> Self {
        Self { spec }
    }

    fn token_direction(&self, token: &str) -> Vec<f64> {
        // FNV-1a keeps the token -> seed map stable across builds.
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in token.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(hash ^ self.spec.seed);
        let mut direction: Vec<f64> = (0..self.spec.dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in direction.iter_mut() {
            *v /= norm;
        }
        direction
    }

    fn embed_one(&self, text: &str, index: usize) -> Result<EmbeddingVector, EmbedError> {
        let mut sum = vec![0.0; self.spec.dim];
        let mut count = 0usize;
        for token in text.split_whitespace() {
            for (acc, v) in sum.iter_mut().zip(self.token_direction(token)) {
                *acc += v;
            }
            count += 1;
        }
        if count == 0 {
            return Err(EmbedError::EmptyText { index });
        }
        let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-12 {
            // Token directions cancelled out; fall back to the first
            // token's direction so the result is still deterministic.
            let first = text.split_whitespace().next().expect("count > 0");
            sum = self.token_direction(first);
        } else {
            for v in sum.iter_mut() {
                *v /= norm;
            }
        }
        EmbeddingVector::new(sum).map_err(|_| EmbedError::ContractValue { index })
    }
}

impl EmbeddingProvider for DeterministicEmbedder {
    fn spec(&self) -> &EmbeddingProviderSpec {
        &self.spec
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyBatch);
        }
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| self.embed_one(t, i))
            .collect()
    }
}

// ── Remote HTTP embedder ────────────────────────────────────────────────

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedItem>,
}

#[derive(Deserialize)]
struct EmbedItem {
    index: usize,
    embedding: Vec<f64>,
}

/// Counting semaphore bounding concurrent HTTP calls.
pub(crate) struct InFlightGate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl InFlightGate {
    pub(crate) fn new(max: usize) -> Self {
        Self {
            slots: Mutex::new(max.max(1)),
            freed: Condvar::new(),
        }
    }

    pub(crate) fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut slots = self.slots.lock().unwrap();
        while *slots == 0 {
            slots = self.freed.wait(slots).unwrap();
        }
        *slots -= 1;
        drop(slots);
        let out = f();
        *self.slots.lock().unwrap() += 1;
        self.freed.notify_one();
        out
    }
}

/// HTTP embedder speaking the OpenAI-compatible embeddings shape.
pub struct RemoteEmbedder {
    spec: EmbeddingProviderSpec,
    client: reqwest::blocking::Client,
    gate: InFlightGate,
}

impl RemoteEmbedder {
    pub fn new(spec: EmbeddingProviderSpec) -> Result<Self, EmbedError> {
        if spec.endpoint.is_none() {
            return Err(EmbedError::MissingEndpoint);
        }
        let gate = InFlightGate::new(spec.max_in_flight);
        Ok(Self {
            spec,
            client: reqwest::blocking::Client::new(),
            gate,
        })
    }

    fn post_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let endpoint = self.spec.endpoint.as_deref().expect("checked in new");
        let body = EmbedRequest {
            model: &self.spec.model_name,
            input: texts,
        };
        let mut request = self.client.post(endpoint).json(&body);
        if let Ok(key) = std::env::var(EMBED_API_KEY_VAR) {
            request = request.bearer_auth(key);
        }
        let response = self.gate.run(|| request.send()).map_err(|e| {
            EmbedError::Provider {
                message: e.to_string(),
                attempts: 1,
                retryable: e.is_timeout() || e.is_connect(),
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(EmbedError::Provider {
                message: format!("HTTP {status}: {text}"),
                attempts: 1,
                retryable: status.is_server_error() || status.as_u16() == 429,
            });
        }
        let parsed: EmbedResponse = response.json().map_err(|e| EmbedError::Provider {
            message: format!("bad response body: {e}"),
            attempts: 1,
            retryable: false,
        })?;
        if parsed.data.len() != texts.len() {
            return Err(EmbedError::ContractCount {
                expected: texts.len(),
                got: parsed.data.len(),
            });
        }
        let mut items = parsed.data;
        items.sort_by_key(|item| item.index);
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.into_iter().enumerate() {
            if item.embedding.len() != self.spec.dim {
                return Err(EmbedError::ContractDim {
                    expected: self.spec.dim,
                    got: item.embedding.len(),
                });
            }
            let vector = EmbeddingVector::new(item.embedding)
                .map_err(|_| EmbedError::ContractValue { index: i })?
                .normalized()
                .map_err(|_| EmbedError::ContractValue { index: i })?;
            out.push(vector);
        }
        Ok(out)
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn spec(&self) -> &EmbeddingProviderSpec {
        &self.spec
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyBatch);
        }
        let mut out = Vec::with_capacity(texts.len());
        for slice in texts.chunks(self.spec.batch_size.max(1)) {
            out.extend(self.post_batch(slice)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_provider() -> DeterministicEmbedder {
        DeterministicEmbedder::new(EmbeddingProviderSpec::deterministic(32, 7))
    }

    #[test]
    fn same_text_gives_identical_vectors() {
        let p = test_provider();
        let out = p.embed_batch(&["the quick brown fox", "the quick brown fox"]).unwrap();
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn output_is_unit_normalized() {
        let p = test_provider();
        for text in ["a", "a b c", "longer text with many distinct tokens here"] {
            let v = &p.embed_batch(&[text]).unwrap()[0];
            assert!((v.norm() - 1.0).abs() <= 1e-9, "norm={}", v.norm());
            assert_eq!(v.dim(), 32);
        }
    }

    #[test]
    fn shared_tokens_raise_similarity() {
        let p = test_provider();
        let out = p
            .embed_batch(&[
                "alpha beta gamma delta",
                "alpha beta gamma epsilon",
                "zeta eta theta iota",
            ])
            .unwrap();
        let close = out[0].cosine(&out[1]).unwrap();
        let far = out[0].cosine(&out[2]).unwrap();
        assert!(close > far, "close={close} far={far}");
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(matches!(
            test_provider().embed_batch(&[]),
            Err(EmbedError::EmptyBatch)
        ));
    }

    #[test]
    fn whitespace_only_text_is_an_error() {
        assert!(matches!(
            test_provider().embed_batch(&["ok", "   "]),
            Err(EmbedError::EmptyText { index: 1 })
        ));
    }

    #[test]
    fn seed_changes_the_embedding_space() {
        let a = DeterministicEmbedder::new(EmbeddingProviderSpec::deterministic(32, 1));
        let b = DeterministicEmbedder::new(EmbeddingProviderSpec::deterministic(32, 2));
        let va = a.embed_batch(&["hello world"]).unwrap();
        let vb = b.embed_batch(&["hello world"]).unwrap();
        assert_ne!(va[0], vb[0]);
    }

    #[test]
    fn fingerprint_identifies_provider_and_seed() {
        let spec = EmbeddingProviderSpec::deterministic(16, 3);
        assert_eq!(
            spec.fingerprint(),
            "deterministic-test:deterministic-test:dim=16:seed=3"
        );
        let remote = EmbeddingProviderSpec::remote("http://x", "all-mpnet-base-v2", 768);
        assert_eq!(remote.fingerprint(), "remote-http:all-mpnet-base-v2:dim=768");
    }
}
