//! Diversity-aware retrieval for multi-hop question answering.
//!
//! The crate is organized bottom-up:
//!
//! - [`math`]: embedding vectors, cosine kernels, eigenvalues, and the
//!   Vendi Score (effective number of distinct items in a set).
//! - [`chunk`]: sliding-window document chunking.
//! - [`embed`]: embedding providers (offline deterministic + remote HTTP).
//! - [`index`]: an exact-scan vector index with binary persistence.
//! - [`retrieval`]: selection strategies (similarity top-k, MMR, and
//!   diversity-aware greedy selection under the Vendi Retrieval Score).
//! - [`llm`]: chat providers (scripted + remote HTTP) and the prompt
//!   assembly for reasoning, answering, judging, and query rewriting.
//! - [`pipeline`]: the iterative retrieve-reason-answer-judge loop.
//! - [`eval`]: QA metrics, rank correlations, dataset loading, and the
//!   sensitivity analysis over the diversity weight.

pub mod chunk;
pub mod embed;
pub mod eval;
pub mod index;
pub mod llm;
pub mod math;
pub mod pipeline;
pub mod retrieval;
