//! Document chunking with token overlap.
//!
//! Documents are split into windows of at most `max_tokens` tokens, each
//! consecutive pair overlapping by `overlap` tokens:
//!
//! ```text
//! start_{k+1} = start_k + max_tokens - overlap
//! ```
//!
//! Splitting stops as soon as a chunk reaches the end of the token
//! sequence, so a text of exactly `max_tokens` tokens yields one chunk,
//! never a spurious tail. Stripping the first `overlap` tokens from every
//! chunk after the first and concatenating reconstructs the original
//! token sequence.
//!
//! Tokens are whitespace-delimited by default; the tokenizer is a trait so
//! a subword tokenizer can be swapped in without touching the arithmetic.

use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_TOKENS: usize = 512;
pub const DEFAULT_OVERLAP: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum ChunkError {
    #[error("overlap {overlap} must be smaller than max_tokens {max_tokens}")]
    Config { max_tokens: usize, overlap: usize },

    #[error("document {doc_id} has no tokens")]
    EmptyDocument { doc_id: String },
}

/// A retrievable unit of text: one window of a source document.
///
/// `token_span` is the half-open `[start, end)` range into the document's
/// token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub title: String,
    pub text: String,
    pub token_span: (usize, usize),
}

/// Splits text into tokens. Implementations must be deterministic.
pub trait Tokenizer {
    fn tokenize<'a>(&self, text: &'a str) -> Vec<&'a str>;
}

/// Default tokenizer: split on Unicode whitespace.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn tokenize<'a>(&self, text: &'a str) -> Vec<&'a str> {
        text.split_whitespace().collect()
    }
}

/// Chunks a document with the default whitespace tokenizer.
pub fn chunk_document(
    doc_id: &str,
    title: &str,
    text: &str,
    max_tokens: usize,
    overlap: usize,
) -> Result<Vec<Chunk>, ChunkError> {
    chunk_document_with(&WhitespaceTokenizer, doc_id, title, text, max_tokens, overlap)
}

/// Chunks a document using the given tokenizer.
pub fn chunk_document_with<T: Tokenizer>(
    tokenizer: &T,
    doc_id: &str,
    title: &str,
    text: &str,
    max_tokens: usize,
    overlap: usize,
) -> Result<Vec<Chunk>, ChunkError> {
    if overlap >= max_tokens {
        return Err(ChunkError::Config {
            max_tokens,
            overlap,
        });
    }
    let tokens = tokenizer.tokenize(text);
    if tokens.is_empty() {
        return Err(ChunkError::EmptyDocument {
            doc_id: doc_id.to_string(),
        });
    }

    let stride = max_tokens - overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + max_tokens).min(tokens.len());
        chunks.push(Chunk {
            chunk_id: format!("{doc_id}#{:04}", chunks.len()),
            doc_id: doc_id.to_string(),
            title: title.to_string(),
            text: tokens[start..end].join(" "),
            token_span: (start, end),
        });
        if end == tokens.len() {
            break;
        }
        start += stride;
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn short_text_is_one_chunk() {
        let chunks = chunk_document("d", "t", &words(100), 512, 50).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_span, (0, 100));
    }

    #[test]
    fn overlapping_windows_follow_the_stride() {
        let chunks = chunk_document("d", "t", &words(1000), 512, 50).unwrap();
        let spans: Vec<_> = chunks.iter().map(|c| c.token_span).collect();
        assert_eq!(spans, vec![(0, 512), (462, 974), (924, 1000)]);
    }

    #[test]
    fn exact_fit_has_no_spurious_tail() {
        let chunks = chunk_document("d", "t", &words(512), 512, 50).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_span, (0, 512));
    }

    #[test]
    fn chunk_ids_are_unique_and_ordered() {
        let chunks = chunk_document("doc-1", "t", &words(1500), 512, 50).unwrap();
        assert_eq!(chunks[0].chunk_id, "doc-1#0000");
        assert_eq!(chunks[1].chunk_id, "doc-1#0001");
        let mut ids: Vec<_> = chunks.iter().map(|c| &c.chunk_id).collect();
        ids.dedup();
        assert_eq!(ids.len(), chunks.len());
    }

    #[test]
    fn reconstruction_from_overlapped_chunks() {
        let text = words(1234);
        let overlap = 50;
        let chunks = chunk_document("d", "t", &text, 512, overlap).unwrap();
        let mut rebuilt: Vec<String> = Vec::new();
        for (i, chunk) in chunks.iter().enumerate() {
            let toks: Vec<&str> = chunk.text.split_whitespace().collect();
            let skip = if i == 0 { 0 } else { overlap };
            rebuilt.extend(toks[skip..].iter().map(|t| t.to_string()));
        }
        assert_eq!(rebuilt.join(" "), text);
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(matches!(
            chunk_document("d", "t", "   ", 512, 50),
            Err(ChunkError::EmptyDocument { .. })
        ));
    }

    #[test]
    fn overlap_must_be_below_max() {
        assert!(matches!(
            chunk_document("d", "t", "a b c", 50, 50),
            Err(ChunkError::Config { .. })
        ));
    }

    #[test]
    fn every_chunk_obeys_the_token_budget() {
        for len in [1, 9, 10, 11, 95, 100, 101] {
            let chunks = chunk_document("d", "t", &words(len), 10, 3).unwrap();
            for c in &chunks {
                let n = c.text.split_whitespace().count();
                assert!(n <= 10);
                assert_eq!(c.token_span.1 - c.token_span.0, n);
            }
            assert_eq!(chunks.last().unwrap().token_span.1, len);
        }
    }
}
