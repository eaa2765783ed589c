//! Subcommand implementations. Each command resolves its layered
//! configuration, runs the corresponding core operation, and writes its
//! artifact with the effective configuration echoed inside.

pub mod eval;
pub mod ingest;
pub mod query;
pub mod search;
pub mod sensitivity;

use crate::config::CliError;
use serde::Serialize;
use std::path::Path;
use vendi_core::embed::EmbeddingProvider;
use vendi_core::index::{Document, VectorIndex};
use vendi_core::math::EmbeddingVector;

pub(crate) fn load_index(path: &Path) -> Result<VectorIndex, CliError> {
    VectorIndex::load(path)
        .map_err(|e| CliError::Run(format!("cannot load index {}: {e}", path.display())))
}

pub(crate) fn embed_query(
    provider: &dyn EmbeddingProvider,
    text: &str,
) -> Result<EmbeddingVector, CliError> {
    let mut vectors = provider.embed_batch(&[text])?;
    Ok(vectors.remove(0))
}

/// Corpus files are JSON lines of `{"id", "title", "text"}`.
pub(crate) fn read_corpus(path: &Path) -> Result<Vec<Document>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Run(format!("cannot read corpus {}: {e}", path.display())))?;
    let mut documents = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let document: Document = serde_json::from_str(line).map_err(|e| {
            CliError::Run(format!(
                "bad corpus record at {} line {}: {e}",
                path.display(),
                i + 1
            ))
        })?;
        documents.push(document);
    }
    Ok(documents)
}

/// Query files are plain text, one query per line; blank lines and
/// `#` comments are skipped.
pub(crate) fn read_query_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Run(format!("cannot read queries {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
