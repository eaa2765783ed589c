//! Dataset adapters: each supported corpus shape maps onto [`QaExample`].
//!
//! Supported formats:
//!
//! - `generic-jsonl`: one JSON object per line with `id`, `question`,
//!   `answer`, optional `contexts` (pairs of title and text), and
//!   optional `aliases`.
//! - `hotpotqa` / `2wiki`: a single JSON array of records with `_id`,
//!   `question`, `answer`, and `context` as `[title, [sentence, ...]]`
//!   pairs.
//! - `musique`: one JSON object per line with `id`, `question`,
//!   `answer`, `answer_aliases`, and `paragraphs` carrying `title` and
//!   `paragraph_text`.
//!
//! Examples are returned sorted by example id, so downstream runs see a
//! deterministic order regardless of file order.

use super::EvalError;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

/// One question with its gold answer and optional gold contexts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaExample {
    pub example_id: String,
    pub question: String,
    pub gold_answer: String,
    /// (title, text) pairs. May be empty when retrieval runs against a
    /// shared corpus instead of per-example contexts.
    #[serde(default)]
    pub contexts: Vec<(String, String)>,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    Hotpotqa,
    Musique,
    #[serde(rename = "2wiki")]
    TwoWiki,
    GenericJsonl,
}

impl FromStr for DatasetFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hotpotqa" => Ok(Self::Hotpotqa),
            "musique" => Ok(Self::Musique),
            "2wiki" => Ok(Self::TwoWiki),
            "generic-jsonl" => Ok(Self::GenericJsonl),
            other => Err(EvalError::Config {
                message: format!(
                    "unknown dataset format {other:?}; expected hotpotqa, musique, 2wiki, or generic-jsonl"
                ),
            }),
        }
    }
}

#[derive(Deserialize)]
struct GenericRecord {
    id: String,
    question: String,
    answer: String,
    #[serde(default)]
    contexts: Vec<(String, String)>,
    #[serde(default)]
    aliases: Vec<String>,
}

#[derive(Deserialize)]
struct HotpotRecord {
    _id: String,
    question: String,
    answer: String,
    #[serde(default)]
    context: Vec<(String, Vec<String>)>,
}

#[derive(Deserialize)]
struct MusiqueParagraph {
    title: String,
    paragraph_text: String,
}

#[derive(Deserialize)]
struct MusiqueRecord {
    id: String,
    question: String,
    answer: String,
    #[serde(default)]
    answer_aliases: Vec<String>,
    #[serde(default)]
    paragraphs: Vec<MusiqueParagraph>,
}

/// Loads and validates a dataset file, sorted by example id.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<QaExample>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Format {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut examples = match format {
        DatasetFormat::GenericJsonl => load_jsonl(path, &text, |record: GenericRecord| {
            QaExample {
                example_id: record.id,
                question: record.question,
                gold_answer: record.answer,
                contexts: record.contexts,
                aliases: record.aliases,
            }
        })?,
        DatasetFormat::Musique => load_jsonl(path, &text, |record: MusiqueRecord| QaExample {
            example_id: record.id,
            question: record.question,
            gold_answer: record.answer,
            contexts: record
                .paragraphs
                .into_iter()
                .map(|p| (p.title, p.paragraph_text))
                .collect(),
            aliases: record.answer_aliases,
        })?,
        DatasetFormat::Hotpotqa | DatasetFormat::TwoWiki => {
            let records: Vec<HotpotRecord> =
                serde_json::from_str(&text).map_err(|e| EvalError::Format {
                    path: path.display().to_string(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
            records
                .into_iter()
                .map(|record| QaExample {
                    example_id: record._id,
                    question: record.question,
                    gold_answer: record.answer,
                    contexts: record
                        .context
                        .into_iter()
                        .map(|(title, sentences)| (title, sentences.join(" ")))
                        .collect(),
                    aliases: Vec::new(),
                })
                .collect()
        }
    };
    for example in &examples {
        if example.question.trim().is_empty() || example.gold_answer.trim().is_empty() {
            return Err(EvalError::Format {
                path: path.display().to_string(),
                line: 0,
                message: format!(
                    "example {:?} has an empty question or answer",
                    example.example_id
                ),
            });
        }
    }
    examples.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    Ok(examples)
}

fn load_jsonl<R: serde::de::DeserializeOwned>(
    path: &Path,
    text: &str,
    convert: impl Fn(R) -> QaExample,
) -> Result<Vec<QaExample>, EvalError> {
    let mut examples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: R = serde_json::from_str(line).map_err(|e| EvalError::Format {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        examples.push(convert(record));
    }
    Ok(examples)
}
