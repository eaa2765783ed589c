//! Exact-scan vector index with binary persistence.
//!
//! The index maps chunk ids to (chunk, embedding) pairs. Queries scan every
//! entry, so results are exact rather than approximate; corpora here are
//! tens of thousands of chunks, well within scan range.
//!
//! # File format
//!
//! Little-endian throughout:
//!
//! ```text
//! magic    4 bytes  "VNDX"
//! version  u32      currently 1
//! dim      u32
//! count    u64      number of entries
//! meta_len u64      metadata JSON length
//! metadata meta_len bytes of JSON
//! entries  count times:
//!     chunk_len u64
//!     chunk     chunk_len bytes of JSON
//!     vector    dim f64 values, raw bits
//! ```
//!
//! Vectors are stored as raw `f64` bits, so save followed by load
//! reproduces every embedding exactly.

use crate::chunk::{chunk_document, Chunk, ChunkError};
use crate::embed::{EmbedError, EmbeddingProvider};
use crate::math::EmbeddingVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"VNDX";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("index is empty")]
    EmptyIndex,

    #[error("dimension mismatch: index holds {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad index file at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// A source document prior to chunking. Corpus files are JSON lines of
/// this shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub text: String,
}

/// Descriptive metadata persisted with the index. The provider
/// fingerprint lets a loaded index be checked against the provider that
/// will embed queries for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMetadata {
    pub corpus: String,
    pub provider_fingerprint: String,
    pub max_tokens: usize,
    pub overlap: usize,
}

/// One failed document or chunk during ingest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestFailure {
    /// Document id (chunking failure) or chunk id (embedding failure).
    pub id: String,
    pub message: String,
}

/// Outcome of an ingest pass. Failures are collected rather than aborting
/// the pass, so one bad document does not lose the rest of the corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    pub documents: usize,
    pub chunks_indexed: usize,
    pub overwritten: usize,
    pub failures: Vec<IngestFailure>,
}

/// A query hit: the chunk, its stored embedding, and its cosine
/// similarity to the query.
#[derive(Debug, Clone)]
pub struct ScoredChunk {
    pub chunk: Chunk,
    pub embedding: EmbeddingVector,
    pub similarity: f64,
}

/// In-memory index. Entries are keyed by chunk id, so re-ingesting a
/// corpus overwrites rather than duplicates.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    dim: usize,
    metadata: IndexMetadata,
    entries: BTreeMap<String, (Chunk, EmbeddingVector)>,
}

impl VectorIndex {
    pub fn new(dim: usize, metadata: IndexMetadata) -> Self {
        Self {
            dim,
            metadata,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metadata(&self) -> &IndexMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates entries in ascending chunk-id order.
    pub fn entries(&self) -> impl Iterator<Item = (&Chunk, &EmbeddingVector)> {
        self.entries.values().map(|(c, v)| (c, v))
    }

    pub fn get(&self, chunk_id: &str) -> Option<(&Chunk, &EmbeddingVector)> {
        self.entries.get(chunk_id).map(|(c, v)| (c, v))
    }

    /// Inserts one chunk. Returns true when an existing entry with the
    /// same chunk id was overwritten.
    pub fn insert(&mut self, chunk: Chunk, vector: EmbeddingVector) -> Result<bool, IndexError> {
        if vector.dim() != self.dim {
            return Err(IndexError::Dimension {
                expected: self.dim,
                got: vector.dim(),
            });
        }
        let replaced = self
            .entries
            .insert(chunk.chunk_id.clone(), (chunk, vector))
            .is_some();
        Ok(replaced)
    }

    /// Chunks, embeds, and inserts a batch of documents. Chunking and
    /// embedding failures are recorded in the report; the pass continues
    /// with the remaining work.
    pub fn ingest_documents(
        &mut self,
        documents: &[Document],
        provider: &dyn EmbeddingProvider,
        batch_size: usize,
    ) -> Result<IngestReport, IndexError> {
        let mut report = IngestReport {
            documents: documents.len(),
            chunks_indexed: 0,
            overwritten: 0,
            failures: Vec::new(),
        };
        let mut pending: Vec<Chunk> = Vec::new();
        for doc in documents {
            match chunk_document(
                &doc.id,
                &doc.title,
                &doc.text,
                self.metadata.max_tokens,
                self.metadata.overlap,
            ) {
                Ok(chunks) => pending.extend(chunks),
                Err(e @ ChunkError::EmptyDocument { .. }) => {
                    report.failures.push(IngestFailure {
                        id: doc.id.clone(),
                        message: e.to_string(),
                    });
                }
                Err(e) => {
                    // Bad window config affects every document equally;
                    // stop rather than report it N times.
                    return Err(IndexError::Format {
                        offset: 0,
                        message: e.to_string(),
                    });
                }
            }
        }
        for batch in pending.chunks(batch_size.max(1)) {
            let texts: Vec<&str> = batch.iter().map(|c| c.text.as_str()).collect();
            match provider.embed_batch(&texts) {
                Ok(vectors) => {
                    for (chunk, vector) in batch.iter().zip(vectors) {
                        if self.insert(chunk.clone(), vector)? {
                            log::warn!("overwriting existing chunk {}", chunk.chunk_id);
                            report.overwritten += 1;
                        }
                        report.chunks_indexed += 1;
                    }
                }
                Err(e) => {
                    let message = e.to_string();
                    for chunk in batch {
                        report.failures.push(IngestFailure {
                            id: chunk.chunk_id.clone(),
                            message: message.clone(),
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    /// Exact top-m scan by cosine similarity, descending. Ties are broken
    /// by ascending chunk id so results are reproducible. Returns
    /// `min(m, len)` hits.
    pub fn top_m(&self, query: &EmbeddingVector, m: usize) -> Result<Vec<ScoredChunk>, IndexError> {
        if self.entries.is_empty() {
            return Err(IndexError::EmptyIndex);
        }
        if query.dim() != self.dim {
            return Err(IndexError::Dimension {
                expected: self.dim,
                got: query.dim(),
            });
        }
        let mut scored: Vec<ScoredChunk> = self
            .entries
            .values()
            .map(|(chunk, vector)| {
                let similarity = query.cosine(vector).expect("dims checked");
                ScoredChunk {
                    chunk: chunk.clone(),
                    embedding: vector.clone(),
                    similarity,
                }
            })
            .collect();
        scored.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.chunk.chunk_id.cmp(&b.chunk.chunk_id))
        });
        scored.truncate(m);
        Ok(scored)
    }

    // ── Persistence ────────────────────────────────────────────────────

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        let meta = serde_json::to_vec(&self.metadata).expect("metadata serializes");
        w.write_all(&(meta.len() as u64).to_le_bytes())?;
        w.write_all(&meta)?;
        for (chunk, vector) in self.entries.values() {
            let chunk_json = serde_json::to_vec(chunk).expect("chunk serializes");
            w.write_all(&(chunk_json.len() as u64).to_le_bytes())?;
            w.write_all(&chunk_json)?;
            for value in vector.values() {
                w.write_all(&value.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let file = std::fs::File::open(path)?;
        let mut r = Reader {
            inner: BufReader::new(file),
            offset: 0,
        };
        let magic = r.bytes::<4>()?;
        if &magic != MAGIC {
            return Err(IndexError::Format {
                offset: 0,
                message: format!("bad magic {magic:?}, expected {MAGIC:?}"),
            });
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::Format {
                offset: 4,
                message: format!("unsupported version {version}, expected {FORMAT_VERSION}"),
            });
        }
        let dim = r.u32()? as usize;
        if dim == 0 {
            return Err(IndexError::Format {
                offset: 8,
                message: "dimension is zero".to_string(),
            });
        }
        let count = r.u64()?;
        let meta_offset = r.offset + 8;
        let meta_bytes = r.sized_block()?;
        let metadata: IndexMetadata =
            serde_json::from_slice(&meta_bytes).map_err(|e| IndexError::Format {
                offset: meta_offset,
                message: format!("bad metadata JSON: {e}"),
            })?;
        let mut index = VectorIndex::new(dim, metadata);
        for i in 0..count {
            let chunk_offset = r.offset + 8;
            let chunk_bytes = r.sized_block()?;
            let chunk: Chunk =
                serde_json::from_slice(&chunk_bytes).map_err(|e| IndexError::Format {
                    offset: chunk_offset,
                    message: format!("bad chunk JSON in entry {i}: {e}"),
                })?;
            let vector_offset = r.offset;
            let mut values = Vec::with_capacity(dim);
            for _ in 0..dim {
                values.push(f64::from_le_bytes(r.bytes::<8>()?));
            }
            let vector = EmbeddingVector::new(values).map_err(|e| IndexError::Format {
                offset: vector_offset,
                message: format!("bad vector in entry {i}: {e}"),
            })?;
            index.insert(chunk, vector)?;
        }
        let mut trailing = [0u8; 1];
        if r.inner.read(&mut trailing)? != 0 {
            return Err(IndexError::Format {
                offset: r.offset,
                message: "trailing bytes after last entry".to_string(),
            });
        }
        Ok(index)
    }
}

/// Byte reader that tracks its offset so format errors can point at the
/// corrupt position.
struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], IndexError> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| self.truncation(e, N as u64))?;
        self.offset += N as u64;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.bytes::<4>()?))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.bytes::<8>()?))
    }

    /// Reads a u64 length prefix followed by that many bytes.
    fn sized_block(&mut self) -> Result<Vec<u8>, IndexError> {
        let len = self.u64()?;
        let mut buf = vec![0u8; len as usize];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| self.truncation(e, len))?;
        self.offset += len;
        Ok(buf)
    }

    fn truncation(&self, e: std::io::Error, wanted: u64) -> IndexError {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            IndexError::Format {
                offset: self.offset,
                message: format!("truncated: wanted {wanted} more bytes"),
            }
        } else {
            IndexError::Io(e)
        }
    }
}
