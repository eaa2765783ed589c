//! Numerical core: embedding vectors, similarity kernels, symmetric
//! eigendecomposition, and the diversity scores built on them.
//!
//! The Vendi Score of a document set is the exponential of the Shannon
//! entropy of the eigenvalues of its normalized similarity kernel:
//!
//! ```text
//! VS = exp(-sum_i lambda_i ln lambda_i),   lambda_i = eig(K / n)
//! ```
//!
//! With a unit-diagonal kernel, trace(K/n) = 1, so the spectrum is a
//! probability distribution and VS reads as the effective number of
//! unique documents: 1 when all are identical, n when all are orthogonal.
//!
//! Everything here is pure `f64` math on immutable inputs; all functions
//! are safe to call concurrently.

mod eigen;

pub use eigen::jacobi_eigenvalues;

use serde::{Deserialize, Serialize};

/// Symmetry tolerance for kernel matrices: |K_ij - K_ji| must stay below this.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Unit-diagonal tolerance: |K_ii - 1| must stay below this.
pub const DIAGONAL_TOL: f64 = 1e-9;
/// Slack allowed on the [-1, 1] entry range.
pub const ENTRY_RANGE_TOL: f64 = 1e-9;
/// Eigenvalues in [-NEGATIVE_EIG_CLAMP, 0) are rounded up to zero; anything
/// below that is a material PSD violation.
pub const NEGATIVE_EIG_CLAMP: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum MathError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("embedding {index} has zero norm")]
    DegenerateEmbedding { index: usize },

    #[error("embedding value is not finite at index {index}")]
    NotFinite { index: usize },

    #[error("invalid kernel matrix: {0}")]
    InvalidKernel(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (residual {residual:.3e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("kernel is not positive semi-definite: eigenvalue {eigenvalue:.3e}")]
    NotPsd { eigenvalue: f64 },

    #[error("need at least {needed} embeddings, got {got}")]
    InsufficientInput { needed: usize, got: usize },
}

/// A dense embedding: an ordered sequence of finite reals.
///
/// "Unit-normalized" means the L2 norm is within `1e-9` of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self, MathError> {
        if values.is_empty() {
            return Err(MathError::Dimension {
                expected: 1,
                got: 0,
            });
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(MathError::NotFinite { index });
            }
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Returns a copy scaled to unit L2 norm.
    pub fn normalized(&self) -> Result<Self, MathError> {
        let norm = self.norm();
        if norm <= 0.0 {
            return Err(MathError::DegenerateEmbedding { index: 0 });
        }
        Ok(Self {
            values: self.values.iter().map(|v| v / norm).collect(),
        })
    }

    pub fn is_unit_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= DIAGONAL_TOL
    }

    pub fn dot(&self, other: &Self) -> Result<f64, MathError> {
        if self.dim() != other.dim() {
            return Err(MathError::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Cosine similarity with `other`; errors on dimension mismatch or a
    /// zero-norm operand.
    pub fn cosine(&self, other: &Self) -> Result<f64, MathError> {
        let dot = self.dot(other)?;
        let na = self.norm();
        let nb = other.norm();
        if na <= 0.0 {
            return Err(MathError::DegenerateEmbedding { index: 0 });
        }
        if nb <= 0.0 {
            return Err(MathError::DegenerateEmbedding { index: 1 });
        }
        Ok(dot / (na * nb))
    }

    pub fn euclidean_distance(&self, other: &Self) -> Result<f64, MathError> {
        if self.dim() != other.dim() {
            return Err(MathError::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Symmetric similarity matrix with unit diagonal and entries in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: Vec<f64>, // row-major n*n
    n: usize,
}

impl KernelMatrix {
    /// Validates and wraps a row-major `n*n` entry buffer.
    pub fn new(entries: Vec<f64>, n: usize) -> Result<Self, MathError> {
        if n == 0 || entries.len() != n * n {
            return Err(MathError::InvalidKernel(format!(
                "expected {}x{} entries, got {}",
                n,
                n,
                entries.len()
            )));
        }
        for (idx, v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(MathError::NotFinite { index: idx });
            }
            if v.abs() > 1.0 + ENTRY_RANGE_TOL {
                return Err(MathError::InvalidKernel(format!(
                    "entry ({},{}) = {} outside [-1, 1]",
                    idx / n,
                    idx % n,
                    v
                )));
            }
        }
        for i in 0..n {
            let diag = entries[i * n + i];
            if (diag - 1.0).abs() > DIAGONAL_TOL {
                return Err(MathError::InvalidKernel(format!(
                    "diagonal entry ({i},{i}) = {diag} is not 1"
                )));
            }
            for j in 0..i {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(MathError::InvalidKernel(format!(
                        "asymmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { entries, n })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MathError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MathError::InvalidKernel(format!(
                    "row length {} in a {n}-row matrix",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::new(entries, n)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Eigenvalues of a symmetric matrix, sorted descending, plus the final
/// off-diagonal residual of the solve.
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub residual: f64,
}

/// Builds the cosine-similarity kernel of a set of embeddings.
///
/// `K_ij = <v_i, v_j> / (|v_i| |v_j|)`, with the diagonal pinned to exactly
/// 1 and the off-diagonal computed once per unordered pair so the result is
/// exactly symmetric.
pub fn cosine_kernel(embeddings: &[EmbeddingVector]) -> Result<KernelMatrix, MathError> {
    let n = embeddings.len();
    if n == 0 {
        return Err(MathError::InsufficientInput { needed: 1, got: 0 });
    }
    let dim = embeddings[0].dim();
    let mut norms = Vec::with_capacity(n);
    for (index, e) in embeddings.iter().enumerate() {
        if e.dim() != dim {
            return Err(MathError::Dimension {
                expected: dim,
                got: e.dim(),
            });
        }
        let norm = e.norm();
        if norm <= 0.0 {
            return Err(MathError::DegenerateEmbedding { index });
        }
        norms.push(norm);
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in 0..i {
            let dot = embeddings[i].dot(&embeddings[j])?;
            let mut sim = dot / (norms[i] * norms[j]);
            // Rounding can push a cosine a few ulps past +/-1; pull it back.
            sim = sim.clamp(-1.0, 1.0);
            entries[i * n + j] = sim;
            entries[j * n + i] = sim;
        }
    }
    KernelMatrix::new(entries, n)
}

/// All eigenvalues of a symmetric kernel, via cyclic Jacobi rotations.
///
/// Negative values in `[-1e-8, 0)` are numerical noise and are clamped to
/// zero; anything more negative means the kernel materially violates
/// positive semi-definiteness and is reported as an error.
pub fn symmetric_eigenvalues(matrix: &KernelMatrix) -> Result<EigenSpectrum, MathError> {
    let (mut eigenvalues, residual) = jacobi_eigenvalues(matrix.entries(), matrix.size())?;
    for v in eigenvalues.iter_mut() {
        if *v < 0.0 {
            if *v < -NEGATIVE_EIG_CLAMP {
                return Err(MathError::NotPsd { eigenvalue: *v });
            }
            *v = 0.0;
        }
    }
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(EigenSpectrum {
        eigenvalues,
        residual,
    })
}

/// The Vendi Score of a kernel: `exp(-sum lambda_i ln lambda_i)` over the
/// spectrum of `K / n`, with the `0 ln 0 = 0` convention.
///
/// Eigenvalues are renormalized to sum to exactly 1 before the entropy to
/// absorb floating-point drift, so the result always lands in `[1, n]` up
/// to rounding.
pub fn vendi_score(matrix: &KernelMatrix) -> Result<f64, MathError> {
    let n = matrix.size() as f64;
    let spectrum = symmetric_eigenvalues(matrix)?;
    let scaled: Vec<f64> = spectrum.eigenvalues.iter().map(|v| v / n).collect();
    let total: f64 = scaled.iter().sum();
    let mut entropy = 0.0;
    for v in &scaled {
        let p = v / total;
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    Ok(entropy.exp())
}

/// Maximum Euclidean distance over all unordered pairs of embeddings.
pub fn max_pairwise_distance(embeddings: &[EmbeddingVector]) -> Result<f64, MathError> {
    if embeddings.len() < 2 {
        return Err(MathError::InsufficientInput {
            needed: 2,
            got: embeddings.len(),
        });
    }
    let mut max = 0.0_f64;
    for i in 0..embeddings.len() {
        for j in 0..i {
            let d = embeddings[i].euclidean_distance(&embeddings[j])?;
            if d > max {
                max = d;
            }
        }
    }
    Ok(max)
}
