//! Word embeddings and phrase similarity.
//!
//! An [`EmbeddingTable`] maps lowercase words to dense vectors of one
//! fixed dimension (GloVe-style). Phrases — word lists such as a
//! multi-word entity or a tokenized action — are compared by mean
//! pooling their in-vocabulary vectors and rescaling cosine similarity
//! to `[0,1]`, which keeps downstream affinity matrices non-negative.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// Redundant whenever std reaches the crate graph (tests, feature
// unification), required for the pure no_std build.
#[allow(unused_imports)]
use num_traits::Float;

/// A vector whose length does not match the table dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub expected: usize,
    pub found: usize,
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vector has length {}, table dimension is {}",
            self.found, self.expected
        )
    }
}

impl core::error::Error for DimensionMismatch {}

/// Two vectors of different lengths were given to [`cosine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

impl fmt::Display for LengthMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vector lengths differ: {} vs {}", self.left, self.right)
    }
}

impl core::error::Error for LengthMismatch {}

/// Word → vector map with a fixed dimension. Words are normalized to
/// lowercase on insert and lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Creates an empty table. `dim` must be positive.
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        EmbeddingTable {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Adds a word vector. Returns `Ok(false)` (keeping the existing
    /// entry) when the word — case-insensitively — is already present.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<bool, DimensionMismatch> {
        if vector.len() != self.dim {
            return Err(DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let key = word.to_lowercase();
        if self.vectors.contains_key(&key) {
            return Ok(false);
        }
        self.vectors.insert(key, vector);
        Ok(true)
    }

    /// Case-insensitive lookup.
    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vectors
            .get(&word.to_lowercase())
            .map(|v| v.as_slice())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(&word.to_lowercase())
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(|s| s.as_str())
    }
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, or 0 when either norm is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, LengthMismatch> {
    if u.len() != v.len() {
        return Err(LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Mean of the in-vocabulary word vectors, or `None` if every word is
/// out of vocabulary.
fn pooled<S: AsRef<str>>(table: &EmbeddingTable, phrase: &[S]) -> Option<Vec<f64>> {
    let mut sum = alloc::vec![0.0; table.dim()];
    let mut count = 0usize;
    for word in phrase {
        if let Some(v) = table.vector(word.as_ref()) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    for s in &mut sum {
        *s /= count as f64;
    }
    Some(sum)
}

fn joined_lower<S: AsRef<str>>(phrase: &[S]) -> String {
    let mut out = String::new();
    for (i, w) in phrase.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&w.as_ref().to_lowercase());
    }
    out
}

/// Similarity of two phrases in `[0,1]`.
///
/// Both phrases are mean-pooled over their in-vocabulary words and
/// compared by cosine, affinely rescaled as `(c+1)/2`. Equal pooled
/// vectors short-circuit to exactly 1. When either phrase has no
/// in-vocabulary word at all, the comparison falls back to exact
/// (case-insensitive) equality of the space-joined phrases: 1 or 0.
pub fn phrase_similarity<A: AsRef<str>, B: AsRef<str>>(
    table: &EmbeddingTable,
    a: &[A],
    b: &[B],
) -> f64 {
    match (pooled(table, a), pooled(table, b)) {
        (Some(u), Some(v)) => {
            if u == v {
                return 1.0;
            }
            let c = cosine(&u, &v).expect("pooled vectors share the table dimension");
            ((c + 1.0) / 2.0).clamp(0.0, 1.0)
        }
        _ => {
            if joined_lower(a) == joined_lower(b) {
                1.0
            } else {
                0.0
            }
        }
    }
}
