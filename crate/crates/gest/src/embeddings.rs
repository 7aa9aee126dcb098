//! GloVe-style embedding file loading: `word v1 … vd` per line,
//! whitespace separated, no header.

use std::io::{BufRead, BufReader};
use std::path::Path;

use gest_core::embed::EmbeddingTable;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingsError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    WrongDimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: bad float '{value}'")]
    BadFloat { line: usize, value: String },
}

/// Loads at most `vocab_limit` words (first come, first kept); every
/// row must carry exactly `expected_dim` components.
pub fn load_embeddings(
    path: &Path,
    expected_dim: usize,
    vocab_limit: Option<usize>,
) -> Result<EmbeddingTable, EmbeddingsError> {
    let io_err = |source| EmbeddingsError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut table = EmbeddingTable::new(expected_dim);
    let mut loaded = 0usize;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        if vocab_limit.is_some_and(|limit| loaded >= limit) {
            break;
        }
        let line = line.map_err(io_err)?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else {
            continue; // blank line
        };
        let values: Vec<&str> = parts.collect();
        if values.len() != expected_dim {
            return Err(EmbeddingsError::WrongDimension {
                line: idx + 1,
                expected: expected_dim,
                found: values.len(),
            });
        }
        let vector = values
            .iter()
            .map(|v| {
                v.parse::<f64>().map_err(|_| EmbeddingsError::BadFloat {
                    line: idx + 1,
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if table.insert(word, vector).expect("dimension checked above") {
            loaded += 1;
        }
    }
    Ok(table)
}
