//! Corpus ingestion and evaluation-pair construction.
//!
//! A corpus is a JSONL file, one record per line:
//! `{"source_id": "...", "text_id": "...", "text": "...", "graph": {...}}`
//! where `text` and `graph` are each optional but at least one must be
//! present. Records from the same `source_id` describe the same
//! underlying story, so all within-source pairs are positives.

use std::collections::BTreeSet;
use std::path::Path;

use gest_core::model::GestGraph;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::json;
use crate::table::{PairRow, ScoreTable};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate text_id '{text_id}'")]
    DuplicateId { line: usize, text_id: String },
}

#[derive(Debug, Clone)]
pub struct Record {
    pub source_id: String,
    pub text_id: String,
    pub text: Option<String>,
    pub graph: Option<GestGraph>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub records: Vec<Record>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    source_id: String,
    text_id: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    graph: Option<serde_json::Value>,
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let contents = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut corpus = Corpus::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in contents.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RecordJson =
            serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if raw.text.is_none() && raw.graph.is_none() {
            return Err(CorpusError::Malformed {
                line: line_no,
                message: "record needs at least one of text/graph".into(),
            });
        }
        // text_id is the pair key everywhere downstream, so it must be
        // unique across sources, not just within one.
        if !seen.insert(raw.text_id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                text_id: raw.text_id,
            });
        }
        let graph = match raw.graph {
            None => None,
            Some(value) => Some(
                json::graph_from_json(&value.to_string()).map_err(|e| CorpusError::Malformed {
                    line: line_no,
                    message: e.to_string(),
                })?,
            ),
        };
        corpus.records.push(Record {
            source_id: raw.source_id,
            text_id: raw.text_id,
            text: raw.text,
            graph,
        });
    }
    Ok(corpus)
}

/// Builds the evaluation pair skeleton: every within-source unordered
/// pair labeled positive, plus sampled cross-source negatives.
///
/// `neg_per_pos = 0` keeps all cross-source pairs. Otherwise
/// `neg_per_pos × positives` negatives are drawn uniformly without
/// replacement (seeded, reproducible); if fewer exist, all are kept.
pub fn make_pairs(corpus: &Corpus, neg_per_pos: usize, seed: u64) -> ScoreTable {
    let records = &corpus.records;
    let mut rows = Vec::new();
    let mut negatives = Vec::new();
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let pair = (records[i].text_id.clone(), records[j].text_id.clone());
            if records[i].source_id == records[j].source_id {
                rows.push(PairRow::new(pair.0, pair.1, true));
            } else {
                negatives.push(pair);
            }
        }
    }
    let positives = rows.len();

    let wanted = if neg_per_pos == 0 {
        negatives.len()
    } else {
        (neg_per_pos * positives).min(negatives.len())
    };
    // Partial Fisher-Yates: the first `wanted` slots become a uniform
    // sample without replacement, in a seed-determined order.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..wanted {
        let pick = k + (rng.next_u64() % (negatives.len() - k) as u64) as usize;
        negatives.swap(k, pick);
    }
    for (a, b) in negatives.into_iter().take(wanted) {
        rows.push(PairRow::new(a, b, false));
    }
    ScoreTable { rows }
}
