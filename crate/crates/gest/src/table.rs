//! Pair score tables: attaching metric columns to evaluation pairs.

use std::collections::BTreeMap;
use std::path::Path;

use gest_core::embed::EmbeddingTable;
use gest_core::matching::{graph_similarity, MatchConfig, MatchError};
use gest_core::model::GestGraph;
use gest_core::textsim::{bleu4, rouge_l};
use rayon::prelude::*;
use thiserror::Error;

/// One unordered evaluation pair plus its metric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub a: String,
    pub b: String,
    pub label: bool,
    pub scores: BTreeMap<String, f64>,
}

impl PairRow {
    pub fn new(a: impl Into<String>, b: impl Into<String>, label: bool) -> PairRow {
        PairRow {
            a: a.into(),
            b: b.into(),
            label,
            scores: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<PairRow>,
}

impl ScoreTable {
    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Column values in row order; `None` if any row lacks the column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.scores.get(name).copied())
            .collect()
    }

    pub fn set_column(&mut self, name: &str, values: &[f64]) {
        assert_eq!(values.len(), self.rows.len(), "column length mismatch");
        for (row, &v) in self.rows.iter_mut().zip(values) {
            row.scores.insert(name.to_string(), v);
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        match self.rows.first() {
            Some(row) => row.scores.keys().cloned().collect(),
            None => Vec::new(),
        }
    }
}

/// A scoring metric selectable on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Metric {
    GestSm,
    Bleu4,
    RougeL,
    External(String),
}

impl Metric {
    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "gest-sm" => Some(Metric::GestSm),
            "bleu4" => Some(Metric::Bleu4),
            "rouge-l" => Some(Metric::RougeL),
            _ => {
                let name = s.strip_prefix("external:")?;
                if name.is_empty() {
                    None
                } else {
                    Some(Metric::External(name.to_string()))
                }
            }
        }
    }

    pub fn column_name(&self) -> String {
        match self {
            Metric::GestSm => "gest-sm".into(),
            Metric::Bleu4 => "bleu4".into(),
            Metric::RougeL => "rouge-l".into(),
            Metric::External(name) => name.clone(),
        }
    }
}

/// Everything the built-in scorers need, keyed by text_id.
pub struct ScoreContext<'a> {
    pub graphs: &'a BTreeMap<String, GestGraph>,
    pub texts: &'a BTreeMap<String, String>,
    pub embeddings: &'a EmbeddingTable,
    pub config: &'a MatchConfig,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("no graph available for '{text_id}'")]
    MissingGraph { text_id: String },
    #[error("no text available for '{text_id}'")]
    MissingText { text_id: String },
    #[error("external scores '{metric}' missing pair ({a}, {b})")]
    MissingExternal { metric: String, a: String, b: String },
    #[error("column '{name}' is not filled in for every pair")]
    MissingColumn { name: String },
    #[error(transparent)]
    Match(#[from] MatchError),
}

fn pair_score(row: &PairRow, metric: &Metric, ctx: &ScoreContext) -> Result<f64, TableError> {
    match metric {
        Metric::GestSm => {
            let ga = ctx.graphs.get(&row.a).ok_or_else(|| TableError::MissingGraph {
                text_id: row.a.clone(),
            })?;
            let gb = ctx.graphs.get(&row.b).ok_or_else(|| TableError::MissingGraph {
                text_id: row.b.clone(),
            })?;
            Ok(graph_similarity(ga, gb, ctx.embeddings, ctx.config)?)
        }
        Metric::Bleu4 | Metric::RougeL => {
            let ta = ctx.texts.get(&row.a).ok_or_else(|| TableError::MissingText {
                text_id: row.a.clone(),
            })?;
            let tb = ctx.texts.get(&row.b).ok_or_else(|| TableError::MissingText {
                text_id: row.b.clone(),
            })?;
            // Pairs are unordered; BLEU is not. Average both directions.
            Ok(match metric {
                Metric::Bleu4 => (bleu4(ta, tb) + bleu4(tb, ta)) / 2.0,
                _ => rouge_l(ta, tb),
            })
        }
        Metric::External(name) => row
            .scores
            .get(name)
            .copied()
            .ok_or_else(|| TableError::MissingColumn { name: name.clone() }),
    }
}

/// Fills in `metric`'s column for every row. Rows are scored on a
/// dedicated rayon pool with `parallelism` threads (0 = rayon's
/// default); results land by row index, so the table is identical
/// regardless of thread count.
pub fn score_pairs(
    table: &mut ScoreTable,
    metric: &Metric,
    ctx: &ScoreContext,
    parallelism: usize,
) -> Result<(), TableError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .expect("rayon pool");
    let results: Vec<Result<f64, TableError>> = pool.install(|| {
        table
            .rows
            .par_iter()
            .map(|row| pair_score(row, metric, ctx))
            .collect()
    });
    let mut values = Vec::with_capacity(results.len());
    for r in results {
        values.push(r?);
    }
    table.set_column(&metric.column_name(), &values);
    Ok(())
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("cannot read external scores {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("external scores {path}: {source}")]
    Csv {
        path: String,
        source: csv::Error,
    },
    #[error("external scores {path}: header must be text_id_a,text_id_b,score")]
    BadHeader { path: String },
    #[error("external scores {path} record {record}: score '{value}' is not a number")]
    BadScore {
        path: String,
        record: usize,
        value: String,
    },
    #[error("external scores {path}: duplicate pair ({a}, {b})")]
    DuplicatePair { path: String, a: String, b: String },
}

fn unordered_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Loads a `text_id_a,text_id_b,score` CSV keyed by unordered pair.
pub fn load_external_scores(
    path: &Path,
) -> Result<BTreeMap<(String, String), f64>, ExternalError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| ExternalError::Io {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers().map_err(|source| ExternalError::Csv {
        path: display.clone(),
        source,
    })?;
    let expected = ["text_id_a", "text_id_b", "score"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(ExternalError::BadHeader { path: display });
    }
    let mut scores = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| ExternalError::Csv {
            path: display.clone(),
            source,
        })?;
        let a = record.get(0).unwrap_or("");
        let b = record.get(1).unwrap_or("");
        let raw = record.get(2).unwrap_or("");
        let value: f64 = raw.parse().map_err(|_| ExternalError::BadScore {
            path: display.clone(),
            record: idx + 1,
            value: raw.to_string(),
        })?;
        let key = unordered_key(a, b);
        if scores.insert(key.clone(), value).is_some() {
            return Err(ExternalError::DuplicatePair {
                path: display,
                a: key.0,
                b: key.1,
            });
        }
    }
    Ok(scores)
}

/// Joins externally computed scores onto the table as column `name`.
/// Every table pair must be present; extra pairs in the file are fine.
pub fn apply_external(
    table: &mut ScoreTable,
    name: &str,
    scores: &BTreeMap<(String, String), f64>,
) -> Result<(), TableError> {
    let mut values = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let value = scores.get(&unordered_key(&row.a, &row.b)).copied().ok_or(
            TableError::MissingExternal {
                metric: name.to_string(),
                a: row.a.clone(),
                b: row.b.clone(),
            },
        )?;
        values.push(value);
    }
    table.set_column(name, &values);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use gest_core::textsim::bleu4 as bleu;
    use std::io::Write;

    fn text_ctx<'a>(
        texts: &'a BTreeMap<String, String>,
        graphs: &'a BTreeMap<String, GestGraph>,
        table: &'a EmbeddingTable,
        cfg: &'a MatchConfig,
    ) -> ScoreContext<'a> {
        ScoreContext {
            graphs,
            texts,
            embeddings: table,
            config: cfg,
        }
    }

    #[test]
    fn metric_names_parse() {
        assert_eq!(Metric::parse("gest-sm"), Some(Metric::GestSm));
        assert_eq!(Metric::parse("bleu4"), Some(Metric::Bleu4));
        assert_eq!(Metric::parse("rouge-l"), Some(Metric::RougeL));
        assert_eq!(
            Metric::parse("external:judge"),
            Some(Metric::External("judge".into()))
        );
        assert_eq!(Metric::parse("external:"), None);
        assert_eq!(Metric::parse("bleu"), None);
    }

    #[test]
    fn bleu_column_is_symmetrized() {
        let mut texts = BTreeMap::new();
        texts.insert("x".to_string(), "the cat sat on the mat".to_string());
        texts.insert("y".to_string(), "the cat sat".to_string());
        let graphs = BTreeMap::new();
        let emb = EmbeddingTable::new(2);
        let cfg = MatchConfig::default();
        let ctx = text_ctx(&texts, &graphs, &emb, &cfg);
        let mut table = ScoreTable {
            rows: vec![PairRow::new("x", "y", true)],
        };
        score_pairs(&mut table, &Metric::Bleu4, &ctx, 1).unwrap();
        let got = table.rows[0].scores["bleu4"];
        let want = (bleu("the cat sat on the mat", "the cat sat")
            + bleu("the cat sat", "the cat sat on the mat"))
            / 2.0;
        assert_abs_diff_eq!(got, want, epsilon = 1e-15);
    }

    #[test]
    fn missing_text_is_reported() {
        let texts = BTreeMap::new();
        let graphs = BTreeMap::new();
        let emb = EmbeddingTable::new(2);
        let cfg = MatchConfig::default();
        let ctx = text_ctx(&texts, &graphs, &emb, &cfg);
        let mut table = ScoreTable {
            rows: vec![PairRow::new("x", "y", true)],
        };
        match score_pairs(&mut table, &Metric::RougeL, &ctx, 1) {
            Err(TableError::MissingText { text_id }) => assert_eq!(text_id, "x"),
            other => panic!("expected missing text, got {other:?}"),
        }
    }

    #[test]
    fn parallel_scoring_matches_serial() {
        use gest_core::model::Event;
        let mut texts = BTreeMap::new();
        let mut graphs = BTreeMap::new();
        for i in 0..8 {
            let id = format!("t{i}");
            texts.insert(id.clone(), format!("the person number {i} walks home"));
            let mut g = GestGraph::new();
            g.insert_event(
                Event::new("e1", "walk").with_entities([format!("person{i}")]),
            );
            graphs.insert(id, g);
        }
        let emb = EmbeddingTable::new(2);
        let cfg = MatchConfig::default();
        let ctx = text_ctx(&texts, &graphs, &emb, &cfg);
        let mut rows = Vec::new();
        for i in 0..8 {
            for j in i + 1..8 {
                rows.push(PairRow::new(format!("t{i}"), format!("t{j}"), i % 2 == 0));
            }
        }
        let mut serial = ScoreTable { rows: rows.clone() };
        let mut parallel = ScoreTable { rows };
        for metric in [Metric::GestSm, Metric::Bleu4, Metric::RougeL] {
            score_pairs(&mut serial, &metric, &ctx, 1).unwrap();
            score_pairs(&mut parallel, &metric, &ctx, 4).unwrap();
        }
        assert_eq!(serial, parallel);
    }

    fn csv_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{contents}").unwrap();
        f
    }

    #[test]
    fn external_scores_join_unordered() {
        let f = csv_file("text_id_a,text_id_b,score\nb,a,0.25\nc,d,0.75\n");
        let scores = load_external_scores(f.path()).unwrap();
        let mut table = ScoreTable {
            rows: vec![PairRow::new("a", "b", true)],
        };
        apply_external(&mut table, "judge", &scores).unwrap();
        assert_abs_diff_eq!(table.rows[0].scores["judge"], 0.25);
    }

    #[test]
    fn external_errors() {
        let bad_header = csv_file("a,b,c\nx,y,1\n");
        assert!(matches!(
            load_external_scores(bad_header.path()),
            Err(ExternalError::BadHeader { .. })
        ));

        let bad_score = csv_file("text_id_a,text_id_b,score\nx,y,high\n");
        match load_external_scores(bad_score.path()) {
            Err(ExternalError::BadScore { record, value, .. }) => {
                assert_eq!(record, 1);
                assert_eq!(value, "high");
            }
            other => panic!("expected bad score, got {other:?}"),
        }

        let dup = csv_file("text_id_a,text_id_b,score\nx,y,1\ny,x,2\n");
        assert!(matches!(
            load_external_scores(dup.path()),
            Err(ExternalError::DuplicatePair { .. })
        ));

        let f = csv_file("text_id_a,text_id_b,score\nx,y,1\n");
        let scores = load_external_scores(f.path()).unwrap();
        let mut table = ScoreTable {
            rows: vec![PairRow::new("x", "z", true)],
        };
        match apply_external(&mut table, "judge", &scores) {
            Err(TableError::MissingExternal { a, b, .. }) => {
                assert_eq!((a.as_str(), b.as_str()), ("x", "z"));
            }
            other => panic!("expected missing pair, got {other:?}"),
        }
    }
}
