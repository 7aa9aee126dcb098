//! Evaluation reports: metric summaries over a score table, plus the
//! linear metric combination used by `combine`.

use gest_core::matching::MatchConfig;
use gest_core::metrics::{
    self, best_threshold_accuracy, fisher_score, point_biserial, pr_auc, MetricsError,
};
use serde::Serialize;
use thiserror::Error;

use crate::json::MatchConfigJson;
use crate::table::ScoreTable;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("metric column '{name}' is missing from the table")]
    MissingColumn { name: String },
    #[error("score table has no positive pairs")]
    NoPositives,
    #[error("score table has no negative pairs")]
    NoNegatives,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub metric: String,
    pub corr: f64,
    pub corr_degenerate: bool,
    pub threshold: f64,
    pub acc: f64,
    pub fisher: f64,
    pub pr_auc: f64,
}

/// Fixed evaluation policies, echoed into every report so the numbers
/// can be interpreted without consulting the source.
#[derive(Debug, Clone, Serialize)]
pub struct Policies {
    pub correlation: &'static str,
    pub threshold: &'static str,
    pub pr_curve: &'static str,
    pub bleu_smoothing: &'static str,
    pub combination: &'static str,
    pub negatives: &'static str,
}

impl Default for Policies {
    fn default() -> Policies {
        Policies {
            correlation: "point-biserial (Pearson against 0/1 labels); 0 and flagged when degenerate",
            threshold: "best accuracy over midpoints of adjacent distinct scores plus +/-inf; ties -> lowest threshold; predict positive when score >= threshold",
            pr_curve: "descending scores, tied scores grouped; trapezoid over recall, anchored at recall 0 with the first group's precision",
            bleu_smoothing: "zero n-gram counts replaced by 1/(2*hypothesis_len); BLEU averaged over both pair directions",
            combination: "columns min-max normalized over this table, combined = alpha*a + (1-alpha)*b; alpha grid 0.00..1.00 step 0.01, ties -> smaller",
            negatives: "all cross-source pairs, or neg_per_pos per positive sampled uniformly without replacement (seeded)",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub positives: usize,
    pub negatives: usize,
    pub seed: u64,
    pub neg_per_pos: usize,
    pub config: MatchConfigJson,
    pub policies: Policies,
    pub metrics: Vec<MetricReport>,
}

pub fn evaluate_column(table: &ScoreTable, name: &str) -> Result<MetricReport, ReportError> {
    let scores = table
        .column(name)
        .ok_or_else(|| ReportError::MissingColumn {
            name: name.to_string(),
        })?;
    let labels = table.labels();
    let corr = point_biserial(&scores, &labels);
    let (threshold, acc) = best_threshold_accuracy(&scores, &labels);
    let fisher = fisher_score(&scores, &labels);
    let auc = pr_auc(&scores, &labels).map_err(|e| match e {
        MetricsError::NoPositives => ReportError::NoPositives,
    })?;
    Ok(MetricReport {
        metric: name.to_string(),
        corr: corr.value,
        corr_degenerate: corr.degenerate,
        threshold,
        acc,
        fisher,
        pr_auc: auc,
    })
}

/// Summarizes the named columns (one report row each, in the order
/// given) together with the settings that produced the table.
pub fn build_report(
    table: &ScoreTable,
    columns: &[String],
    config: &MatchConfig,
    seed: u64,
    neg_per_pos: usize,
) -> Result<EvalReport, ReportError> {
    let positives = table.rows.iter().filter(|r| r.label).count();
    let mut metrics = Vec::with_capacity(columns.len());
    for name in columns {
        metrics.push(evaluate_column(table, name)?);
    }
    Ok(EvalReport {
        pairs: table.rows.len(),
        positives,
        negatives: table.rows.len() - positives,
        seed,
        neg_per_pos,
        config: MatchConfigJson::from(config.clone()),
        policies: Policies::default(),
        metrics,
    })
}

pub fn render_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Plain-text table for humans, six decimals per cell.
pub fn render_table(report: &EvalReport) -> String {
    let name_width = report
        .metrics
        .iter()
        .map(|m| m.metric.len())
        .chain(std::iter::once("metric".len()))
        .max()
        .unwrap_or(6);
    let mut out = format!(
        "{:<name_width$}  {:>12}  {:>12}  {:>12}  {:>12}  {:>12}\n",
        "metric", "corr", "threshold", "acc", "fisher", "pr_auc"
    );
    for m in &report.metrics {
        let corr = if m.corr_degenerate {
            format!("{:.6}*", m.corr)
        } else {
            format!("{:.6}", m.corr)
        };
        out.push_str(&format!(
            "{:<name_width$}  {:>12}  {:>12.6}  {:>12.6}  {:>12.6}  {:>12.6}\n",
            m.metric, corr, m.threshold, m.acc, m.fisher, m.pr_auc
        ));
    }
    if report.metrics.iter().any(|m| m.corr_degenerate) {
        out.push_str("* correlation degenerate (constant scores or labels)\n");
    }
    out
}

fn normalized_column(table: &ScoreTable, name: &str) -> Result<Vec<f64>, ReportError> {
    let column = table
        .column(name)
        .ok_or_else(|| ReportError::MissingColumn {
            name: name.to_string(),
        })?;
    Ok(metrics::min_max_normalize(&column).0)
}

pub fn combined_column_name(a: &str, b: &str) -> String {
    format!("{a}+{b}")
}

/// Adds the column `a+b` = `alpha·norm(a) + (1−alpha)·norm(b)`, with
/// both inputs min-max normalized over this table.
pub fn combine_linear(
    table: &mut ScoreTable,
    a: &str,
    b: &str,
    alpha: f64,
) -> Result<String, ReportError> {
    let na = normalized_column(table, a)?;
    let nb = normalized_column(table, b)?;
    let combined = metrics::combine(&na, &nb, alpha);
    let name = combined_column_name(a, b);
    table.set_column(&name, &combined);
    Ok(name)
}

/// Grid-fits the combination weight on this table (normalizing over it).
pub fn fit_alpha_on(table: &ScoreTable, a: &str, b: &str) -> Result<f64, ReportError> {
    let na = normalized_column(table, a)?;
    let nb = normalized_column(table, b)?;
    Ok(metrics::fit_alpha(&na, &nb, &table.labels()))
}
