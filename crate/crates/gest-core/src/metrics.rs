//! Discrimination metrics over scored pairs.
//!
//! All functions take a score per pair and a binary label (`true` for
//! same-source pairs) and measure how well the scores separate the two
//! classes: point-biserial correlation, best-threshold accuracy,
//! Fisher score, and area under the precision-recall curve, plus
//! min-max normalization and linear combination of two metrics.

use alloc::vec::Vec;
use core::fmt;

// Redundant whenever std reaches the crate graph (tests, feature
// unification), required for the pure no_std build.
#[allow(unused_imports)]
use num_traits::Float;

/// Variance floor in the Fisher score denominator.
pub const FISHER_EPSILON: f64 = 1e-12;
/// Reported Fisher scores are capped here; the floor alone still lets
/// near-constant classes blow the value up to 1e12-ish magnitudes.
pub const FISHER_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    /// PR curves need at least one positive pair.
    NoPositives,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::NoPositives => f.write_str("no positive-labeled pairs"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// A correlation value plus a flag for degenerate input (constant
/// scores or a single label class), where the value is pinned to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

/// Pearson correlation between scores and the 0/1 labels.
pub fn point_biserial(scores: &[f64], labels: &[bool]) -> Correlation {
    assert_eq!(scores.len(), labels.len(), "scores and labels must align");
    let n = scores.len();
    if n == 0 {
        return Correlation {
            value: 0.0,
            degenerate: true,
        };
    }
    let mean_x = scores.iter().sum::<f64>() / n as f64;
    let mean_y = labels.iter().filter(|&&l| l).count() as f64 / n as f64;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &l) in scores.iter().zip(labels) {
        let dx = x - mean_x;
        let dy = if l { 1.0 } else { 0.0 } - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Correlation {
            value: 0.0,
            degenerate: true,
        };
    }
    Correlation {
        value: cov / (var_x * var_y).sqrt(),
        degenerate: false,
    }
}

/// Accuracy of the rule "predict same-source when score ≥ threshold",
/// maximized over thresholds. Candidates are the midpoints of
/// consecutive distinct sorted scores plus ±∞; ties go to the lowest
/// threshold. Returns `(threshold, accuracy)`.
pub fn best_threshold_accuracy(scores: &[f64], labels: &[bool]) -> (f64, f64) {
    assert_eq!(scores.len(), labels.len(), "scores and labels must align");
    let accuracy_at = |t: f64| -> f64 {
        let correct = scores
            .iter()
            .zip(labels)
            .filter(|(&s, &l)| (s >= t) == l)
            .count();
        correct as f64 / scores.len().max(1) as f64
    };

    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_unstable_by(f64::total_cmp);
    distinct.dedup();

    let mut best = (f64::NEG_INFINITY, accuracy_at(f64::NEG_INFINITY));
    let mut consider = |t: f64| {
        let acc = accuracy_at(t);
        if acc > best.1 {
            best = (t, acc);
        }
    };
    for pair in distinct.windows(2) {
        consider((pair[0] + pair[1]) / 2.0);
    }
    consider(f64::INFINITY);
    best
}

/// Fisher discriminant `(μ₊ − μ₋)² / (σ₊² + σ₋² + ε)` with population
/// variances, capped at [`FISHER_CAP`]. Either class empty → 0.
pub fn fisher_score(scores: &[f64], labels: &[bool]) -> f64 {
    assert_eq!(scores.len(), labels.len(), "scores and labels must align");
    let stats = |keep: bool| -> Option<(f64, f64)> {
        let class: Vec<f64> = scores
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == keep)
            .map(|(&s, _)| s)
            .collect();
        if class.is_empty() {
            return None;
        }
        let mean = class.iter().sum::<f64>() / class.len() as f64;
        let var = class.iter().map(|&s| (s - mean) * (s - mean)).sum::<f64>()
            / class.len() as f64;
        Some((mean, var))
    };
    let (Some((mean_pos, var_pos)), Some((mean_neg, var_neg))) = (stats(true), stats(false))
    else {
        return 0.0;
    };
    let d = mean_pos - mean_neg;
    (d * d / (var_pos + var_neg + FISHER_EPSILON)).min(FISHER_CAP)
}

/// Area under the precision-recall curve by the trapezoidal rule over
/// recall. Pairs are ranked by score descending with tied scores
/// entering as one group; the curve is anchored at recall 0 with the
/// first group's precision.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    assert_eq!(scores.len(), labels.len(), "scores and labels must align");
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(MetricsError::NoPositives);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut area = 0.0;
    let mut prev_recall = 0.0;
    let mut prev_precision = None;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut k = 0;
    while k < order.len() {
        // One tie group at a time.
        let mut end = k;
        while end < order.len() && scores[order[end]] == scores[order[k]] {
            if labels[order[end]] {
                tp += 1;
            } else {
                fp += 1;
            }
            end += 1;
        }
        k = end;
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / positives as f64;
        // First group also sets the recall-0 anchor.
        let prev_p = *prev_precision.get_or_insert(precision);
        area += (recall - prev_recall) * (precision + prev_p) / 2.0;
        prev_recall = recall;
        prev_precision = Some(precision);
    }
    Ok(area)
}

/// Min-max constants of one metric column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
}

impl Normalization {
    pub fn fit(values: &[f64]) -> Normalization {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Normalization { min, max }
    }

    /// Maps a value into `[0,1]`; a constant column maps to 0.
    pub fn apply(&self, value: f64) -> f64 {
        if self.max > self.min {
            (value - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }
}

/// Min-max normalizes a column to `[0,1]`, returning the constants used.
pub fn min_max_normalize(values: &[f64]) -> (Vec<f64>, Normalization) {
    let norm = Normalization::fit(values);
    (values.iter().map(|&v| norm.apply(v)).collect(), norm)
}

/// `alpha·a + (1−alpha)·b`, elementwise. Inputs are expected to be
/// normalized already.
pub fn combine(a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "metric columns must align");
    a.iter()
        .zip(b)
        .map(|(&x, &y)| alpha * x + (1.0 - alpha) * y)
        .collect()
}

/// Grid-searches `alpha ∈ {0.00, 0.01, …, 1.00}` maximizing the
/// point-biserial correlation of the combined column; ties go to the
/// smaller alpha.
pub fn fit_alpha(a: &[f64], b: &[f64], labels: &[bool]) -> f64 {
    let mut best_alpha = 0.0;
    let mut best_corr = f64::NEG_INFINITY;
    for k in 0..=100u32 {
        let alpha = f64::from(k) / 100.0;
        let corr = point_biserial(&combine(a, b, alpha), labels).value;
        if corr > best_corr {
            best_corr = corr;
            best_alpha = alpha;
        }
    }
    best_alpha
}
