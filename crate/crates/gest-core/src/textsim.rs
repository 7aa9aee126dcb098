//! Baseline text-overlap metrics: BLEU@4 and ROUGE-L.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// Redundant whenever std reaches the crate graph (tests, feature
// unification), required for the pure no_std build.
#[allow(unused_imports)]
use num_traits::Float;

/// Lowercases and splits on any non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// BLEU@4 with its audit trail: per-order clipped precisions, which
/// orders fell back to smoothing, and the brevity penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct Bleu4 {
    pub precisions: [f64; 4],
    /// Orders whose clipped match count was zero and were replaced by
    /// `1/(2·hypothesis_len)`.
    pub smoothed: [bool; 4],
    pub brevity_penalty: f64,
    pub score: f64,
}

impl fmt::Display for Bleu4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.score)
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts = BTreeMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// BLEU@4: geometric mean of the clipped 1–4-gram precisions times the
/// brevity penalty. A zero clipped count at any order is smoothed to
/// `1/(2·hypothesis_len)`. An empty hypothesis scores 0.
pub fn bleu4_detailed(reference: &str, hypothesis: &str) -> Bleu4 {
    let ref_tokens = tokenize(reference);
    let hyp_tokens = tokenize(hypothesis);
    if hyp_tokens.is_empty() {
        return Bleu4 {
            precisions: [0.0; 4],
            smoothed: [false; 4],
            brevity_penalty: 0.0,
            score: 0.0,
        };
    }

    let smoothing = 1.0 / (2.0 * hyp_tokens.len() as f64);
    let mut precisions = [0.0; 4];
    let mut smoothed = [false; 4];
    for n in 1..=4 {
        let ref_counts = ngram_counts(&ref_tokens, n);
        let hyp_counts = ngram_counts(&hyp_tokens, n);
        let clipped: usize = hyp_counts
            .iter()
            .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = hyp_tokens.len().saturating_sub(n - 1);
        if clipped == 0 || total == 0 {
            precisions[n - 1] = smoothing;
            smoothed[n - 1] = true;
        } else {
            precisions[n - 1] = clipped as f64 / total as f64;
        }
    }

    let c = hyp_tokens.len() as f64;
    let r = ref_tokens.len() as f64;
    let brevity_penalty = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / 4.0;
    Bleu4 {
        precisions,
        smoothed,
        brevity_penalty,
        score: brevity_penalty * log_mean.exp(),
    }
}

pub fn bleu4(reference: &str, hypothesis: &str) -> f64 {
    bleu4_detailed(reference, hypothesis).score
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = alloc::vec![0usize; b.len() + 1];
    let mut row = alloc::vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            row[j + 1] = if x == y {
                prev[j] + 1
            } else {
                row[j].max(prev[j + 1])
            };
        }
        core::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// ROUGE-L: F1 over the longest common subsequence of the token
/// streams. Either side empty → 0.
pub fn rouge_l(reference: &str, hypothesis: &str) -> f64 {
    let ref_tokens = tokenize(reference);
    let hyp_tokens = tokenize(hypothesis);
    if ref_tokens.is_empty() || hyp_tokens.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(&ref_tokens, &hyp_tokens) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let recall = lcs / ref_tokens.len() as f64;
    let precision = lcs / hyp_tokens.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tokenize_lowercases_and_strips_punctuation() {
        assert_eq!(
            tokenize("The cat, quickly; JUMPED!"),
            ["the", "cat", "quickly", "jumped"]
        );
        assert_eq!(tokenize("  \t\n "), [] as [&str; 0]);
        assert_eq!(tokenize("cat's"), ["cat", "s"]);
    }

    #[test]
    fn identical_texts_score_one() {
        let text = "the dog chased the cat across the yard";
        assert_abs_diff_eq!(bleu4(text, text), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rouge_l(text, text), 1.0, epsilon = 1e-12);
        // Case and punctuation do not matter.
        assert_abs_diff_eq!(bleu4(text, "The dog chased the cat, across the yard."), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn clipped_unigram_precision() {
        let b = bleu4_detailed("the cat is on the mat", "the the the the the the the");
        // "the" appears twice in the reference: clipped count 2 of 7.
        assert_abs_diff_eq!(b.precisions[0], 2.0 / 7.0, epsilon = 1e-12);
        assert!(!b.smoothed[0]);
        // No 2-gram matches at all → smoothing kicks in at 1/(2·7).
        assert_abs_diff_eq!(b.precisions[1], 1.0 / 14.0, epsilon = 1e-12);
        assert!(b.smoothed[1]);
    }

    #[test]
    fn empty_hypothesis_scores_zero() {
        assert_eq!(bleu4("some reference", ""), 0.0);
        assert_eq!(rouge_l("some reference", ""), 0.0);
        assert_eq!(rouge_l("", "some hypothesis"), 0.0);
    }

    #[test]
    fn brevity_penalty_applies_to_short_hypotheses() {
        // Hypothesis is a clean prefix: all precisions 1, BP = e^(1−8/4).
        let b = bleu4_detailed(
            "the dog chased the cat across the yard",
            "the dog chased the",
        );
        assert_eq!(b.precisions, [1.0; 4]);
        assert_abs_diff_eq!(b.brevity_penalty, (1.0f64 - 2.0).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.score, (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn bleu_smoothing_on_fully_disjoint_texts() {
        let b = bleu4_detailed("alpha beta gamma", "delta epsilon zeta");
        assert_eq!(b.smoothed, [true; 4]);
        assert_abs_diff_eq!(
            b.score,
            1.0 / 6.0, // BP 1? c == r → c > r false → BP = e^0 = 1.
            epsilon = 1e-12
        );
    }

    #[test]
    fn rouge_hand_example() {
        // LCS("a b c d", "a c d e") = a c d → R = 3/4, P = 3/4.
        assert_abs_diff_eq!(rouge_l("a b c d", "a c d e"), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn rouge_respects_order() {
        // Same bag of words, reversed order: LCS 1, R = P = F1 = 1/3.
        let f = rouge_l("a b c", "c b a");
        assert_abs_diff_eq!(f, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn lcs_oracle_cases() {
        let toks = |s: &str| -> alloc::vec::Vec<alloc::string::String> {
            s.split_whitespace().map(|t| t.to_string()).collect()
        };
        assert_eq!(lcs_len(&toks("a b c"), &toks("a b c")), 3);
        assert_eq!(lcs_len(&toks("a b c"), &toks("x y z")), 0);
        assert_eq!(lcs_len(&toks("a x b y c"), &toks("a b c")), 3);
        assert_eq!(lcs_len(&toks(""), &toks("a")), 0);
    }
}
