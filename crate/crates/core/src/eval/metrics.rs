//! Per-test-case ranking metrics.
//!
//! All metrics treat relevance as binary and score only the top `k_max`
//! positions of the prediction. For one case with predicted list `L` and
//! relevant set `R`:
//!
//! * recall@k    — hits in `L[..k]` over `|R|`
//! * precision@k — hits in `L[..k]` over `k`
//! * F1@k        — harmonic mean of the two
//! * MRR@k       — mean over `R` of the reciprocal rank of each relevant
//!   genre (0 when outside the top k)
//! * MAP@k       — sum of precision@i at relevant positions, over `|R|`
//! * nDCG@k      — binary-gain DCG with `log2(i + 1)` discounts, normalized
//!   by the DCG of an ideal prefix of `min(k, |R|)` relevant items

use crate::vocab::GenreId;

/// Number of top positions F1 is reported at.
pub const F1_K: usize = 5;

/// Metric values for a single test case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseMetrics {
    /// recall@k for k = 1..=k_max (index k-1).
    pub recall: Vec<f64>,
    /// precision@k for k = 1..=k_max (index k-1).
    pub precision: Vec<f64>,
    /// F1 at `min(F1_K, k_max)`.
    pub f1: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Scores one predicted list against its relevant set.
///
/// `relevant` must be non-empty, sorted, and duplicate-free; `predicted` is
/// read up to `k_max` entries.
pub fn case_metrics(predicted: &[GenreId], relevant: &[GenreId], k_max: usize) -> CaseMetrics {
    assert!(k_max >= 1, "k_max must be at least 1");
    debug_assert!(!relevant.is_empty());
    let is_relevant = |g: GenreId| relevant.binary_search(&g).is_ok();
    let n_relevant = relevant.len() as f64;

    let mut recall = Vec::with_capacity(k_max);
    let mut precision = Vec::with_capacity(k_max);
    let mut hits = 0usize;
    let mut reciprocal_sum = 0.0;
    let mut precision_at_hits = 0.0;
    let mut dcg = 0.0;
    for i in 0..k_max {
        if let Some(&g) = predicted.get(i) {
            if is_relevant(g) {
                hits += 1;
                let rank = (i + 1) as f64;
                reciprocal_sum += 1.0 / rank;
                precision_at_hits += hits as f64 / rank;
                dcg += 1.0 / (rank + 1.0).log2();
            }
        }
        recall.push(hits as f64 / n_relevant);
        precision.push(hits as f64 / (i + 1) as f64);
    }

    let ideal_hits = relevant.len().min(k_max);
    let idcg: f64 = (1..=ideal_hits).map(|i| 1.0 / (i as f64 + 1.0).log2()).sum();

    let f1_k = F1_K.min(k_max);
    CaseMetrics {
        f1: f1(precision[f1_k - 1], recall[f1_k - 1]),
        mrr: reciprocal_sum / n_relevant,
        map: precision_at_hits / n_relevant,
        ndcg: if idcg > 0.0 { dcg / idcg } else { 0.0 },
        recall,
        precision,
    }
}
