//! Fitting the power-law decay exponent from relistening gaps.
//!
//! For every consecutive pair of occurrences of the same `(user, genre)` the
//! gap in seconds is recorded. Gaps are bucketed into logarithmically spaced
//! bins spanning the observed range; every populated bin contributes one
//! point `(log10 of the geometric mean gap in the bin, log10 of the gap
//! count in the bin)`. A least-squares line through those points has a
//! negative slope for forgetting-style data; the decay exponent is its
//! magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::GenreHistoryStore;

pub const DEFAULT_DECAY_BINS: usize = 100;

/// Result of the log-log regression over binned relistening gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Decay exponent: the magnitude of the regression slope.
    pub d: f64,
    /// Number of populated bins that entered the regression.
    pub point_count: usize,
    /// Binning resolution the fit was computed with.
    pub bin_count: usize,
}

/// Fits the decay exponent over all relistening gaps in `store`.
pub fn fit_decay(store: &GenreHistoryStore, bins: usize) -> Result<DecayFit> {
    let mut gaps = Vec::new();
    for (_, history) in store.users() {
        for (_, occurrences) in history.iter() {
            for pair in occurrences.windows(2) {
                // Sub-second (and zero) gaps count as one second, the
                // smallest expressible age.
                gaps.push((pair[1] - pair[0]).max(1) as f64);
            }
        }
    }
    fit_decay_from_gaps(&gaps, bins)
}

/// Fits the decay exponent from a raw gap list (seconds, each >= 1).
pub fn fit_decay_from_gaps(gaps: &[f64], bins: usize) -> Result<DecayFit> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "bin count {bins} too small, need at least 2"
        )));
    }
    if gaps.is_empty() {
        return Err(Error::DegenerateDecayFit { populated_bins: 0 });
    }
    if let Some(bad) = gaps.iter().find(|g| !g.is_finite() || **g < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "gap {bad} outside [1, inf)"
        )));
    }
    let log_lo = gaps.iter().copied().fold(f64::INFINITY, f64::min).log10();
    let log_hi = gaps
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .log10();
    if log_hi <= log_lo {
        // All gaps identical: a single populated bin, no line to fit.
        return Err(Error::DegenerateDecayFit { populated_bins: 1 });
    }
    let width = (log_hi - log_lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut log_sums = vec![0.0f64; bins];
    for &gap in gaps {
        let log_gap = gap.log10();
        let idx = (((log_gap - log_lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
        log_sums[idx] += log_gap;
    }
    let points: Vec<(f64, f64)> = counts
        .iter()
        .zip(&log_sums)
        .filter(|&(&c, _)| c > 0)
        .map(|(&c, &s)| (s / c as f64, (c as f64).log10()))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateDecayFit {
            populated_bins: points.len(),
        });
    }
    let (slope, intercept) = least_squares(&points);
    if slope == 0.0 {
        // Flat relistening counts carry no decay signal; d must stay
        // strictly positive.
        return Err(Error::FlatDecayFit);
    }
    Ok(DecayFit {
        slope,
        intercept,
        d: slope.abs(),
        point_count: points.len(),
        bin_count: bins,
    })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}
