//! Paired significance testing over per-user metric means.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Outcome of a paired two-tailed t-test.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignificanceReport {
    Test {
        t: f64,
        p: f64,
        alpha: f64,
        significant: bool,
        /// Number of pairs.
        n: usize,
    },
    /// The differences had zero variance; a t statistic is undefined.
    Degenerate { reason: String, n: usize },
}

impl SignificanceReport {
    pub fn is_significant(&self) -> bool {
        matches!(self, SignificanceReport::Test { significant: true, .. })
    }
}

/// Paired two-tailed Student's t-test of `a` against `b`.
///
/// The vectors must be aligned on the same units (one entry per user) and
/// have at least two pairs. Zero variance of the pairwise differences is
/// reported as [`SignificanceReport::Degenerate`] rather than dividing by
/// zero.
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<SignificanceReport> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 pairs, got {}",
            a.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "paired samples must be finite".into(),
        ));
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        let reason = if mean == 0.0 {
            "identical scores".to_owned()
        } else {
            format!("constant difference {mean} with zero variance")
        };
        return Ok(SignificanceReport::Degenerate { reason, n });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::DegenerateStatistic(e.to_string()))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(SignificanceReport::Test {
        t,
        p,
        alpha,
        significant: p < alpha,
        n,
    })
}
