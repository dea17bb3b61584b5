//! File formats of the evaluation stage: metric and curve CSVs, the
//! significance matrix, and the per-case prediction log.
//!
//! Values are written with Rust's shortest-round-trip float formatting, so
//! identical runs produce byte-identical files.

use std::io::Write;

use crate::error::{Error, Result};
use crate::eval::run::EvalOutcome;
use crate::eval::split::TestCase;
use crate::eval::stats::SignificanceReport;
use crate::ingest::GenreCatalog;
use crate::prediction::{PredictionItemRecord, PredictionRecord};
use crate::vocab::Vocab;

fn io_err(e: std::io::Error) -> Error {
    Error::io("report output", e)
}

/// `group,algorithm,metric,k,value,n`: one row per metric per algorithm
/// per group. Recall and precision appear for every k, the headline
/// metrics once.
pub fn write_metrics_csv<W: Write>(
    mut out: W,
    sections: &[(&str, &[EvalOutcome])],
    f1_k: usize,
) -> Result<()> {
    writeln!(out, "group,algorithm,metric,k,value,n").map_err(io_err)?;
    for &(group, outcomes) in sections {
        for outcome in outcomes {
            let algo = outcome.algorithm.label();
            let n = outcome.n_cases;
            let k_max = outcome.means.recall.len();
            for k in 1..=k_max {
                writeln!(
                    out,
                    "{group},{algo},R,{k},{},{n}",
                    outcome.means.recall[k - 1]
                )
                .map_err(io_err)?;
            }
            for k in 1..=k_max {
                writeln!(
                    out,
                    "{group},{algo},P,{k},{},{n}",
                    outcome.means.precision[k - 1]
                )
                .map_err(io_err)?;
            }
            writeln!(out, "{group},{algo},F1,{f1_k},{},{n}", outcome.means.f1).map_err(io_err)?;
            writeln!(out, "{group},{algo},MRR,{k_max},{},{n}", outcome.means.mrr)
                .map_err(io_err)?;
            writeln!(out, "{group},{algo},MAP,{k_max},{},{n}", outcome.means.map)
                .map_err(io_err)?;
            writeln!(out, "{group},{algo},nDCG,{k_max},{},{n}", outcome.means.ndcg)
                .map_err(io_err)?;
        }
    }
    Ok(())
}

/// `group,algorithm,k,recall,precision` for k = 1..=k_max: the data behind
/// recall/precision curves.
pub fn write_curve_csv<W: Write>(
    mut out: W,
    sections: &[(&str, &[EvalOutcome])],
) -> Result<()> {
    writeln!(out, "group,algorithm,k,recall,precision").map_err(io_err)?;
    for &(group, outcomes) in sections {
        for outcome in outcomes {
            let algo = outcome.algorithm.label();
            for k in 1..=outcome.means.recall.len() {
                writeln!(
                    out,
                    "{group},{algo},{k},{},{}",
                    outcome.means.recall[k - 1],
                    outcome.means.precision[k - 1]
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(())
}

/// One pairwise significance result, ready for CSV emission.
#[derive(Debug, Clone)]
pub struct SignificanceRow {
    pub group: String,
    pub metric: &'static str,
    pub algorithm_a: &'static str,
    pub algorithm_b: &'static str,
    pub report: SignificanceReport,
}

/// `group,metric,algorithm_a,algorithm_b,t,p,significant`. Degenerate
/// comparisons (zero variance of differences) leave t and p empty and write
/// `degenerate` in the significance column.
pub fn write_significance_csv<W: Write>(mut out: W, rows: &[SignificanceRow]) -> Result<()> {
    writeln!(out, "group,metric,algorithm_a,algorithm_b,t,p,significant").map_err(io_err)?;
    for row in rows {
        let (t, p, significant) = match &row.report {
            SignificanceReport::Test { t, p, significant, .. } => {
                (t.to_string(), p.to_string(), significant.to_string())
            }
            SignificanceReport::Degenerate { .. } => {
                (String::new(), String::new(), "degenerate".to_owned())
            }
        };
        writeln!(
            out,
            "{},{},{},{},{t},{p},{significant}",
            row.group, row.metric, row.algorithm_a, row.algorithm_b
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// JSON lines, one per test case: algorithm, query identifiers, the relevant
/// set, and the scored items. Enough to re-score externally.
pub fn write_prediction_log<W: Write>(
    mut out: W,
    algorithm_label: &str,
    cases: &[TestCase],
    outcome: &EvalOutcome,
    users: &Vocab,
    artists: &Vocab,
    catalog: &GenreCatalog,
) -> Result<()> {
    debug_assert_eq!(cases.len(), outcome.predictions.len());
    for (case, prediction) in cases.iter().zip(&outcome.predictions) {
        let record = PredictionRecord {
            algorithm: algorithm_label,
            user: users.name(case.user.0),
            context_artist: case.context_artist.map(|a| artists.name(a.0)),
            k: prediction.k,
            ref_time: case.ref_time,
            relevant: case
                .relevant
                .iter()
                .map(|&g| catalog.genre_name(g))
                .collect(),
            items: prediction
                .items
                .iter()
                .map(|p| PredictionItemRecord {
                    genre: catalog.genre_name(p.genre),
                    score: p.score,
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &record)
            .map_err(|e| Error::io("prediction log", e.into()))?;
        writeln!(out).map_err(io_err)?;
    }
    Ok(())
}
