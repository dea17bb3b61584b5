//! Offline evaluation protocol: temporal splitting, per-event test cases
//! with context tracking, top-k ranking metrics, per-group aggregation, and
//! paired significance testing.

mod metrics;
mod report;
mod run;
mod split;
mod stats;

pub use metrics::{case_metrics, f1, CaseMetrics};
pub use report::{
    write_curve_csv, write_metrics_csv, write_prediction_log, write_significance_csv,
    SignificanceRow,
};
pub use run::{
    Algorithm, EvalConfig, EvalOutcome, GroupEvaluator, MetricMeans, PerUserMeans, DEBUG_ALGORITHMS,
    PAPER_ALGORITHMS,
};
pub use split::{build_test_cases, temporal_split, SplitDataset, TestCase, UserSplit};
pub use stats::{paired_t_test, SignificanceReport};
