//! Modeling of music genre preferences from raw listening-event logs.
//!
//! The crate is organized as a pipeline:
//!
//! * [`ingest`] parses event/profile/tag files, filters users by listening
//!   volume, scores mainstreaminess, and partitions users into groups.
//! * [`memory`] scores genres with a declarative-memory activation model:
//!   frequency/recency base activation with power-law decay, plus
//!   associative activation spread from the genres of the most recently
//!   played artist.
//! * [`baselines`] implements the five comparison predictors (group top
//!   genres, user- and item-based collaborative filtering, personal
//!   popularity, personal recency).
//! * [`eval`] runs the temporal-split protocol: per-event test cases with
//!   context tracking, six top-k ranking metrics, per-group aggregation,
//!   and paired significance tests.
//!
//! All scoring is deterministic: ties are broken by ascending identifier
//! everywhere, and evaluation results are independent of thread count.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod memory;
pub mod prediction;
pub mod vocab;

pub use error::{Error, Result};
pub use prediction::{Prediction, PredictionList};
pub use vocab::{ArtistId, GenreId, UserId, Vocab};
