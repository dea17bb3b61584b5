//! Ranked genre predictions shared by all predictors.

use serde::Serialize;

use crate::vocab::{ArtistId, GenreId, UserId};

/// One scored genre in a prediction list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub genre: GenreId,
    pub score: f64,
}

/// An ordered top-k genre list for one `(user, context)` query.
///
/// Scores are non-increasing and the list never exceeds `k` entries. Equal
/// scores are ordered by ascending genre id. Activation-based predictors
/// emit softmax-normalized scores; count-based predictors emit their raw
/// ranking scores.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionList {
    pub user: UserId,
    pub context_artist: Option<ArtistId>,
    pub k: usize,
    pub items: Vec<Prediction>,
}

impl PredictionList {
    /// Builds a list from unordered `(genre, score)` candidates: sorts by
    /// score descending with ascending genre id as tie-break, then keeps the
    /// top `k`.
    pub fn from_scores(
        user: UserId,
        context_artist: Option<ArtistId>,
        k: usize,
        mut scored: Vec<(GenreId, f64)>,
    ) -> Self {
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("prediction scores must not be NaN")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(k);
        PredictionList {
            user,
            context_artist,
            k,
            items: scored
                .into_iter()
                .map(|(genre, score)| Prediction { genre, score })
                .collect(),
        }
    }

    pub fn genres(&self) -> impl Iterator<Item = GenreId> + '_ {
        self.items.iter().map(|p| p.genre)
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }
}

/// JSON-lines form of a prediction, with identifiers resolved to strings.
#[derive(Debug, Serialize)]
pub struct PredictionRecord<'a> {
    pub algorithm: &'a str,
    pub user: &'a str,
    pub context_artist: Option<&'a str>,
    pub k: usize,
    pub ref_time: i64,
    pub relevant: Vec<&'a str>,
    pub items: Vec<PredictionItemRecord<'a>>,
}

#[derive(Debug, Serialize)]
pub struct PredictionItemRecord<'a> {
    pub genre: &'a str,
    pub score: f64,
}
