//! Activation scoring: base-level frequency/recency plus contextual spread.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::memory::{AssociationIndex, GenreHistoryStore, UserHistory};
use crate::prediction::PredictionList;
use crate::vocab::{ArtistId, GenreId, UserId};

/// Base-level activation of one genre for one user at `ref_time`:
/// `ln(sum_j age_j^(-d))` where `age_j = ref_time - t_j` in seconds. Ages
/// below one second (including zero) are clamped to one second, the
/// smallest expressible age, so the sum stays finite.
pub fn bll_score(
    store: &GenreHistoryStore,
    user: UserId,
    genre: GenreId,
    ref_time: i64,
    decay: f64,
) -> Result<f64> {
    let history = store
        .user(user)
        .ok_or_else(|| Error::ColdUser(format!("id {}", user.0)))?;
    let occurrences = history.occurrences(genre).ok_or_else(|| {
        Error::UnknownGenreForUser {
            user: format!("id {}", user.0),
            genre: format!("id {}", genre.0),
        }
    })?;
    Ok(bll_raw(occurrences, ref_time, decay))
}

#[inline]
fn bll_raw(occurrences: &[i64], ref_time: i64, decay: f64) -> f64 {
    let sum: f64 = occurrences
        .iter()
        .map(|&t| ((ref_time - t).max(1) as f64).powf(-decay))
        .sum();
    sum.ln()
}

/// Numerically stable softmax over a genre->score map.
///
/// The maximum is subtracted before exponentiation, so scores of any
/// magnitude map into `(0, 1]` with the output summing to 1. Ordering is
/// preserved. Errors on empty input and on non-finite scores.
pub fn softmax_normalize(scores: &BTreeMap<GenreId, f64>) -> Result<BTreeMap<GenreId, f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores("softmax over empty score set".into()));
    }
    let mut max = f64::NEG_INFINITY;
    for (&g, &s) in scores {
        if !s.is_finite() {
            return Err(Error::NonFiniteScore(format!(
                "genre id {} has score {s}",
                g.0
            )));
        }
        max = max.max(s);
    }
    let mut out = BTreeMap::new();
    let mut total = 0.0;
    for (&g, &s) in scores {
        let e = (s - max).exp();
        total += e;
        out.insert(g, e);
    }
    for v in out.values_mut() {
        *v /= total;
    }
    Ok(out)
}

/// Activation-based genre predictors over a trained history store.
///
/// `artist_genres` maps artist ids to their catalog genre lists and defines
/// the context genres of the most recently played artist. `context_weight`
/// is the attentional weight of each context genre (1 by default, giving
/// every context genre equal pull).
#[derive(Debug, Clone, Copy)]
pub struct MemoryModel<'a> {
    pub history: &'a GenreHistoryStore,
    pub assoc: &'a AssociationIndex,
    pub artist_genres: &'a [Vec<GenreId>],
    pub decay: f64,
    pub context_weight: f64,
}

impl<'a> MemoryModel<'a> {
    pub fn new(
        history: &'a GenreHistoryStore,
        assoc: &'a AssociationIndex,
        artist_genres: &'a [Vec<GenreId>],
        decay: f64,
    ) -> Self {
        MemoryModel {
            history,
            assoc,
            artist_genres,
            decay,
            context_weight: 1.0,
        }
    }

    pub fn with_context_weight(mut self, w: f64) -> Self {
        self.context_weight = w;
        self
    }

    fn user_history(&self, user: UserId) -> Result<&'a UserHistory> {
        self.history
            .user(user)
            .filter(|h| h.genre_count() > 0)
            .ok_or_else(|| Error::ColdUser(format!("id {}", user.0)))
    }

    fn normalized_base(&self, history: &UserHistory, ref_time: i64) -> Result<BTreeMap<GenreId, f64>> {
        let raw: BTreeMap<GenreId, f64> = history
            .iter()
            .map(|(g, occ)| (g, bll_raw(occ, ref_time, self.decay)))
            .collect();
        softmax_normalize(&raw)
    }

    /// Top-k genres by softmax-normalized base-level activation. Candidates
    /// are exactly the genres the user has listened to.
    pub fn predict_bll(&self, user: UserId, ref_time: i64, k: usize) -> Result<PredictionList> {
        let history = self.user_history(user)?;
        let normalized = self.normalized_base(history, ref_time)?;
        Ok(PredictionList::from_scores(
            user,
            None,
            k,
            normalized.into_iter().collect(),
        ))
    }

    /// Top-k genres by the full activation: normalized base-level activation
    /// plus associative activation spread from the context artist's genres,
    /// softmax-normalized again. An unknown or unmapped context artist means
    /// an empty context, in which case the result equals [`Self::predict_bll`]
    /// exactly.
    pub fn predict_act(
        &self,
        user: UserId,
        context_artist: Option<ArtistId>,
        ref_time: i64,
        k: usize,
    ) -> Result<PredictionList> {
        let context_genres: &[GenreId] = match context_artist {
            Some(artist) => self
                .artist_genres
                .get(artist.index())
                .map(Vec::as_slice)
                .unwrap_or(&[]),
            None => &[],
        };
        if context_genres.is_empty() {
            let mut prediction = self.predict_bll(user, ref_time, k)?;
            prediction.context_artist = context_artist;
            return Ok(prediction);
        }
        let history = self.user_history(user)?;
        let base = self.normalized_base(history, ref_time)?;
        let mut activation = BTreeMap::new();
        for (g, b) in base {
            let mut spread = 0.0;
            for &c in context_genres {
                spread += self.context_weight * self.assoc.strength(c, g)?;
            }
            activation.insert(g, b + spread);
        }
        let normalized = softmax_normalize(&activation)?;
        Ok(PredictionList {
            context_artist,
            ..PredictionList::from_scores(user, None, k, normalized.into_iter().collect())
        })
    }
}
