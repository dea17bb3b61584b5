//! Declarative-memory scoring of genres.
//!
//! A user's past listening is kept as per-genre occurrence histories
//! ([`GenreHistoryStore`]). On top of those, [`MemoryModel`] scores genres
//! by frequency and recency with power-law decay, optionally adding
//! associative activation spread from the genres of the most recently
//! played artist. [`fit_decay`] fits the decay exponent from relistening
//! gaps, and [`AssociationIndex`] holds the genre co-occurrence index used
//! for association strengths.

mod activation;
mod assoc;
mod decay;

pub use activation::{bll_score, softmax_normalize, MemoryModel};
pub use assoc::AssociationIndex;
pub use decay::{fit_decay, fit_decay_from_gaps, DecayFit, DEFAULT_DECAY_BINS};

use std::collections::BTreeMap;

use crate::ingest::ListeningEvent;
use crate::vocab::{ArtistId, GenreId, UserId};

/// Occurrence timestamps per genre for one user, ascending.
#[derive(Debug, Clone, Default)]
pub struct UserHistory {
    genres: BTreeMap<GenreId, Vec<i64>>,
}

impl UserHistory {
    /// Distinct genres the user has listened to, ascending by id.
    pub fn genres(&self) -> impl Iterator<Item = GenreId> + '_ {
        self.genres.keys().copied()
    }

    pub fn genre_count(&self) -> usize {
        self.genres.len()
    }

    pub fn occurrences(&self, genre: GenreId) -> Option<&[i64]> {
        self.genres.get(&genre).map(Vec::as_slice)
    }

    pub fn last_timestamp(&self, genre: GenreId) -> Option<i64> {
        self.genres.get(&genre).and_then(|v| v.last().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (GenreId, &[i64])> {
        self.genres.iter().map(|(&g, v)| (g, v.as_slice()))
    }

    pub fn total_occurrences(&self) -> usize {
        self.genres.values().map(Vec::len).sum()
    }
}

/// Genre occurrence histories for a set of users.
///
/// Build-once, read-many: scoring borrows the store immutably and may run in
/// parallel. Iteration order is deterministic (ascending user id, ascending
/// genre id).
#[derive(Debug, Clone, Default)]
pub struct GenreHistoryStore {
    per_user: BTreeMap<UserId, UserHistory>,
}

impl GenreHistoryStore {
    pub fn user(&self, user: UserId) -> Option<&UserHistory> {
        self.per_user.get(&user)
    }

    pub fn users(&self) -> impl Iterator<Item = (UserId, &UserHistory)> {
        self.per_user.iter().map(|(&u, h)| (u, h))
    }

    pub fn user_count(&self) -> usize {
        self.per_user.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_user.is_empty()
    }

    /// Total genre occurrences across all users.
    pub fn occurrence_count(&self) -> usize {
        self.per_user.values().map(UserHistory::total_occurrences).sum()
    }
}

/// Expands listening events into genre occurrences.
///
/// Each event contributes one occurrence of every genre of its artist at the
/// event's timestamp (`artist_genres[artist_id]`, as produced by
/// `GenreCatalog::resolve_artists`). Events of artists without genres
/// contribute nothing. Events need not arrive sorted; occurrences are stored
/// in ascending timestamp order per user, with equal timestamps kept in
/// input order.
pub fn build_genre_history(
    events: &[ListeningEvent],
    artist_genres: &[Vec<GenreId>],
) -> GenreHistoryStore {
    let mut per_user: BTreeMap<UserId, Vec<(i64, ArtistId)>> = BTreeMap::new();
    for ev in events {
        per_user
            .entry(ev.user)
            .or_default()
            .push((ev.timestamp, ev.artist));
    }
    let mut store = GenreHistoryStore::default();
    for (user, mut plays) in per_user {
        plays.sort_by_key(|&(ts, _)| ts);
        let mut history = UserHistory::default();
        for (ts, artist) in plays {
            for &genre in &artist_genres[artist.index()] {
                history.genres.entry(genre).or_default().push(ts);
            }
        }
        if !history.genres.is_empty() {
            store.per_user.insert(user, history);
        }
    }
    store
}
