//! The five comparison predictors: group top genres, user- and item-based
//! collaborative filtering, personal popularity, and personal recency.
//!
//! All of them are trained on a group's training events only. Outputs are
//! deterministic: candidates are ranked score-descending with ascending id
//! as tie-break, and neighbor sets are cut the same way.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::ingest::{GenreCatalog, ListeningEvent};
use crate::memory::GenreHistoryStore;
use crate::prediction::PredictionList;
use crate::vocab::{ArtistId, GenreId, UserId, Vocab};

/// Similar artists as `(artist index, cosine)` pairs, best first.
pub type ScoredArtists = Vec<(u32, f64)>;

/// Per-user training counts: genre play counts (one per genre assignment of
/// each played artist) and artist play counts.
#[derive(Debug, Clone, Default)]
pub struct GroupModel {
    user_genre_counts: BTreeMap<UserId, BTreeMap<GenreId, u64>>,
    user_genre_norms: BTreeMap<UserId, f64>,
    user_artist_counts: BTreeMap<UserId, BTreeMap<ArtistId, u64>>,
    group_genre_totals: BTreeMap<GenreId, u64>,
}

/// Top-N most similar users for one target user.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub target: UserId,
    /// `(neighbor, cosine similarity)`, similarity non-increasing, target
    /// excluded, only strictly positive similarities.
    pub neighbors: Vec<(UserId, f64)>,
}

impl GroupModel {
    /// Tallies genre and artist play counts from training events.
    pub fn from_events(events: &[ListeningEvent], artist_genres: &[Vec<GenreId>]) -> Self {
        let mut model = GroupModel::default();
        for ev in events {
            *model
                .user_artist_counts
                .entry(ev.user)
                .or_default()
                .entry(ev.artist)
                .or_insert(0) += 1;
            for &genre in &artist_genres[ev.artist.index()] {
                *model
                    .user_genre_counts
                    .entry(ev.user)
                    .or_default()
                    .entry(genre)
                    .or_insert(0) += 1;
                *model.group_genre_totals.entry(genre).or_insert(0) += 1;
            }
        }
        model.user_genre_norms = model
            .user_genre_counts
            .iter()
            .map(|(&u, counts)| {
                let norm = counts
                    .values()
                    .map(|&c| (c as f64) * (c as f64))
                    .sum::<f64>()
                    .sqrt();
                (u, norm)
            })
            .collect();
        model
    }

    pub fn genre_counts(&self, user: UserId) -> Option<&BTreeMap<GenreId, u64>> {
        self.user_genre_counts.get(&user)
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_genre_counts.keys().copied()
    }

    fn require_genre_counts(&self, user: UserId) -> Result<&BTreeMap<GenreId, u64>> {
        self.user_genre_counts
            .get(&user)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| Error::ColdUser(format!("id {}", user.0)))
    }

    /// Group-level mainstream ranking: every user receives the group's
    /// genres ordered by total assignment count.
    pub fn predict_top(&self, user: UserId, k: usize) -> PredictionList {
        let scored = self
            .group_genre_totals
            .iter()
            .map(|(&g, &c)| (g, c as f64))
            .collect();
        PredictionList::from_scores(user, None, k, scored)
    }

    /// The user's own genres ranked by play count.
    pub fn predict_pop(&self, user: UserId, k: usize) -> Result<PredictionList> {
        let counts = self.require_genre_counts(user)?;
        let scored = counts.iter().map(|(&g, &c)| (g, c as f64)).collect();
        Ok(PredictionList::from_scores(user, None, k, scored))
    }

    /// The user's own genres ranked by recency of their last occurrence.
    /// Scores are `1 / (1 + age_seconds)` so fresher genres score higher;
    /// genres last heard in the same event tie and fall back to genre id.
    pub fn predict_time(
        &self,
        history: &GenreHistoryStore,
        user: UserId,
        ref_time: i64,
        k: usize,
    ) -> Result<PredictionList> {
        let user_history = history
            .user(user)
            .filter(|h| h.genre_count() > 0)
            .ok_or_else(|| Error::ColdUser(format!("id {}", user.0)))?;
        let scored = user_history
            .iter()
            .map(|(g, occurrences)| {
                let last = *occurrences.last().expect("history vectors are non-empty");
                let age = (ref_time - last).max(0) as f64;
                (g, 1.0 / (1.0 + age))
            })
            .collect();
        Ok(PredictionList::from_scores(user, None, k, scored))
    }

    /// Cosine similarity between two users' genre count vectors. Zero when
    /// either vector is empty.
    pub fn user_similarity(&self, a: UserId, b: UserId) -> f64 {
        let (Some(va), Some(vb)) = (self.user_genre_counts.get(&a), self.user_genre_counts.get(&b))
        else {
            return 0.0;
        };
        let (small, large) = if va.len() <= vb.len() { (va, vb) } else { (vb, va) };
        let mut dot = 0.0;
        for (g, &c) in small {
            if let Some(&c2) = large.get(g) {
                dot += (c as f64) * (c2 as f64);
            }
        }
        let denom = self.user_genre_norms[&a] * self.user_genre_norms[&b];
        if denom > 0.0 {
            dot / denom
        } else {
            0.0
        }
    }

    /// The `n` nearest users by genre-vector cosine, excluding the target
    /// and anyone with zero similarity. Ties are cut by ascending user id.
    pub fn user_neighbors(&self, target: UserId, n: usize) -> NeighborSet {
        let mut scored: Vec<(UserId, f64)> = self
            .user_genre_counts
            .keys()
            .filter(|&&v| v != target)
            .map(|&v| (v, self.user_similarity(target, v)))
            .filter(|&(_, sim)| sim > 0.0)
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("cosine similarities are finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(n);
        NeighborSet {
            target,
            neighbors: scored,
        }
    }

    /// User-based collaborative filtering: genres of the user's nearest
    /// neighbors, each weighted by the neighbor's similarity times how often
    /// the neighbor played the genre.
    pub fn predict_cf_user(&self, user: UserId, k: usize, n: usize) -> Result<PredictionList> {
        self.require_genre_counts(user)?;
        let neighbor_set = self.user_neighbors(user, n);
        let mut scores: BTreeMap<GenreId, f64> = BTreeMap::new();
        for &(v, sim) in &neighbor_set.neighbors {
            for (&g, &count) in &self.user_genre_counts[&v] {
                *scores.entry(g).or_insert(0.0) += sim * count as f64;
            }
        }
        Ok(PredictionList::from_scores(
            user,
            None,
            k,
            scores.into_iter().collect(),
        ))
    }

    /// The user's `top_artists` most played artists (count descending,
    /// ascending artist id on ties).
    pub fn top_artists(&self, user: UserId, top_artists: usize) -> Vec<ArtistId> {
        let Some(counts) = self.user_artist_counts.get(&user) else {
            return Vec::new();
        };
        let mut ranked: Vec<(ArtistId, u64)> = counts.iter().map(|(&a, &c)| (a, c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(top_artists);
        ranked.into_iter().map(|(a, _)| a).collect()
    }

    /// Item-based collaborative filtering: for each of the user's most
    /// played artists, find the most similar catalog artists by genre-vector
    /// cosine and accumulate each similar artist's similarity onto each of
    /// its genres.
    pub fn predict_cf_item(
        &self,
        similar: &ArtistNeighbors,
        artists: &Vocab,
        user: UserId,
        k: usize,
        top_artists: usize,
        n: usize,
    ) -> Result<PredictionList> {
        if self
            .user_artist_counts
            .get(&user)
            .is_none_or(BTreeMap::is_empty)
        {
            return Err(Error::ColdUser(format!("id {}", user.0)));
        }
        let mut scores: BTreeMap<GenreId, f64> = BTreeMap::new();
        for artist in self.top_artists(user, top_artists) {
            let name = artists.name(artist.0);
            for &(similar_artist, sim) in similar.neighbors(name, n).iter() {
                for &g in similar.genres_of(similar_artist) {
                    *scores.entry(g).or_insert(0.0) += sim;
                }
            }
        }
        Ok(PredictionList::from_scores(
            user,
            None,
            k,
            scores.into_iter().collect(),
        ))
    }
}

/// Artist-to-artist similarity over the catalog's genre assignments, with a
/// result cache. The candidate universe is every catalog artist with at
/// least one genre; similarity is the cosine of the binary genre vectors.
#[derive(Debug)]
pub struct ArtistNeighbors {
    /// Catalog artists with non-empty genre lists, sorted by name.
    names: Vec<String>,
    name_index: HashMap<String, u32>,
    genre_lists: Vec<Vec<GenreId>>,
    /// Inverted index: genre -> artists carrying it, ascending.
    by_genre: HashMap<GenreId, Vec<u32>>,
    cache: RwLock<HashMap<u32, Arc<ScoredArtists>>>,
}

impl ArtistNeighbors {
    pub fn from_catalog(catalog: &GenreCatalog) -> Self {
        let mut named: Vec<(String, Vec<GenreId>)> = catalog
            .iter_artists()
            .filter(|(_, assignments)| !assignments.is_empty())
            .map(|(name, assignments)| {
                (
                    name.to_owned(),
                    assignments.iter().map(|&(g, _)| g).collect(),
                )
            })
            .collect();
        named.sort_by(|a, b| a.0.cmp(&b.0));
        let mut names = Vec::with_capacity(named.len());
        let mut genre_lists = Vec::with_capacity(named.len());
        let mut name_index = HashMap::with_capacity(named.len());
        let mut by_genre: HashMap<GenreId, Vec<u32>> = HashMap::new();
        for (idx, (name, genres)) in named.into_iter().enumerate() {
            let idx = idx as u32;
            name_index.insert(name.clone(), idx);
            for &g in &genres {
                by_genre.entry(g).or_default().push(idx);
            }
            names.push(name);
            genre_lists.push(genres);
        }
        ArtistNeighbors {
            names,
            name_index,
            genre_lists,
            by_genre,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn artist_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, idx: u32) -> &str {
        &self.names[idx as usize]
    }

    pub fn genres_of(&self, idx: u32) -> &[GenreId] {
        &self.genre_lists[idx as usize]
    }

    /// Top-n most similar artists to `artist_name`, excluding the artist
    /// itself and zero similarities; ties cut by ascending name. Unknown or
    /// genre-less artists have no neighbors. Results are cached; the cache
    /// never changes returned values.
    pub fn neighbors(&self, artist_name: &str, n: usize) -> Arc<ScoredArtists> {
        let Some(&idx) = self.name_index.get(artist_name) else {
            return Arc::new(Vec::new());
        };
        if let Some(hit) = self.cache.read().expect("cache lock").get(&idx) {
            if hit.len() >= n {
                return Arc::new(hit.iter().take(n).copied().collect());
            }
        }
        let computed = Arc::new(self.compute_neighbors(idx, n));
        self.cache
            .write()
            .expect("cache lock")
            .insert(idx, Arc::clone(&computed));
        computed
    }

    fn compute_neighbors(&self, idx: u32, n: usize) -> ScoredArtists {
        let target_genres = &self.genre_lists[idx as usize];
        // Candidates share at least one genre; everyone else has cosine 0.
        let mut overlap: HashMap<u32, u32> = HashMap::new();
        for g in target_genres {
            for &other in &self.by_genre[g] {
                if other != idx {
                    *overlap.entry(other).or_insert(0) += 1;
                }
            }
        }
        let target_norm = (target_genres.len() as f64).sqrt();
        let mut scored: Vec<(u32, f64)> = overlap
            .into_iter()
            .map(|(other, shared)| {
                let other_norm = (self.genre_lists[other as usize].len() as f64).sqrt();
                (other, f64::from(shared) / (target_norm * other_norm))
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("cosine similarities are finite")
                .then_with(|| self.names[a.0 as usize].cmp(&self.names[b.0 as usize]))
        });
        scored.truncate(n);
        scored
    }
}
