//! Shared test support: a seeded random-instance generator and brute-force
//! re-implementations of every predictor and metric, written directly from
//! their defining equations. The oracles never touch the library's stores,
//! neighbor indexes, or stability tricks, so agreement with them checks the
//! whole optimized path.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Cursor;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use relisten_core::baselines::ArtistNeighbors;
use relisten_core::ingest::{parse_events, Dataset, GenreCatalog, ParseMode};
use relisten_core::memory::AssociationIndex;
use relisten_core::prediction::PredictionList;
use relisten_core::{ArtistId, GenreId, UserId};

/// One randomized small instance: events parsed through the real ingestion
/// path, a random catalog, and query parameters.
pub struct Instance {
    pub ds: Dataset,
    pub catalog: GenreCatalog,
    pub artist_genres: Vec<Vec<GenreId>>,
    pub assoc: AssociationIndex,
    pub neighbors: ArtistNeighbors,
    pub decay: f64,
    pub k: usize,
    pub cf_neighbors: usize,
    pub top_artists: usize,
    pub ref_time: i64,
}

impl Instance {
    pub fn random(rng: &mut ChaCha8Rng, max_users: usize, max_genres: usize, max_events: usize) -> Self {
        let n_users = rng.gen_range(2..=max_users);
        let n_artists = rng.gen_range(3..=12);
        let n_genres = rng.gen_range(3..=max_genres);
        let n_events = rng.gen_range(10..=max_events);

        let mut tag_lines = String::new();
        let mut allowed = HashSet::new();
        for g in 0..n_genres {
            allowed.insert(format!("g{g:02}"));
        }
        for a in 0..n_artists {
            let n_tags = rng.gen_range(0..=3.min(n_genres));
            let mut genres: Vec<usize> = (0..n_genres).collect();
            genres.shuffle(rng);
            for &g in genres.iter().take(n_tags) {
                let freq = rng.gen_range(0.5..=1.0);
                tag_lines.push_str(&format!("a{a:02}\tg{g:02}\t{freq:.3}\n"));
            }
        }
        let (catalog, _) = GenreCatalog::build(
            Cursor::new(tag_lines.as_bytes()),
            0.5,
            &allowed,
            ParseMode::Strict,
        )
        .expect("generated tag lines are well formed");

        let mut event_lines = String::new();
        for _ in 0..n_events {
            let user = rng.gen_range(0..n_users);
            let artist = rng.gen_range(0..n_artists);
            let ts = rng.gen_range(1_000..=6_000);
            event_lines.push_str(&format!("u{user:02}\ta{artist:02}\t-\ttr\t{ts}\n"));
        }
        let ds = parse_events(Cursor::new(event_lines.as_bytes()), ParseMode::Strict)
            .expect("generated event lines are well formed");

        let artist_genres = catalog.resolve_artists(&ds.artists);
        let assoc = AssociationIndex::from_catalog(&catalog);
        let neighbors = ArtistNeighbors::from_catalog(&catalog);
        Instance {
            ds,
            catalog,
            artist_genres,
            assoc,
            neighbors,
            decay: rng.gen_range(0.3..=2.0),
            k: rng.gen_range(1..=10),
            cf_neighbors: *[2usize, 20].choose(rng).unwrap(),
            top_artists: *[2usize, 20].choose(rng).unwrap(),
            ref_time: 6_000 + rng.gen_range(1..=1_000),
        }
    }

    /// Users that have at least one genre occurrence, ascending.
    pub fn warm_users(&self) -> Vec<UserId> {
        let mut warm = BTreeSet::new();
        for ev in &self.ds.events {
            if !self.genres_of_artist(ev.artist).is_empty() {
                warm.insert(ev.user);
            }
        }
        warm.into_iter().collect()
    }

    /// Users with at least one play of any artist, ascending.
    pub fn active_users(&self) -> Vec<UserId> {
        let set: BTreeSet<UserId> = self.ds.events.iter().map(|ev| ev.user).collect();
        set.into_iter().collect()
    }

    /// Independent artist-to-genres resolution through the catalog's string
    /// interface.
    pub fn genres_of_artist(&self, artist: ArtistId) -> Vec<GenreId> {
        let name = self.ds.artists.name(artist.0);
        self.catalog
            .artist_assignments(name)
            .map(|list| list.iter().map(|&(g, _)| g).collect())
            .unwrap_or_default()
    }
}

// --- Brute-force predictor oracles -----------------------------------------

/// Sorts candidates score-descending, ascending genre id on ties. The
/// shared ranking convention of all predictors; oracles return the full
/// ranking and comparisons truncate.
pub fn rank(mut scored: Vec<(GenreId, f64)>) -> Vec<(GenreId, f64)> {
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored
}

/// Occurrence timestamps of `(user, genre)` straight from the raw events.
fn occurrences(inst: &Instance, user: UserId, genre: GenreId) -> Vec<i64> {
    let mut times: Vec<i64> = inst
        .ds
        .events
        .iter()
        .filter(|ev| ev.user == user && inst.genres_of_artist(ev.artist).contains(&genre))
        .map(|ev| ev.timestamp)
        .collect();
    times.sort_unstable();
    times
}

/// The user's distinct genres, ascending.
pub fn user_genres(inst: &Instance, user: UserId) -> Vec<GenreId> {
    let mut genres = BTreeSet::new();
    for ev in inst.ds.events.iter().filter(|ev| ev.user == user) {
        genres.extend(inst.genres_of_artist(ev.artist));
    }
    genres.into_iter().collect()
}

/// Base-level activation by direct evaluation of the defining sum.
pub fn bll_raw(inst: &Instance, user: UserId, genre: GenreId, ref_time: i64, d: f64) -> f64 {
    occurrences(inst, user, genre)
        .iter()
        .map(|&t| ((ref_time - t).max(1) as f64).powf(-d))
        .sum::<f64>()
        .ln()
}

/// Plain softmax without the max-subtraction stabilization.
pub fn softmax_plain(scores: &BTreeMap<GenreId, f64>) -> BTreeMap<GenreId, f64> {
    let total: f64 = scores.values().map(|&s| s.exp()).sum();
    scores.iter().map(|(&g, &s)| (g, s.exp() / total)).collect()
}

pub fn predict_bll(inst: &Instance, user: UserId, ref_time: i64) -> Vec<(GenreId, f64)> {
    let raw: BTreeMap<GenreId, f64> = user_genres(inst, user)
        .into_iter()
        .map(|g| (g, bll_raw(inst, user, g, ref_time, inst.decay)))
        .collect();
    rank(softmax_plain(&raw).into_iter().collect())
}

/// Jaccard association strength from explicit artist-name sets.
pub fn jaccard(inst: &Instance, c: GenreId, g: GenreId) -> f64 {
    let artists_with = |genre: GenreId| -> BTreeSet<&str> {
        inst.catalog
            .iter_artists()
            .filter(|(_, list)| list.iter().any(|&(x, _)| x == genre))
            .map(|(name, _)| name)
            .collect()
    };
    let a_c = artists_with(c);
    let a_g = artists_with(g);
    let union = a_c.union(&a_g).count();
    if union == 0 {
        return 0.0;
    }
    a_c.intersection(&a_g).count() as f64 / union as f64
}

pub fn predict_act(
    inst: &Instance,
    user: UserId,
    context_artist: Option<ArtistId>,
    ref_time: i64,
    w_c: f64,
) -> Vec<(GenreId, f64)> {
    let context_genres = context_artist
        .map(|a| inst.genres_of_artist(a))
        .unwrap_or_default();
    if context_genres.is_empty() {
        return predict_bll(inst, user, ref_time);
    }
    let raw: BTreeMap<GenreId, f64> = user_genres(inst, user)
        .into_iter()
        .map(|g| (g, bll_raw(inst, user, g, ref_time, inst.decay)))
        .collect();
    let base = softmax_plain(&raw);
    let activation: BTreeMap<GenreId, f64> = base
        .into_iter()
        .map(|(g, b)| {
            let spread: f64 = context_genres.iter().map(|&c| w_c * jaccard(inst, c, g)).sum();
            (g, b + spread)
        })
        .collect();
    rank(softmax_plain(&activation).into_iter().collect())
}

/// Genre assignment totals over all events: the mainstream ranking.
pub fn predict_top(inst: &Instance) -> Vec<(GenreId, f64)> {
    let mut totals: BTreeMap<GenreId, u64> = BTreeMap::new();
    for ev in &inst.ds.events {
        for g in inst.genres_of_artist(ev.artist) {
            *totals.entry(g).or_insert(0) += 1;
        }
    }
    rank(totals.into_iter().map(|(g, c)| (g, c as f64)).collect())
}

fn genre_counts(inst: &Instance, user: UserId) -> BTreeMap<GenreId, u64> {
    let mut counts = BTreeMap::new();
    for ev in inst.ds.events.iter().filter(|ev| ev.user == user) {
        for g in inst.genres_of_artist(ev.artist) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

pub fn predict_pop(inst: &Instance, user: UserId) -> Vec<(GenreId, f64)> {
    rank(
        genre_counts(inst, user)
            .into_iter()
            .map(|(g, c)| (g, c as f64))
            .collect(),
    )
}

pub fn predict_time(inst: &Instance, user: UserId, ref_time: i64) -> Vec<(GenreId, f64)> {
    let scored = user_genres(inst, user)
        .into_iter()
        .map(|g| {
            let last = *occurrences(inst, user, g).last().unwrap();
            (g, 1.0 / (1.0 + (ref_time - last).max(0) as f64))
        })
        .collect();
    rank(scored)
}

fn cosine_counts(a: &BTreeMap<GenreId, u64>, b: &BTreeMap<GenreId, u64>, n_genres: usize) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for g in 0..n_genres {
        let g = GenreId(g as u32);
        let x = a.get(&g).copied().unwrap_or(0) as f64;
        let y = b.get(&g).copied().unwrap_or(0) as f64;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = na.sqrt() * nb.sqrt();
    if denom > 0.0 {
        dot / denom
    } else {
        0.0
    }
}

pub fn predict_cf_user(inst: &Instance, user: UserId, n: usize) -> Vec<(GenreId, f64)> {
    let n_genres = inst.catalog.genre_count();
    let target = genre_counts(inst, user);
    let mut sims: Vec<(UserId, f64)> = inst
        .active_users()
        .into_iter()
        .filter(|&v| v != user)
        .map(|v| (v, cosine_counts(&target, &genre_counts(inst, v), n_genres)))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    sims.truncate(n);
    let mut scores: BTreeMap<GenreId, f64> = BTreeMap::new();
    for (v, sim) in sims {
        for (g, c) in genre_counts(inst, v) {
            *scores.entry(g).or_insert(0.0) += sim * c as f64;
        }
    }
    rank(scores.into_iter().collect())
}

pub fn predict_cf_item(
    inst: &Instance,
    user: UserId,
    top_artists: usize,
    n: usize,
) -> Vec<(GenreId, f64)> {
    // Top played artists: count descending, intern id ascending.
    let mut artist_counts: BTreeMap<ArtistId, u64> = BTreeMap::new();
    for ev in inst.ds.events.iter().filter(|ev| ev.user == user) {
        *artist_counts.entry(ev.artist).or_insert(0) += 1;
    }
    let mut played: Vec<(ArtistId, u64)> = artist_counts.into_iter().collect();
    played.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    played.truncate(top_artists);

    // The similar-artist universe: every catalog artist with genres.
    let mut universe: Vec<(&str, Vec<GenreId>)> = inst
        .catalog
        .iter_artists()
        .filter(|(_, list)| !list.is_empty())
        .map(|(name, list)| (name, list.iter().map(|&(g, _)| g).collect()))
        .collect();
    universe.sort_by_key(|&(name, _)| name);

    let binary_cos = |a: &[GenreId], b: &[GenreId]| -> f64 {
        let sa: BTreeSet<_> = a.iter().collect();
        let shared = b.iter().filter(|g| sa.contains(g)).count() as f64;
        shared / ((a.len() as f64).sqrt() * (b.len() as f64).sqrt())
    };

    let mut scores: BTreeMap<GenreId, f64> = BTreeMap::new();
    for (artist, _) in played {
        let genres = inst.genres_of_artist(artist);
        if genres.is_empty() {
            continue;
        }
        let my_name = inst.ds.artists.name(artist.0);
        let mut sims: Vec<(&str, &Vec<GenreId>, f64)> = universe
            .iter()
            .filter(|&&(name, _)| name != my_name)
            .map(|(name, list)| (*name, list, binary_cos(&genres, list)))
            .filter(|&(_, _, s)| s > 0.0)
            .collect();
        sims.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then_with(|| a.0.cmp(b.0)));
        sims.truncate(n);
        for (_, list, sim) in sims {
            for &g in list.iter() {
                *scores.entry(g).or_insert(0.0) += sim;
            }
        }
    }
    rank(scores.into_iter().collect())
}

// --- Brute-force metric oracle ----------------------------------------------

/// Metrics recomputed from their definitions with independent set logic.
pub struct OracleMetrics {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub f1_at: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
}

pub fn oracle_metrics(
    predicted: &[GenreId],
    relevant: &[GenreId],
    k_max: usize,
    f1_k: usize,
) -> OracleMetrics {
    let rel: BTreeSet<GenreId> = relevant.iter().copied().collect();
    let top: Vec<GenreId> = predicted.iter().take(k_max).copied().collect();
    let hits_at = |k: usize| top.iter().take(k).filter(|g| rel.contains(g)).count() as f64;

    let recall: Vec<f64> = (1..=k_max).map(|k| hits_at(k) / rel.len() as f64).collect();
    let precision: Vec<f64> = (1..=k_max).map(|k| hits_at(k) / k as f64).collect();

    let p = precision[f1_k - 1];
    let r = recall[f1_k - 1];
    let f1_at = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };

    let mrr = rel
        .iter()
        .map(|g| match top.iter().position(|x| x == g) {
            Some(i) => 1.0 / (i + 1) as f64,
            None => 0.0,
        })
        .sum::<f64>()
        / rel.len() as f64;

    let map = (1..=k_max)
        .map(|i| {
            let is_rel = top.get(i - 1).is_some_and(|g| rel.contains(g));
            if is_rel {
                hits_at(i) / i as f64
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / rel.len() as f64;

    let dcg: f64 = (1..=k_max)
        .map(|i| {
            let gain: f64 = if top.get(i - 1).is_some_and(|g| rel.contains(g)) {
                1.0
            } else {
                0.0
            };
            (2.0_f64.powf(gain) - 1.0) / (1.0 + i as f64).log2()
        })
        .sum();
    let idcg: f64 = (1..=rel.len().min(k_max))
        .map(|i| 1.0 / (1.0 + i as f64).log2())
        .sum();
    let ndcg = if idcg > 0.0 { dcg / idcg } else { 0.0 };

    OracleMetrics {
        recall,
        precision,
        f1_at,
        mrr,
        map,
        ndcg,
    }
}

// --- Assertions ---------------------------------------------------------------

/// Asserts that a top-k prediction agrees with the oracle's full ranking:
/// equal length, positional scores within `tol`, and at every rank the
/// chosen genre's oracle score within `tol` of the oracle's choice. The
/// last rule accepts permutations *within* mathematically tied blocks
/// (different but equally correct float pipelines may order exact ties
/// differently) while rejecting any genuine ranking difference.
pub fn assert_prediction_matches(
    label: &str,
    actual: &PredictionList,
    oracle_full: &[(GenreId, f64)],
    k: usize,
    tol: f64,
) {
    let expected = &oracle_full[..oracle_full.len().min(k)];
    assert_eq!(
        actual.len(),
        expected.len(),
        "{label}: prediction length mismatch"
    );
    let oracle_score: BTreeMap<GenreId, f64> = oracle_full.iter().copied().collect();
    for (i, (item, &(want_genre, want_score))) in
        actual.items.iter().zip(expected).enumerate()
    {
        assert!(
            (item.score - want_score).abs() <= tol,
            "{label}: rank {i} score {} vs oracle {want_score}",
            item.score
        );
        let own_oracle_score = oracle_score.get(&item.genre).unwrap_or_else(|| {
            panic!(
                "{label}: rank {i} genre {:?} is not an oracle candidate",
                item.genre
            )
        });
        assert!(
            (own_oracle_score - want_score).abs() <= tol,
            "{label}: rank {i} holds genre {:?} (oracle score {own_oracle_score}) \
             where the oracle ranks {want_genre:?} (score {want_score})",
            item.genre
        );
    }
}
