//! Temporal train/test splitting and test-case construction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ingest::ListeningEvent;
use crate::vocab::{ArtistId, GenreId, UserId};

/// One user's chronologically ordered train and test events.
#[derive(Debug, Clone, Default)]
pub struct UserSplit {
    pub train: Vec<ListeningEvent>,
    pub test: Vec<ListeningEvent>,
}

/// Per-user temporal split of an event log.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub per_user: BTreeMap<UserId, UserSplit>,
    pub fraction: f64,
    /// Users dropped for having fewer than two events.
    pub excluded_users: usize,
}

impl SplitDataset {
    pub fn train_events(&self) -> impl Iterator<Item = &ListeningEvent> {
        self.per_user.values().flat_map(|s| s.train.iter())
    }

    /// Every user's newest train event must not be newer than their oldest
    /// test event; violated only by construction bugs, checked in tests and
    /// before every evaluation run.
    pub fn boundary_holds(&self) -> bool {
        self.per_user.values().all(|s| {
            match (s.train.last(), s.test.first()) {
                (Some(tr), Some(te)) => tr.timestamp <= te.timestamp,
                // An empty side cannot violate the boundary.
                _ => true,
            }
        })
    }
}

/// Splits each user's events so that the most recent `fraction` (rounded up,
/// at least one event) form the test set.
///
/// Events are ordered per user by timestamp with input order as tie-break,
/// so equal timestamps split deterministically. Users with fewer than two
/// events are excluded and counted.
pub fn temporal_split(events: &[ListeningEvent], fraction: f64) -> Result<SplitDataset> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction {fraction} outside (0,1)"
        )));
    }
    let mut per_user: BTreeMap<UserId, Vec<ListeningEvent>> = BTreeMap::new();
    for ev in events {
        per_user.entry(ev.user).or_default().push(*ev);
    }
    let mut split = SplitDataset {
        per_user: BTreeMap::new(),
        fraction,
        excluded_users: 0,
    };
    for (user, mut stream) in per_user {
        if stream.len() < 2 {
            split.excluded_users += 1;
            continue;
        }
        stream.sort_by_key(|ev| ev.timestamp);
        let n_test = ((fraction * stream.len() as f64).ceil() as usize).max(1);
        let boundary = stream.len() - n_test;
        let test = stream.split_off(boundary);
        split.per_user.insert(
            user,
            UserSplit {
                train: stream,
                test,
            },
        );
    }
    Ok(split)
}

/// One test event turned into a scored query.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub user: UserId,
    pub target_artist: ArtistId,
    /// Catalog genres of the target artist, ascending; never empty.
    pub relevant: Vec<GenreId>,
    /// Artist of the event immediately preceding this one in the user's
    /// full chronological stream.
    pub context_artist: Option<ArtistId>,
    /// The test event's own timestamp.
    pub ref_time: i64,
}

/// Expands test events into test cases, in chronological order per user.
///
/// The context of a user's first test case is their final training artist;
/// afterwards the context advances through the test events themselves (the
/// trained model state is never touched). Cases whose target artist has no
/// catalog genres are dropped and counted.
///
/// Returns `(cases, unmappable_count)`.
pub fn build_test_cases(
    split: &SplitDataset,
    artist_genres: &[Vec<GenreId>],
) -> (Vec<TestCase>, usize) {
    let mut cases = Vec::new();
    let mut unmappable = 0usize;
    for (&user, user_split) in &split.per_user {
        let mut context: Option<ArtistId> = user_split.train.last().map(|ev| ev.artist);
        for ev in &user_split.test {
            let relevant = &artist_genres[ev.artist.index()];
            if relevant.is_empty() {
                unmappable += 1;
            } else {
                cases.push(TestCase {
                    user,
                    target_artist: ev.artist,
                    relevant: relevant.clone(),
                    context_artist: context,
                    ref_time: ev.timestamp,
                });
            }
            context = Some(ev.artist);
        }
    }
    (cases, unmappable)
}
