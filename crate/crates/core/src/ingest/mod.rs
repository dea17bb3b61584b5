//! Parsing and preparation of listening-event logs.
//!
//! Input formats (all TSV, UTF-8, LF line endings, no header):
//!
//! * events: `user_id  artist_id  album_id  track_id  timestamp`
//! * profiles: `user_id  country  age  gender  mainstreaminess`, `-` for
//!   missing fields
//! * genre tags: `artist_id  tag  relative_frequency`
//!
//! Parsing is lenient by default: malformed lines are counted and skipped.
//! In strict mode the first malformed line aborts with its line number.

mod catalog;

pub use catalog::{AssignmentRecord, CatalogFile, GenreCatalog};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{ArtistId, UserId, Vocab};

/// One `(user, artist, album, track, timestamp)` record, with identifiers
/// interned against the vocabularies of the owning [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListeningEvent {
    pub user: UserId,
    pub artist: ArtistId,
    pub album: Option<u32>,
    pub track: u32,
    /// Seconds since the Unix epoch, UTC. Always positive.
    pub timestamp: i64,
}

/// Parsed event log plus the intern tables its events reference.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub users: Vocab,
    pub artists: Vocab,
    pub albums: Vocab,
    pub tracks: Vocab,
    pub events: Vec<ListeningEvent>,
    /// Malformed lines skipped during lenient parsing.
    pub skipped_lines: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Count and skip malformed lines.
    #[default]
    Lenient,
    /// Abort on the first malformed line.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub user_id: String,
    pub country: Option<String>,
    pub age: Option<u32>,
    pub gender: Option<Gender>,
    pub mainstreaminess: Option<f64>,
}

/// Reads lines as raw bytes so that lenient mode can skip invalid UTF-8
/// instead of aborting the whole stream.
pub(crate) fn for_each_line<R, F>(reader: R, mode: ParseMode, mut on_line: F) -> Result<u64>
where
    R: BufRead,
    F: FnMut(u64, &str) -> std::result::Result<(), String>,
{
    let mut reader = reader;
    let mut buf = Vec::new();
    let mut line_no = 0u64;
    let mut skipped = 0u64;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io("input stream", e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        if buf.is_empty() {
            continue;
        }
        let outcome = match std::str::from_utf8(&buf) {
            Ok(line) => on_line(line_no, line),
            Err(_) => Err("invalid UTF-8".to_owned()),
        };
        if let Err(message) = outcome {
            match mode {
                ParseMode::Strict => {
                    return Err(Error::Parse {
                        line: line_no,
                        message,
                    })
                }
                ParseMode::Lenient => skipped += 1,
            }
        }
    }
    Ok(skipped)
}

/// Parses a TSV event stream into a [`Dataset`].
///
/// Events are returned in file order. A line is malformed when it does not
/// have exactly five fields, when user or artist is empty, or when the
/// timestamp is not a positive integer. An album field of `-` is treated
/// as missing.
pub fn parse_events<R: BufRead>(reader: R, mode: ParseMode) -> Result<Dataset> {
    let mut ds = Dataset::default();
    let skipped = for_each_line(reader, mode, |_, line| {
        let mut fields = line.split('\t');
        let (user, artist, album, track, ts) = match (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) {
            (Some(u), Some(a), Some(al), Some(t), Some(ts), None) => (u, a, al, t, ts),
            _ => return Err("expected 5 tab-separated fields".to_owned()),
        };
        if user.is_empty() {
            return Err("empty user id".to_owned());
        }
        if artist.is_empty() {
            return Err("empty artist id".to_owned());
        }
        let timestamp: i64 = ts
            .parse()
            .map_err(|_| format!("invalid timestamp {ts:?}"))?;
        if timestamp <= 0 {
            return Err(format!("non-positive timestamp {timestamp}"));
        }
        let album = if album == "-" {
            None
        } else {
            Some(ds.albums.intern(album))
        };
        ds.events.push(ListeningEvent {
            user: UserId(ds.users.intern(user)),
            artist: ArtistId(ds.artists.intern(artist)),
            album,
            track: ds.tracks.intern(track),
            timestamp,
        });
        Ok(())
    })?;
    ds.skipped_lines = skipped;
    Ok(ds)
}

/// Writes events back to the TSV form accepted by [`parse_events`]. For a
/// lenient parse with zero skipped lines this reproduces every kept line's
/// fields exactly.
pub fn serialize_events<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    for ev in &ds.events {
        let album = match ev.album {
            Some(id) => ds.albums.name(id),
            None => "-",
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            ds.users.name(ev.user.0),
            ds.artists.name(ev.artist.0),
            album,
            ds.tracks.name(ev.track),
            ev.timestamp
        )
        .map_err(|e| Error::io("event output", e))?;
    }
    Ok(())
}

/// Parses the user-profile TSV. Returns profiles in file order.
pub fn parse_profiles<R: BufRead>(
    reader: R,
    mode: ParseMode,
) -> Result<(Vec<UserProfile>, u64)> {
    let mut profiles = Vec::new();
    let skipped = for_each_line(reader, mode, |_, line| {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err("expected 5 tab-separated fields".to_owned());
        }
        if fields[0].is_empty() {
            return Err("empty user id".to_owned());
        }
        let opt = |s: &str| -> Option<String> {
            if s.is_empty() || s == "-" {
                None
            } else {
                Some(s.to_owned())
            }
        };
        let age = match opt(fields[2]) {
            Some(s) => Some(s.parse::<u32>().map_err(|_| format!("invalid age {s:?}"))?),
            None => None,
        };
        let gender = opt(fields[3]).map(|s| match s.to_ascii_lowercase().as_str() {
            "m" | "male" => Gender::Male,
            "f" | "female" => Gender::Female,
            _ => Gender::Unknown,
        });
        let mainstreaminess = match opt(fields[4]) {
            Some(s) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| format!("invalid mainstreaminess {s:?}"))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("mainstreaminess {v} outside [0,1]"));
                }
                Some(v)
            }
            None => None,
        };
        profiles.push(UserProfile {
            user_id: fields[0].to_owned(),
            country: opt(fields[1]),
            age,
            gender,
            mainstreaminess,
        });
        Ok(())
    })?;
    Ok((profiles, skipped))
}

/// Writes profiles back to the TSV form accepted by [`parse_profiles`],
/// with `-` for missing fields.
pub fn serialize_profiles<W: Write>(profiles: &[UserProfile], mut out: W) -> Result<()> {
    for p in profiles {
        let gender = match p.gender {
            Some(Gender::Male) => "m",
            Some(Gender::Female) => "f",
            Some(Gender::Unknown) => "n",
            None => "-",
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            p.user_id,
            p.country.as_deref().unwrap_or("-"),
            p.age.map_or("-".to_owned(), |a| a.to_string()),
            gender,
            p.mainstreaminess.map_or("-".to_owned(), |m| m.to_string()),
        )
        .map_err(|e| Error::io("profile output", e))?;
    }
    Ok(())
}

/// Users whose event count lies in `[min_le, max_le]`, bounds inclusive.
pub fn filter_users(events: &[ListeningEvent], min_le: usize, max_le: usize) -> BTreeSet<UserId> {
    debug_assert!(min_le <= max_le);
    let mut counts: HashMap<UserId, usize> = HashMap::new();
    for ev in events {
        *counts.entry(ev.user).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .filter(|&(_, n)| n >= min_le && n <= max_le)
        .map(|(u, _)| u)
        .collect()
}

/// How mainstreaminess scores are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MainstreaminessMode {
    /// Cosine similarity between the user's artist play-count vector and the
    /// aggregate play-count vector over all users in the dataset.
    #[default]
    Computed,
    /// Use the score from the profile file when present, compute otherwise.
    PreferSupplied,
}

/// Scores each user's inclination to the dataset mainstream.
///
/// The computed score is the cosine similarity between the user's artist
/// play-count vector and the aggregate play-count vector of the whole
/// dataset (the user's own plays included). Scores lie in `[0, 1]`; a user
/// whose play-count distribution is proportional to the aggregate scores
/// exactly 1. The exact definition behind externally supplied scores is not
/// reproducible from event data, so `PreferSupplied` passes those through
/// untouched.
///
/// Only users present in `restrict` (when given) are scored; the aggregate
/// vector always spans all events. The result is independent of event order.
pub fn compute_mainstreaminess(
    events: &[ListeningEvent],
    supplied: &HashMap<UserId, f64>,
    mode: MainstreaminessMode,
    restrict: Option<&BTreeSet<UserId>>,
) -> BTreeMap<UserId, f64> {
    let mut per_user: HashMap<UserId, HashMap<ArtistId, u64>> = HashMap::new();
    let mut global: HashMap<ArtistId, u64> = HashMap::new();
    for ev in events {
        if restrict.is_none_or(|r| r.contains(&ev.user)) {
            *per_user
                .entry(ev.user)
                .or_default()
                .entry(ev.artist)
                .or_insert(0) += 1;
        }
        *global.entry(ev.artist).or_insert(0) += 1;
    }
    let global_norm = global
        .values()
        .map(|&c| (c as f64) * (c as f64))
        .sum::<f64>()
        .sqrt();

    let mut scores = BTreeMap::new();
    for (user, artist_counts) in per_user {
        if mode == MainstreaminessMode::PreferSupplied {
            if let Some(&s) = supplied.get(&user) {
                scores.insert(user, s);
                continue;
            }
        }
        // Sort by artist id so the summation order is reproducible.
        let mut counts: Vec<(ArtistId, u64)> = artist_counts.into_iter().collect();
        counts.sort_unstable_by_key(|&(a, _)| a);
        let mut dot = 0.0;
        let mut user_norm_sq = 0.0;
        for (artist, count) in counts {
            let c = count as f64;
            dot += c * global[&artist] as f64;
            user_norm_sq += c * c;
        }
        let denom = user_norm_sq.sqrt() * global_norm;
        let score = if denom > 0.0 { dot / denom } else { 0.0 };
        scores.insert(user, score.clamp(0.0, 1.0));
    }
    scores
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub users: usize,
    pub artists: usize,
    pub genres: usize,
    pub events: usize,
    pub genre_assignments: usize,
    pub avg_mainstreaminess: f64,
}

/// A named set of users selected by mainstreaminess rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGroup {
    pub name: String,
    /// Fitted decay exponent; `None` until the fit stage ran.
    pub decay_d: Option<f64>,
    /// Member user ids, ascending.
    pub user_ids: Vec<String>,
    pub stats: GroupStats,
}

impl UserGroup {
    fn from_members(name: &str, mut members: Vec<(String, f64)>) -> Self {
        let avg = if members.is_empty() {
            0.0
        } else {
            members.iter().map(|(_, s)| s).sum::<f64>() / members.len() as f64
        };
        members.sort_by(|a, b| a.0.cmp(&b.0));
        UserGroup {
            name: name.to_owned(),
            decay_d: None,
            user_ids: members.into_iter().map(|(id, _)| id).collect(),
            stats: GroupStats {
                avg_mainstreaminess: avg,
                ..GroupStats::default()
            },
        }
    }

    /// Fills the descriptive counters from the group's share of `ds`:
    /// distinct users/artists/genres, events, and genre assignments (one per
    /// genre of the played artist per event).
    pub fn compute_stats(&mut self, ds: &Dataset, catalog: &GenreCatalog) {
        let members: BTreeSet<UserId> = self
            .user_ids
            .iter()
            .filter_map(|name| ds.users.get(name).map(UserId))
            .collect();
        let genre_lists = catalog.resolve_artists(&ds.artists);
        let mut artists = BTreeSet::new();
        let mut genres = BTreeSet::new();
        let mut events = 0usize;
        let mut assignments = 0usize;
        for ev in &ds.events {
            if !members.contains(&ev.user) {
                continue;
            }
            events += 1;
            artists.insert(ev.artist);
            let list = &genre_lists[ev.artist.index()];
            assignments += list.len();
            genres.extend(list.iter().copied());
        }
        self.stats.users = self.user_ids.len();
        self.stats.artists = artists.len();
        self.stats.genres = genres.len();
        self.stats.events = events;
        self.stats.genre_assignments = assignments;
    }
}

/// Partitions scored users into low / medium / high mainstreaminess groups.
///
/// Users are sorted by ascending score, ties broken by ascending user id.
/// The low group takes the first `group_size` ranks, the high group the last
/// `group_size`, and the medium group the `group_size` ranks centered on the
/// median rank. With at least `3 * group_size` users the three groups are
/// always disjoint.
pub fn split_groups(
    scores: &BTreeMap<UserId, f64>,
    group_size: usize,
    users: &Vocab,
) -> Result<(UserGroup, UserGroup, UserGroup)> {
    if group_size == 0 {
        return Err(Error::InvalidArgument("group_size must be positive".into()));
    }
    if scores.len() < 3 * group_size {
        return Err(Error::NotEnoughUsers {
            required: 3 * group_size,
            available: scores.len(),
            group_count: 3,
            group_size,
        });
    }
    let mut ranked: Vec<(String, f64)> = scores
        .iter()
        .map(|(&u, &s)| (users.name(u.0).to_owned(), s))
        .collect();
    ranked.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("mainstreaminess scores must not be NaN")
            .then_with(|| a.0.cmp(&b.0))
    });
    let n = ranked.len();
    let med_start = n / 2 - group_size / 2;
    let low = UserGroup::from_members("LowMS", ranked[..group_size].to_vec());
    let med = UserGroup::from_members("MedMS", ranked[med_start..med_start + group_size].to_vec());
    let high = UserGroup::from_members("HighMS", ranked[n - group_size..].to_vec());
    Ok((low, med, high))
}
