//! Artist-to-genre mapping built from weighted social tags.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{for_each_line, ParseMode};
use crate::vocab::{GenreId, Vocab};

/// Weighted genre assignments per artist after tag filtering.
///
/// Genre ids are dense indices into the sorted list of kept genre names, so
/// ascending `GenreId` order is ascending name order. Artists whose tags were
/// all filtered out are retained with an empty assignment list.
#[derive(Debug, Clone, Default)]
pub struct GenreCatalog {
    genres: Vec<String>,
    genre_index: HashMap<String, GenreId>,
    /// Artist name -> assignments sorted by genre id, deduplicated.
    assignments: HashMap<String, Vec<(GenreId, f64)>>,
}

impl GenreCatalog {
    /// Builds the catalog from `artist_id \t tag \t relative_frequency`
    /// lines. A tag survives when it is in `allowed_genres` and its relative
    /// frequency is at least `min_rel_freq`. Frequencies outside `[0, 1]`
    /// are malformed (skipped or aborting per `mode`). Duplicate
    /// `(artist, tag)` lines keep the highest frequency.
    ///
    /// Returns the catalog and the number of skipped lines.
    pub fn build<R: BufRead>(
        reader: R,
        min_rel_freq: f64,
        allowed_genres: &HashSet<String>,
        mode: ParseMode,
    ) -> Result<(Self, u64)> {
        if !(0.0..=1.0).contains(&min_rel_freq) {
            return Err(Error::InvalidArgument(format!(
                "min_rel_freq {min_rel_freq} outside [0,1]"
            )));
        }
        let mut kept: HashMap<String, HashMap<String, f64>> = HashMap::new();
        let skipped = for_each_line(reader, mode, |_, line| {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err("expected 3 tab-separated fields".to_owned());
            }
            let (artist, tag, freq_str) = (fields[0], fields[1], fields[2]);
            if artist.is_empty() {
                return Err("empty artist id".to_owned());
            }
            if tag.is_empty() {
                return Err("empty tag".to_owned());
            }
            let freq: f64 = freq_str
                .parse()
                .map_err(|_| format!("invalid relative frequency {freq_str:?}"))?;
            if !(0.0..=1.0).contains(&freq) {
                return Err(format!("relative frequency {freq} outside [0,1]"));
            }
            let artist_entry = kept.entry(artist.to_owned()).or_default();
            if freq >= min_rel_freq && allowed_genres.contains(tag) {
                let slot = artist_entry.entry(tag.to_owned()).or_insert(freq);
                if freq > *slot {
                    *slot = freq;
                }
            }
            Ok(())
        })?;

        let genre_names: BTreeSet<&str> = kept
            .values()
            .flat_map(|tags| tags.keys().map(String::as_str))
            .collect();
        let genres: Vec<String> = genre_names.into_iter().map(str::to_owned).collect();
        let genre_index: HashMap<String, GenreId> = genres
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), GenreId(i as u32)))
            .collect();
        let assignments = kept
            .into_iter()
            .map(|(artist, tags)| {
                let mut list: Vec<(GenreId, f64)> = tags
                    .into_iter()
                    .map(|(tag, freq)| (genre_index[&tag], freq))
                    .collect();
                list.sort_unstable_by_key(|&(g, _)| g);
                (artist, list)
            })
            .collect();
        Ok((
            GenreCatalog {
                genres,
                genre_index,
                assignments,
            },
            skipped,
        ))
    }

    pub fn genre_count(&self) -> usize {
        self.genres.len()
    }

    pub fn genre_name(&self, id: GenreId) -> &str {
        &self.genres[id.index()]
    }

    pub fn genre_names(&self) -> &[String] {
        &self.genres
    }

    pub fn genre_id(&self, name: &str) -> Option<GenreId> {
        self.genre_index.get(name).copied()
    }

    pub fn artist_count(&self) -> usize {
        self.assignments.len()
    }

    /// Assignments for one artist, sorted by genre id; `None` when the
    /// artist never appeared in the tag file.
    pub fn artist_assignments(&self, artist: &str) -> Option<&[(GenreId, f64)]> {
        self.assignments.get(artist).map(Vec::as_slice)
    }

    pub fn iter_artists(&self) -> impl Iterator<Item = (&str, &[(GenreId, f64)])> {
        self.assignments
            .iter()
            .map(|(a, list)| (a.as_str(), list.as_slice()))
    }

    /// Total number of `(artist, genre)` assignments kept.
    pub fn assignment_count(&self) -> usize {
        self.assignments.values().map(Vec::len).sum()
    }

    /// Genre lists per artist vocabulary handle: `result[artist_id]` is the
    /// sorted genre id list of that artist, empty for unmapped artists.
    pub fn resolve_artists(&self, artists: &Vocab) -> Vec<Vec<GenreId>> {
        let mut resolved = vec![Vec::new(); artists.len()];
        for (id, name) in artists.iter() {
            if let Some(list) = self.assignments.get(name) {
                resolved[id as usize] = list.iter().map(|&(g, _)| g).collect();
            }
        }
        resolved
    }

    pub fn to_file(&self) -> CatalogFile {
        CatalogFile {
            genres: self.genres.clone(),
            assignments: self
                .assignments
                .iter()
                .map(|(artist, list)| {
                    (
                        artist.clone(),
                        list.iter()
                            .map(|&(g, rel_freq)| AssignmentRecord {
                                genre: self.genres[g.index()].clone(),
                                rel_freq,
                            })
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn from_file(file: CatalogFile) -> Result<Self> {
        let genre_index: HashMap<String, GenreId> = file
            .genres
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), GenreId(i as u32)))
            .collect();
        let mut assignments = HashMap::with_capacity(file.assignments.len());
        for (artist, list) in file.assignments {
            let mut resolved = Vec::with_capacity(list.len());
            for record in list {
                let id = genre_index
                    .get(&record.genre)
                    .copied()
                    .ok_or_else(|| Error::UnknownGenre(record.genre.clone()))?;
                resolved.push((id, record.rel_freq));
            }
            resolved.sort_unstable_by_key(|&(g, _)| g);
            assignments.insert(artist, resolved);
        }
        Ok(GenreCatalog {
            genres: file.genres,
            genre_index,
            assignments,
        })
    }
}

/// Serialized catalog layout (deterministic key order).
#[derive(Debug, Serialize, Deserialize)]
pub struct CatalogFile {
    pub genres: Vec<String>,
    pub assignments: BTreeMap<String, Vec<AssignmentRecord>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub genre: String,
    pub rel_freq: f64,
}
