//! Genre-to-genre association strengths.
//!
//! Two genres are associated through the artists that carry both. The
//! strength is the Jaccard coefficient of their artist sets, so it is
//! symmetric, bounded in `[0, 1]`, and 1 on the diagonal for any genre with
//! at least one artist.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ingest::GenreCatalog;
use crate::vocab::GenreId;

/// Sparse pairwise Jaccard index over the catalog's genre->artist sets.
#[derive(Debug, Clone, Default)]
pub struct AssociationIndex {
    /// Per genre: number of artists the genre is assigned to.
    artist_counts: Vec<u32>,
    /// Co-assignment counts for genre pairs that share at least one artist,
    /// keyed by `(min, max)` genre id.
    co_counts: HashMap<(GenreId, GenreId), u32>,
}

impl AssociationIndex {
    pub fn from_catalog(catalog: &GenreCatalog) -> Self {
        let mut artist_counts = vec![0u32; catalog.genre_count()];
        let mut co_counts = HashMap::new();
        for (_, assignments) in catalog.iter_artists() {
            for (i, &(g1, _)) in assignments.iter().enumerate() {
                artist_counts[g1.index()] += 1;
                for &(g2, _) in &assignments[i + 1..] {
                    // Assignment lists are sorted, so g1 < g2.
                    *co_counts.entry((g1, g2)).or_insert(0) += 1;
                }
            }
        }
        AssociationIndex {
            artist_counts,
            co_counts,
        }
    }

    pub fn genre_count(&self) -> usize {
        self.artist_counts.len()
    }

    /// Number of artists assigned to `genre`.
    pub fn artist_count(&self, genre: GenreId) -> Option<u32> {
        self.artist_counts.get(genre.index()).copied()
    }

    /// Jaccard strength between two genres: shared artists over artists
    /// carrying at least one of the two. Zero when the union is empty.
    pub fn strength(&self, c: GenreId, g: GenreId) -> Result<f64> {
        let a_c = self
            .artist_count(c)
            .ok_or_else(|| Error::UnknownGenre(format!("id {}", c.0)))?;
        let a_g = self
            .artist_count(g)
            .ok_or_else(|| Error::UnknownGenre(format!("id {}", g.0)))?;
        let shared = if c == g {
            a_c
        } else {
            let key = if c < g { (c, g) } else { (g, c) };
            self.co_counts.get(&key).copied().unwrap_or(0)
        };
        let union = a_c + a_g - shared;
        if union == 0 {
            return Ok(0.0);
        }
        Ok(f64::from(shared) / f64::from(union))
    }
}
