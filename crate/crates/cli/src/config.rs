//! Run configuration: a TOML document plus command-line overrides.
//! Command line wins over the file; the file wins over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use relisten_core::ingest::MainstreaminessMode;

use crate::CliError;

/// Everything a pipeline run depends on. Serialized into the run manifest
/// so a run can be reproduced from its output directory alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Listening events TSV: user, artist, album, track, timestamp.
    pub events: Option<PathBuf>,
    /// Optional profiles TSV: user, country, age, gender, mainstreaminess.
    pub profiles: Option<PathBuf>,
    /// Genre tag TSV: artist, tag, relative frequency.
    pub tags: Option<PathBuf>,
    /// Allowed genre names, one per line.
    pub allowed_genres: Option<PathBuf>,
    /// Output directory for all pipeline stages.
    pub out: PathBuf,

    pub group_size: usize,
    pub min_events: usize,
    pub max_events: usize,
    pub min_rel_freq: f64,
    pub mainstreaminess: MainstreaminessMode,
    pub split_fraction: f64,
    pub k_max: usize,
    pub neighbors: usize,
    pub top_artists: usize,
    pub context_weight: f64,
    pub alpha: f64,
    pub decay_bins: usize,
    /// Per-group decay exponent overrides; skips fitting for that group.
    pub decay_override: BTreeMap<String, f64>,
    pub seed: u64,
    pub workers: usize,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            events: None,
            profiles: None,
            tags: None,
            allowed_genres: None,
            out: PathBuf::from("out"),
            group_size: 1_000,
            min_events: 6_000,
            max_events: 12_000,
            min_rel_freq: 0.5,
            mainstreaminess: MainstreaminessMode::Computed,
            split_fraction: 0.01,
            k_max: 10,
            neighbors: 20,
            top_artists: 20,
            context_weight: 1.0,
            alpha: 0.001,
            decay_bins: 100,
            decay_override: BTreeMap::new(),
            seed: 0,
            workers: 0,
            strict: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Usage(msg.to_owned()))
            }
        };
        check(
            self.split_fraction > 0.0 && self.split_fraction < 1.0,
            "split_fraction must be in (0,1)",
        )?;
        check(
            (0.0..=1.0).contains(&self.min_rel_freq),
            "min_rel_freq must be in [0,1]",
        )?;
        check(self.alpha > 0.0 && self.alpha < 1.0, "alpha must be in (0,1)")?;
        check(self.group_size > 0, "group_size must be positive")?;
        check(self.k_max > 0, "k_max must be positive")?;
        check(self.neighbors > 0, "neighbors must be positive")?;
        check(self.top_artists > 0, "top_artists must be positive")?;
        check(self.decay_bins >= 2, "decay_bins must be at least 2")?;
        check(
            self.min_events <= self.max_events,
            "min_events must not exceed max_events",
        )?;
        for (group, &d) in &self.decay_override {
            check(
                d > 0.0 && d.is_finite(),
                &format!("decay_override.{group} must be a positive number"),
            )?;
        }
        check(self.context_weight.is_finite(), "context_weight must be finite")
    }

    pub fn events_path(&self) -> Result<&Path, CliError> {
        self.events
            .as_deref()
            .ok_or_else(|| CliError::Usage("no events path configured (set `events`)".into()))
    }

    pub fn tags_path(&self) -> Result<&Path, CliError> {
        self.tags
            .as_deref()
            .ok_or_else(|| CliError::Usage("no tags path configured (set `tags`)".into()))
    }

    pub fn allowed_genres_path(&self) -> Result<&Path, CliError> {
        self.allowed_genres.as_deref().ok_or_else(|| {
            CliError::Usage("no allowed-genres path configured (set `allowed_genres`)".into())
        })
    }
}
