//! Layout of the output directory and persistence of pipeline stages.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use relisten_core::ingest::{
    parse_events, parse_profiles, CatalogFile, Dataset, GenreCatalog, ParseMode, UserGroup,
    UserProfile,
};

use crate::config::RunConfig;
use crate::CliError;

pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Layout {
            root: root.to_owned(),
        }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.root.join("dataset")
    }
    pub fn events_file(&self) -> PathBuf {
        self.dataset_dir().join("events.tsv")
    }
    pub fn profiles_file(&self) -> PathBuf {
        self.dataset_dir().join("profiles.tsv")
    }
    pub fn catalog_file(&self) -> PathBuf {
        self.dataset_dir().join("catalog.json")
    }
    pub fn manifest_file(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
    pub fn groups_dir(&self) -> PathBuf {
        self.root.join("groups")
    }
    pub fn group_file(&self, name: &str) -> PathBuf {
        self.groups_dir().join(format!("{name}.json"))
    }
    pub fn fits_dir(&self) -> PathBuf {
        self.root.join("fits")
    }
    pub fn fit_file(&self, name: &str) -> PathBuf {
        self.fits_dir().join(format!("{name}.json"))
    }
    pub fn eval_dir(&self) -> PathBuf {
        self.root.join("eval")
    }
    pub fn metrics_file(&self) -> PathBuf {
        self.eval_dir().join("metrics.csv")
    }
    pub fn curves_file(&self) -> PathBuf {
        self.eval_dir().join("curves.csv")
    }
    pub fn significance_file(&self) -> PathBuf {
        self.eval_dir().join("significance.csv")
    }
    pub fn predictions_dir(&self) -> PathBuf {
        self.eval_dir().join("predictions")
    }
    pub fn prediction_file(&self, group: &str, algorithm: &str) -> PathBuf {
        self.predictions_dir().join(format!("{group}_{algorithm}.jsonl"))
    }
}

pub fn data_err(context: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", context.display()))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| data_err(dir, e))
}

pub fn open_reader(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(File::open(path).map_err(|e| data_err(path, e))?))
}

pub fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| data_err(path, e))?,
    ))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create_writer(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| data_err(path, e))?;
    out.write_all(b"\n").map_err(|e| data_err(path, e))?;
    out.flush().map_err(|e| data_err(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let reader = open_reader(path)?;
    serde_json::from_reader(reader).map_err(|e| data_err(path, e))
}

pub fn sha256_of(path: &Path) -> Result<String, CliError> {
    let mut reader = open_reader(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf).map_err(|e| data_err(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Counters recorded by the ingest stage.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct IngestCounts {
    pub parsed_events: usize,
    pub skipped_lines: u64,
    pub users_total: usize,
    pub users_eligible: usize,
    pub events_kept: usize,
    pub genre_assignments_kept: usize,
    pub catalog_genres: usize,
    pub catalog_artists: usize,
    pub catalog_assignments: usize,
    pub skipped_tag_lines: u64,
}

/// The run manifest: with unchanged inputs and config, reruns reproduce it
/// (and every other output) byte for byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config: RunConfig,
    /// SHA-256 of each input file.
    pub inputs: BTreeMap<String, String>,
    pub counts: IngestCounts,
}

pub fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_owned()
}

/// Loads the persisted normalized dataset written by the ingest stage.
pub fn load_dataset(layout: &Layout) -> Result<Dataset, CliError> {
    let path = layout.events_file();
    let reader = open_reader(&path)?;
    let ds = parse_events(reader, ParseMode::Strict)
        .map_err(|e| CliError::Data(format!("{}: {e} (rerun ingest?)", path.display())))?;
    Ok(ds)
}

pub fn load_catalog(layout: &Layout) -> Result<GenreCatalog, CliError> {
    let file: CatalogFile = read_json(&layout.catalog_file())?;
    Ok(GenreCatalog::from_file(file)?)
}

pub fn load_profiles(layout: &Layout) -> Result<Vec<UserProfile>, CliError> {
    let path = layout.profiles_file();
    if !path.exists() {
        return Ok(Vec::new());
    }
    let (profiles, _) = parse_profiles(open_reader(&path)?, ParseMode::Strict)?;
    Ok(profiles)
}

pub fn load_group(layout: &Layout, name: &str) -> Result<UserGroup, CliError> {
    read_json(&layout.group_file(name))
}

/// Group manifests present on disk, in the canonical low/medium/high order
/// first, then any custom groups alphabetically.
pub fn existing_groups(layout: &Layout) -> Result<Vec<String>, CliError> {
    let dir = layout.groups_dir();
    if !dir.exists() {
        return Err(CliError::Data(format!(
            "{}: no group manifests (run split-groups first)",
            dir.display()
        )));
    }
    let mut names: Vec<String> = fs::read_dir(&dir)
        .map_err(|e| data_err(&dir, e))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().into_string().ok()?;
            name.strip_suffix(".json").map(str::to_owned)
        })
        .collect();
    names.sort_by_key(|name| {
        let canonical = ["LowMS", "MedMS", "HighMS"]
            .iter()
            .position(|&c| c == name)
            .unwrap_or(usize::MAX);
        (canonical, name.clone())
    });
    Ok(names)
}
