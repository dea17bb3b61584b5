//! `ingest`: parse inputs, build the genre catalog, filter users by
//! listening volume, and persist the normalized dataset.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use relisten_core::ingest::{
    filter_users, parse_events, parse_profiles, serialize_events, serialize_profiles, Dataset,
    GenreCatalog, ParseMode,
};

use crate::config::RunConfig;
use crate::store::{self, IngestCounts, Layout, Manifest};
use crate::CliError;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let layout = Layout::new(&config.out);
    let mode = if config.strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    };

    let allowed = read_allowed_genres(config)?;
    println!("allowed genres: {}", allowed.len());

    let tags_path = config.tags_path()?;
    let (catalog, skipped_tags) = GenreCatalog::build(
        store::open_reader(tags_path)?,
        config.min_rel_freq,
        &allowed,
        mode,
    )?;
    println!(
        "catalog: {} artists, {} genres, {} assignments (skipped lines: {skipped_tags})",
        catalog.artist_count(),
        catalog.genre_count(),
        catalog.assignment_count()
    );

    let events_path = config.events_path()?;
    let ds = parse_events(store::open_reader(events_path)?, mode)?;
    if ds.events.is_empty() {
        return Err(CliError::Data(format!(
            "no events in {}",
            events_path.display()
        )));
    }
    println!(
        "events parsed: {} (skipped lines: {})",
        ds.events.len(),
        ds.skipped_lines
    );

    let eligible = filter_users(&ds.events, config.min_events, config.max_events);
    let users_total = count_users(&ds);
    println!(
        "users: {users_total} total, {} eligible ({}..={} events)",
        eligible.len(),
        config.min_events,
        config.max_events
    );
    if eligible.is_empty() {
        return Err(CliError::Data(format!(
            "no users with {}..={} events",
            config.min_events, config.max_events
        )));
    }

    let kept = Dataset {
        events: ds
            .events
            .iter()
            .filter(|ev| eligible.contains(&ev.user))
            .copied()
            .collect(),
        skipped_lines: ds.skipped_lines,
        users: ds.users,
        artists: ds.artists,
        albums: ds.albums,
        tracks: ds.tracks,
    };
    let artist_genres = catalog.resolve_artists(&kept.artists);
    let assignments_kept: usize = kept
        .events
        .iter()
        .map(|ev| artist_genres[ev.artist.index()].len())
        .sum();
    println!(
        "kept events: {} with {assignments_kept} genre assignments",
        kept.events.len()
    );

    store::create_dir(&layout.dataset_dir())?;
    let mut events_out = store::create_writer(&layout.events_file())?;
    serialize_events(&kept, &mut events_out)?;
    events_out
        .flush()
        .map_err(|e| store::data_err(&layout.events_file(), e))?;

    let mut inputs = BTreeMap::new();
    inputs.insert("events".to_owned(), store::sha256_of(events_path)?);
    inputs.insert("tags".to_owned(), store::sha256_of(tags_path)?);
    inputs.insert(
        "allowed_genres".to_owned(),
        store::sha256_of(config.allowed_genres_path()?)?,
    );
    if let Some(profiles_path) = &config.profiles {
        let (profiles, skipped) = parse_profiles(store::open_reader(profiles_path)?, mode)?;
        println!(
            "profiles parsed: {} (skipped lines: {skipped})",
            profiles.len()
        );
        let mut profile_out = store::create_writer(&layout.profiles_file())?;
        serialize_profiles(&profiles, &mut profile_out)?;
        profile_out
            .flush()
            .map_err(|e| store::data_err(&layout.profiles_file(), e))?;
        inputs.insert("profiles".to_owned(), store::sha256_of(profiles_path)?);
    }

    store::write_json(&layout.catalog_file(), &catalog.to_file())?;

    let manifest = Manifest {
        tool_version: store::tool_version(),
        config: config.clone(),
        inputs,
        counts: IngestCounts {
            parsed_events: ds.events.len(),
            skipped_lines: ds.skipped_lines,
            users_total,
            users_eligible: eligible.len(),
            events_kept: kept.events.len(),
            genre_assignments_kept: assignments_kept,
            catalog_genres: catalog.genre_count(),
            catalog_artists: catalog.artist_count(),
            catalog_assignments: catalog.assignment_count(),
            skipped_tag_lines: skipped_tags,
        },
    };
    store::write_json(&layout.manifest_file(), &manifest)?;
    println!("wrote {}", layout.manifest_file().display());
    Ok(())
}

fn count_users(ds: &Dataset) -> usize {
    let mut users: Vec<u32> = ds.events.iter().map(|ev| ev.user.0).collect();
    users.sort_unstable();
    users.dedup();
    users.len()
}

fn read_allowed_genres(config: &RunConfig) -> Result<HashSet<String>, CliError> {
    let path = config.allowed_genres_path()?;
    let reader = store::open_reader(path)?;
    let mut allowed = HashSet::new();
    for line in reader.lines() {
        let line = line.map_err(|e| store::data_err(path, e))?;
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            allowed.insert(trimmed.to_owned());
        }
    }
    if allowed.is_empty() {
        return Err(CliError::Data(format!(
            "{}: allowed-genre list is empty",
            path.display()
        )));
    }
    Ok(allowed)
}
