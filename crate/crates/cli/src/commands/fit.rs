//! `fit-decay`: fit the power-law decay exponent per group from
//! relistening gaps, or record a configured override.

use serde::{Deserialize, Serialize};

use relisten_core::ingest::{Dataset, ListeningEvent, UserGroup};
use relisten_core::memory::{build_genre_history, fit_decay};
use relisten_core::UserId;

use crate::config::RunConfig;
use crate::store::{self, Layout};
use crate::CliError;

/// Persisted fit result. `provenance` is `fitted` for a regression result
/// and `override` for a configured exponent (regression fields absent).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub d: f64,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_count: Option<usize>,
}

pub fn group_events(ds: &Dataset, group: &UserGroup) -> Vec<ListeningEvent> {
    let members: std::collections::HashSet<UserId> = group
        .user_ids
        .iter()
        .filter_map(|name| ds.users.get(name).map(UserId))
        .collect();
    ds.events
        .iter()
        .filter(|ev| members.contains(&ev.user))
        .copied()
        .collect()
}

pub fn run(config: &RunConfig, only_group: Option<&str>) -> Result<(), CliError> {
    let layout = Layout::new(&config.out);
    let names = match only_group {
        Some(name) => vec![name.to_owned()],
        None => store::existing_groups(&layout)?,
    };
    let ds = store::load_dataset(&layout)?;
    let catalog = store::load_catalog(&layout)?;
    let artist_genres = catalog.resolve_artists(&ds.artists);

    store::create_dir(&layout.fits_dir())?;
    for name in &names {
        let mut group = store::load_group(&layout, name)?;
        let record = match config.decay_override.get(name) {
            Some(&d) => {
                println!("{name}: override d = {d}");
                FitRecord {
                    d,
                    provenance: "override".to_owned(),
                    slope: None,
                    intercept: None,
                    point_count: None,
                    bin_count: None,
                }
            }
            None => {
                let events = group_events(&ds, &group);
                let history = build_genre_history(&events, &artist_genres);
                let fit = fit_decay(&history, config.decay_bins).map_err(|e| {
                    match CliError::from(e) {
                        CliError::Degenerate(msg) => CliError::Degenerate(format!(
                            "{name}: {msg} (set decay_override.{name} in the config)"
                        )),
                        other => other,
                    }
                })?;
                println!(
                    "{name}: fitted d = {:.4} (slope {:.4}, {} points, {} bins)",
                    fit.d, fit.slope, fit.point_count, fit.bin_count
                );
                if fit.slope > 0.0 {
                    eprintln!(
                        "warning: {name}: relistening counts grow with gap length \
                         (positive slope); d = |slope| may not be meaningful"
                    );
                }
                FitRecord {
                    d: fit.d,
                    provenance: "fitted".to_owned(),
                    slope: Some(fit.slope),
                    intercept: Some(fit.intercept),
                    point_count: Some(fit.point_count),
                    bin_count: Some(fit.bin_count),
                }
            }
        };
        store::write_json(&layout.fit_file(name), &record)?;
        group.decay_d = Some(record.d);
        store::write_json(&layout.group_file(name), &group)?;
    }
    Ok(())
}
