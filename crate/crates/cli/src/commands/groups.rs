//! `split-groups`: score mainstreaminess and write the low/medium/high
//! group manifests with their dataset statistics.

use std::collections::HashMap;

use relisten_core::ingest::{compute_mainstreaminess, split_groups};
use relisten_core::UserId;

use crate::config::RunConfig;
use crate::store::{self, Layout};
use crate::CliError;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let layout = Layout::new(&config.out);
    let ds = store::load_dataset(&layout)?;
    let catalog = store::load_catalog(&layout)?;

    let supplied: HashMap<UserId, f64> = store::load_profiles(&layout)?
        .iter()
        .filter_map(|p| {
            let id = ds.users.get(&p.user_id)?;
            Some((UserId(id), p.mainstreaminess?))
        })
        .collect();
    let scores = compute_mainstreaminess(&ds.events, &supplied, config.mainstreaminess, None);

    let mut sorted: Vec<f64> = scores.values().copied().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let median = sorted[sorted.len() / 2];
    println!(
        "scored {} users, median mainstreaminess {median:.3}",
        sorted.len()
    );

    let (mut low, mut med, mut high) = split_groups(&scores, config.group_size, &ds.users)?;
    store::create_dir(&layout.groups_dir())?;
    for group in [&mut low, &mut med, &mut high] {
        group.compute_stats(&ds, &catalog);
        store::write_json(&layout.group_file(&group.name), group)?;
        let s = &group.stats;
        println!(
            "{}: |U|={} |A|={} |G|={} |LE|={} |GA|={} avg MS={:.3}",
            group.name,
            s.users,
            s.artists,
            s.genres,
            s.events,
            s.genre_assignments,
            s.avg_mainstreaminess
        );
    }
    Ok(())
}
