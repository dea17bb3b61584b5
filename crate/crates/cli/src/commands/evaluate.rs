//! `evaluate`: temporal split, per-group training, metric tables,
//! prediction logs, and the pairwise significance matrix.

use std::io::Write;
use std::str::FromStr;

use relisten_core::baselines::ArtistNeighbors;
use relisten_core::eval::{
    build_test_cases, paired_t_test, temporal_split, write_curve_csv, write_metrics_csv,
    write_prediction_log, write_significance_csv, Algorithm, EvalConfig, EvalOutcome,
    GroupEvaluator, PerUserMeans, SignificanceRow, PAPER_ALGORITHMS,
};
use relisten_core::memory::AssociationIndex;

use crate::commands::fit::{group_events, FitRecord};
use crate::config::RunConfig;
use crate::store::{self, Layout};
use crate::CliError;

pub fn run(config: &RunConfig, groups: &[String], algorithms: &[String]) -> Result<(), CliError> {
    let layout = Layout::new(&config.out);
    let group_names = if groups.is_empty() {
        store::existing_groups(&layout)?
    } else {
        groups.to_vec()
    };
    let algorithms = parse_algorithms(algorithms)?;

    let ds = store::load_dataset(&layout)?;
    let catalog = store::load_catalog(&layout)?;
    let artist_genres = catalog.resolve_artists(&ds.artists);
    let assoc = AssociationIndex::from_catalog(&catalog);
    let artist_neighbors = ArtistNeighbors::from_catalog(&catalog);

    let needs_decay = algorithms.iter().any(|a| a.needs_decay());
    let mut sections: Vec<(String, Vec<EvalOutcome>)> = Vec::new();
    let mut significance: Vec<SignificanceRow> = Vec::new();
    store::create_dir(&layout.predictions_dir())?;

    for name in &group_names {
        let group = store::load_group(&layout, name)?;
        let decay = match config.decay_override.get(name) {
            Some(&d) => Some(d),
            None if layout.fit_file(name).exists() => {
                Some(store::read_json::<FitRecord>(&layout.fit_file(name))?.d)
            }
            None => group.decay_d,
        };
        if needs_decay && decay.is_none() {
            return Err(CliError::Data(format!(
                "{name}: no decay exponent (run fit-decay or set decay_override)"
            )));
        }

        let events = group_events(&ds, &group);
        let split = temporal_split(&events, config.split_fraction)?;
        let (cases, unmappable) = build_test_cases(&split, &artist_genres);
        if cases.is_empty() {
            return Err(CliError::Data(format!(
                "{name}: no scorable test cases (unmappable targets: {unmappable})"
            )));
        }
        println!(
            "{name}: {} users split, {} test cases ({} unmappable targets dropped)",
            split.per_user.len(),
            cases.len(),
            unmappable
        );

        let eval_config = EvalConfig {
            k_max: config.k_max,
            neighbors: config.neighbors,
            top_artists: config.top_artists,
            decay,
            context_weight: config.context_weight,
            alpha: config.alpha,
            seed: config.seed,
        };
        let evaluator = GroupEvaluator::new(
            &split,
            &ds.artists,
            &artist_genres,
            &assoc,
            &artist_neighbors,
            eval_config,
        )?;

        let mut outcomes = Vec::new();
        for &algorithm in &algorithms {
            let outcome = evaluator.evaluate(algorithm, &cases)?;
            println!(
                "  {:<7} F1@{}={:.3} MRR@{}={:.3} MAP@{}={:.3} nDCG@{}={:.3} (empty: {})",
                outcome.algorithm.label(),
                evaluator.f1_k(),
                outcome.means.f1,
                config.k_max,
                outcome.means.mrr,
                config.k_max,
                outcome.means.map,
                config.k_max,
                outcome.means.ndcg,
                outcome.empty_predictions
            );
            let log_path = layout.prediction_file(name, outcome.algorithm.label());
            let mut log = store::create_writer(&log_path)?;
            write_prediction_log(
                &mut log,
                outcome.algorithm.label(),
                &cases,
                &outcome,
                &ds.users,
                &ds.artists,
                &catalog,
            )?;
            log.flush().map_err(|e| store::data_err(&log_path, e))?;
            outcomes.push(outcome);
        }

        significance.extend(pairwise_significance(name, &outcomes, config.alpha)?);
        sections.push((name.clone(), outcomes));
    }

    let borrowed: Vec<(&str, &[EvalOutcome])> = sections
        .iter()
        .map(|(name, outcomes)| (name.as_str(), outcomes.as_slice()))
        .collect();
    let f1_k = 5.min(config.k_max);
    let mut metrics = store::create_writer(&layout.metrics_file())?;
    write_metrics_csv(&mut metrics, &borrowed, f1_k)?;
    metrics
        .flush()
        .map_err(|e| store::data_err(&layout.metrics_file(), e))?;
    let mut curves = store::create_writer(&layout.curves_file())?;
    write_curve_csv(&mut curves, &borrowed)?;
    curves
        .flush()
        .map_err(|e| store::data_err(&layout.curves_file(), e))?;
    let mut sig = store::create_writer(&layout.significance_file())?;
    write_significance_csv(&mut sig, &significance)?;
    sig.flush()
        .map_err(|e| store::data_err(&layout.significance_file(), e))?;

    println!("wrote {}", layout.metrics_file().display());
    println!("wrote {}", layout.curves_file().display());
    println!("wrote {}", layout.significance_file().display());
    Ok(())
}

fn parse_algorithms(names: &[String]) -> Result<Vec<Algorithm>, CliError> {
    if names.is_empty() {
        return Ok(PAPER_ALGORITHMS.to_vec());
    }
    let mut algorithms = Vec::new();
    for name in names {
        let algorithm = Algorithm::from_str(name)?;
        if !algorithms.contains(&algorithm) {
            algorithms.push(algorithm);
        }
    }
    Ok(algorithms)
}

/// Paired t-tests over per-user means for every algorithm pair, on the four
/// headline metrics.
fn pairwise_significance(
    group: &str,
    outcomes: &[EvalOutcome],
    alpha: f64,
) -> Result<Vec<SignificanceRow>, CliError> {
    type Extract = fn(&PerUserMeans) -> f64;
    const METRICS: [(&str, Extract); 4] = [
        ("F1", |m| m.f1),
        ("MRR", |m| m.mrr),
        ("MAP", |m| m.map),
        ("nDCG", |m| m.ndcg),
    ];
    let mut rows = Vec::new();
    for (metric, extract) in METRICS {
        for (i, a) in outcomes.iter().enumerate() {
            for b in &outcomes[i + 1..] {
                let (xs, ys) = EvalOutcome::paired_user_means(a, b, extract);
                if xs.len() < 2 {
                    continue;
                }
                let report = paired_t_test(&xs, &ys, alpha)?;
                rows.push(SignificanceRow {
                    group: group.to_owned(),
                    metric,
                    algorithm_a: a.algorithm.label(),
                    algorithm_b: b.algorithm.label(),
                    report,
                });
            }
        }
    }
    Ok(rows)
}
