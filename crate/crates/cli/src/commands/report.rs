//! `report`: render the metric CSV as an aligned text table, one block per
//! group with the four headline metrics as rows and algorithms as columns.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::config::RunConfig;
use crate::store::{self, Layout};
use crate::CliError;

const HEADLINE_METRICS: [&str; 4] = ["F1", "MRR", "MAP", "nDCG"];

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let layout = Layout::new(&config.out);
    let path = layout.metrics_file();
    let reader = store::open_reader(&path)?;

    // (group, metric@k) -> algorithm -> value, preserving file order.
    let mut groups: Vec<String> = Vec::new();
    let mut algorithms: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), BTreeMap<String, f64>> = BTreeMap::new();
    let mut metric_labels: Vec<String> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| store::data_err(&path, e))?;
        if i == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CliError::Data(format!(
                "{}: line {} has {} fields, expected 6",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        let (group, algorithm, metric, k, value) =
            (fields[0], fields[1], fields[2], fields[3], fields[4]);
        if !HEADLINE_METRICS.contains(&metric) {
            continue;
        }
        let value: f64 = value
            .parse()
            .map_err(|e| CliError::Data(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        let label = format!("{metric}@{k}");
        if !groups.contains(&group.to_owned()) {
            groups.push(group.to_owned());
        }
        if !algorithms.contains(&algorithm.to_owned()) {
            algorithms.push(algorithm.to_owned());
        }
        if !metric_labels.contains(&label) {
            metric_labels.push(label.clone());
        }
        cells
            .entry((group.to_owned(), label))
            .or_default()
            .insert(algorithm.to_owned(), value);
    }
    if groups.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no headline metric rows (run evaluate first)",
            path.display()
        )));
    }

    let group_width = groups
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(5)
        .max("group".len());
    let metric_width = metric_labels
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(6)
        .max("metric".len());
    let col = |s: &str| format!("{s:>8}");

    let mut header = format!("{:<group_width$}  {:<metric_width$}", "group", "metric");
    for algorithm in &algorithms {
        header.push_str(&col(algorithm));
    }
    println!("{header}");
    println!("{}", "-".repeat(header.len()));
    for group in &groups {
        for label in &metric_labels {
            let Some(row) = cells.get(&(group.clone(), label.clone())) else {
                continue;
            };
            let mut line = format!("{group:<group_width$}  {label:<metric_width$}");
            for algorithm in &algorithms {
                match row.get(algorithm) {
                    Some(v) => line.push_str(&col(&format!("{v:.3}"))),
                    None => line.push_str(&col("-")),
                }
            }
            println!("{line}");
        }
        println!();
    }
    Ok(())
}
