//! Pipeline driver for listening-log genre modeling.
//!
//! Stages are persisted under the output directory so multi-million-event
//! runs can resume: `ingest` writes the normalized dataset, `split-groups`
//! the user groups, `fit-decay` the decay exponents, `evaluate` the metric
//! tables and prediction logs, and `report` renders the headline table.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 degenerate
//! computation.

mod commands;
mod config;
mod store;

use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::Degenerate(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl From<relisten_core::Error> for CliError {
    fn from(e: relisten_core::Error) -> Self {
        use relisten_core::Error as E;
        match e {
            E::DegenerateDecayFit { .. } | E::FlatDecayFit | E::DegenerateStatistic(_) => {
                CliError::Degenerate(e.to_string())
            }
            E::InvalidArgument(_) | E::UnknownAlgorithm(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "relisten",
    version,
    about = "Models music genre preferences from listening logs and runs the offline top-k evaluation."
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for all pipeline stages.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for the random debug predictor.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Abort on the first malformed input line instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,

    /// Listening-events TSV (user, artist, album, track, timestamp).
    #[arg(long, global = true)]
    events: Option<PathBuf>,
    /// User-profiles TSV (user, country, age, gender, mainstreaminess).
    #[arg(long, global = true)]
    profiles: Option<PathBuf>,
    /// Genre-tag TSV (artist, tag, relative frequency).
    #[arg(long, global = true)]
    tags: Option<PathBuf>,
    /// Allowed genre names, one per line.
    #[arg(long, global = true)]
    allowed_genres: Option<PathBuf>,
    /// Users per mainstreaminess group.
    #[arg(long, global = true)]
    group_size: Option<usize>,
    /// Minimum listening events per kept user.
    #[arg(long, global = true)]
    min_events: Option<usize>,
    /// Maximum listening events per kept user.
    #[arg(long, global = true)]
    max_events: Option<usize>,
    /// Minimum relative tag frequency kept in the genre catalog.
    #[arg(long, global = true)]
    min_rel_freq: Option<f64>,
    /// Share of each user's most recent events held out for testing.
    #[arg(long, global = true)]
    split_fraction: Option<f64>,
    /// Prediction list length.
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// Neighborhood size for both collaborative filtering predictors.
    #[arg(long, global = true)]
    neighbors: Option<usize>,
    /// Most played artists seeding item-based collaborative filtering.
    #[arg(long, global = true)]
    top_artists: Option<usize>,
    /// Significance level for the paired t-tests.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Logarithmic bins for the decay-exponent regression.
    #[arg(long, global = true)]
    decay_bins: Option<usize>,
    /// Per-group decay override, e.g. --decay-override LowMS=1.48.
    #[arg(long, global = true, value_parser = parse_override)]
    decay_override: Vec<(String, f64)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse inputs, filter users, and persist the normalized dataset.
    Ingest,
    /// Score mainstreaminess and write the three user-group manifests.
    SplitGroups,
    /// Fit the power-law decay exponent for each group.
    FitDecay {
        /// Only this group (default: every group manifest present).
        #[arg(long)]
        group: Option<String>,
    },
    /// Run the temporal-split evaluation and write metric tables.
    Evaluate {
        /// Only these groups (default: every group manifest present).
        #[arg(long)]
        group: Vec<String>,
        /// Comma-separated algorithms (default: top,cf-user,cf-item,pop,time,bll,act).
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
    },
    /// Render the metric table as aligned text.
    Report,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected GROUP=VALUE, got {s:?}"))?;
    let value: f64 = value
        .parse()
        .map_err(|_| format!("invalid decay value {value:?}"))?;
    Ok((name.to_owned(), value))
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! override_from {
        ($($field:ident),*) => {
            $(if let Some(v) = cli.$field.clone() { config.$field = v; })*
        };
    }
    override_from!(
        workers, seed, group_size, min_events, max_events, min_rel_freq, split_fraction, k_max,
        neighbors, top_artists, alpha, decay_bins
    );
    if let Some(out) = cli.out.clone() {
        config.out = out;
    }
    if let Some(events) = cli.events.clone() {
        config.events = Some(events);
    }
    if let Some(profiles) = cli.profiles.clone() {
        config.profiles = Some(profiles);
    }
    if let Some(tags) = cli.tags.clone() {
        config.tags = Some(tags);
    }
    if let Some(genres) = cli.allowed_genres.clone() {
        config.allowed_genres = Some(genres);
    }
    if cli.strict {
        config.strict = true;
    }
    for (group, d) in &cli.decay_override {
        config.decay_override.insert(group.clone(), *d);
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = effective_config(&cli)?;
    if config.workers > 0 {
        // Ignore the error if a pool already exists (tests set one up).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global();
    }
    match &cli.command {
        Command::Ingest => commands::ingest::run(&config),
        Command::SplitGroups => commands::groups::run(&config),
        Command::FitDecay { group } => commands::fit::run(&config, group.as_deref()),
        Command::Evaluate { group, algorithms } => {
            commands::evaluate::run(&config, group, algorithms)
        }
        Command::Report => commands::report::run(&config),
    }
}

fn main() {
    // Die quietly when stdout is closed early (e.g. piping report to head).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
