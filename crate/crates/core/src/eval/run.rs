//! Per-group evaluation runs: training on the train split, predicting every
//! test case, and aggregating metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{ArtistNeighbors, GroupModel};
use crate::error::{Error, Result};
use crate::eval::metrics::{case_metrics, CaseMetrics, F1_K};
use crate::eval::split::{SplitDataset, TestCase};
use crate::memory::{build_genre_history, AssociationIndex, GenreHistoryStore, MemoryModel};
use crate::prediction::{Prediction, PredictionList};
use crate::vocab::{GenreId, UserId, Vocab};

/// Predictors known to the evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Group-level top genres by assignment count.
    Top,
    /// User-based collaborative filtering.
    CfUser,
    /// Item-based (artist) collaborative filtering.
    CfItem,
    /// Personal genre popularity.
    Pop,
    /// Personal genre recency.
    Time,
    /// Base-level activation (frequency + recency with power-law decay).
    Bll,
    /// Full activation: base level plus contextual associative activation.
    Act,
    /// Debug: emits the relevant set itself; upper-bounds every metric.
    Oracle,
    /// Debug: a seeded random permutation of the user's genres.
    Random,
}

/// The seven predictors under comparison, in reporting order.
pub const PAPER_ALGORITHMS: [Algorithm; 7] = [
    Algorithm::Top,
    Algorithm::CfUser,
    Algorithm::CfItem,
    Algorithm::Pop,
    Algorithm::Time,
    Algorithm::Bll,
    Algorithm::Act,
];

pub const DEBUG_ALGORITHMS: [Algorithm; 2] = [Algorithm::Oracle, Algorithm::Random];

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Top => "TOP",
            Algorithm::CfUser => "CF_u",
            Algorithm::CfItem => "CF_i",
            Algorithm::Pop => "POP_u",
            Algorithm::Time => "TIME_u",
            Algorithm::Bll => "BLL_u",
            Algorithm::Act => "ACT_ua",
            Algorithm::Oracle => "ORACLE",
            Algorithm::Random => "RANDOM",
        }
    }

    pub fn needs_decay(self) -> bool {
        matches!(self, Algorithm::Bll | Algorithm::Act)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "top" => Ok(Algorithm::Top),
            "cf-user" | "cf_u" | "cfu" => Ok(Algorithm::CfUser),
            "cf-item" | "cf_i" | "cfi" => Ok(Algorithm::CfItem),
            "pop" | "pop_u" => Ok(Algorithm::Pop),
            "time" | "time_u" => Ok(Algorithm::Time),
            "bll" | "bll_u" => Ok(Algorithm::Bll),
            "act" | "act_ua" => Ok(Algorithm::Act),
            "oracle" => Ok(Algorithm::Oracle),
            "random" => Ok(Algorithm::Random),
            _ => Err(Error::UnknownAlgorithm(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Predictions are scored at k = 1..=k_max.
    pub k_max: usize,
    /// Neighborhood size for both collaborative filtering variants.
    pub neighbors: usize,
    /// How many of the user's most played artists seed item-based CF.
    pub top_artists: usize,
    /// Decay exponent for the activation predictors.
    pub decay: Option<f64>,
    /// Attentional weight of each context genre.
    pub context_weight: f64,
    /// Significance level for t-tests.
    pub alpha: f64,
    /// Seed for the random debug predictor.
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k_max: 10,
            neighbors: 20,
            top_artists: 20,
            decay: None,
            context_weight: 1.0,
            alpha: 0.001,
            seed: 0,
        }
    }
}

/// Pooled metric means over all test cases of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeans {
    /// Mean recall@k for k = 1..=k_max (index k-1).
    pub recall: Vec<f64>,
    /// Mean precision@k for k = 1..=k_max (index k-1).
    pub precision: Vec<f64>,
    pub f1: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
}

/// One user's mean metrics, the pairing unit for significance tests.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerUserMeans {
    pub cases: usize,
    pub f1: f64,
    pub mrr: f64,
    pub map: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub algorithm: Algorithm,
    pub n_cases: usize,
    /// Cases answered with an empty list (no neighbors, unmapped artists,
    /// or genre-less training history); they score zero hits.
    pub empty_predictions: usize,
    pub means: MetricMeans,
    pub per_user: BTreeMap<UserId, PerUserMeans>,
    /// One prediction per test case, in case order.
    pub predictions: Vec<PredictionList>,
}

impl EvalOutcome {
    /// Per-user mean vectors for two outcomes, aligned on their common
    /// users (ascending user id), for one of the four headline metrics.
    pub fn paired_user_means(
        a: &EvalOutcome,
        b: &EvalOutcome,
        metric: fn(&PerUserMeans) -> f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (user, ma) in &a.per_user {
            if let Some(mb) = b.per_user.get(user) {
                xs.push(metric(ma));
                ys.push(metric(mb));
            }
        }
        (xs, ys)
    }
}

/// Trains every predictor on a group's training events and evaluates them
/// on the group's test cases. The trained state is immutable; evaluation
/// never touches test data except through the advancing context pointer
/// recorded in each test case.
pub struct GroupEvaluator<'a> {
    artists: &'a Vocab,
    artist_genres: &'a [Vec<GenreId>],
    assoc: &'a AssociationIndex,
    artist_neighbors: &'a ArtistNeighbors,
    group_model: GroupModel,
    history: GenreHistoryStore,
    config: EvalConfig,
}

impl<'a> GroupEvaluator<'a> {
    pub fn new(
        split: &SplitDataset,
        artists: &'a Vocab,
        artist_genres: &'a [Vec<GenreId>],
        assoc: &'a AssociationIndex,
        artist_neighbors: &'a ArtistNeighbors,
        config: EvalConfig,
    ) -> Result<Self> {
        if !split.boundary_holds() {
            return Err(Error::InvalidArgument(
                "train/test boundary violated in split".into(),
            ));
        }
        let train: Vec<_> = split.train_events().copied().collect();
        let group_model = GroupModel::from_events(&train, artist_genres);
        let history = build_genre_history(&train, artist_genres);
        Ok(GroupEvaluator {
            artists,
            artist_genres,
            assoc,
            artist_neighbors,
            group_model,
            history,
            config,
        })
    }

    pub fn group_model(&self) -> &GroupModel {
        &self.group_model
    }

    pub fn history(&self) -> &GenreHistoryStore {
        &self.history
    }

    fn memory_model(&self) -> Result<MemoryModel<'_>> {
        let decay = self.config.decay.ok_or_else(|| {
            Error::InvalidArgument("decay exponent required for activation predictors".into())
        })?;
        Ok(
            MemoryModel::new(&self.history, self.assoc, self.artist_genres, decay)
                .with_context_weight(self.config.context_weight),
        )
    }

    /// Predicts the top `k_max` genres for one test case.
    pub fn predict(&self, algorithm: Algorithm, case: &TestCase) -> Result<PredictionList> {
        let k = self.config.k_max;
        match algorithm {
            Algorithm::Top => Ok(self.group_model.predict_top(case.user, k)),
            Algorithm::Pop => self.group_model.predict_pop(case.user, k),
            Algorithm::Time => {
                self.group_model
                    .predict_time(&self.history, case.user, case.ref_time, k)
            }
            Algorithm::CfUser => self
                .group_model
                .predict_cf_user(case.user, k, self.config.neighbors),
            Algorithm::CfItem => self.group_model.predict_cf_item(
                self.artist_neighbors,
                self.artists,
                case.user,
                k,
                self.config.top_artists,
                self.config.neighbors,
            ),
            Algorithm::Bll => self.memory_model()?.predict_bll(case.user, case.ref_time, k),
            Algorithm::Act => {
                self.memory_model()?
                    .predict_act(case.user, case.context_artist, case.ref_time, k)
            }
            Algorithm::Oracle => Ok(PredictionList::from_scores(
                case.user,
                case.context_artist,
                k,
                case.relevant.iter().map(|&g| (g, 1.0)).collect(),
            )),
            Algorithm::Random => self.predict_random(case),
        }
    }

    /// Random permutation of the user's genres, seeded per case so results
    /// do not depend on evaluation order.
    fn predict_random(&self, case: &TestCase) -> Result<PredictionList> {
        let history = self
            .history
            .user(case.user)
            .filter(|h| h.genre_count() > 0)
            .ok_or_else(|| Error::ColdUser(format!("id {}", case.user.0)))?;
        let mut genres: Vec<GenreId> = history.genres().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
            self.config.seed,
            case.user.0,
            case.target_artist.0,
            case.ref_time,
        ));
        genres.shuffle(&mut rng);
        genres.truncate(self.config.k_max);
        let n = genres.len() as f64;
        let items = genres
            .into_iter()
            .enumerate()
            .map(|(i, genre)| Prediction {
                genre,
                score: (n - i as f64) / n,
            })
            .collect();
        Ok(PredictionList {
            user: case.user,
            context_artist: case.context_artist,
            k: self.config.k_max,
            items,
        })
    }

    /// Runs one predictor over all test cases.
    ///
    /// Cases are scored independently (in parallel when a rayon pool is
    /// active) and aggregated in case order, so results are identical for
    /// any worker count. Cold-user predictions degrade to empty lists and
    /// score zero hits.
    pub fn evaluate(&self, algorithm: Algorithm, cases: &[TestCase]) -> Result<EvalOutcome> {
        if cases.is_empty() {
            return Err(Error::InvalidArgument("no test cases to evaluate".into()));
        }
        if algorithm.needs_decay() && self.config.decay.is_none() {
            return Err(Error::InvalidArgument(
                "decay exponent required for activation predictors".into(),
            ));
        }
        let k_max = self.config.k_max;
        let scored: Vec<(PredictionList, CaseMetrics)> = cases
            .par_iter()
            .map(|case| {
                let prediction = match self.predict(algorithm, case) {
                    Ok(p) => p,
                    Err(Error::ColdUser(_)) => PredictionList {
                        user: case.user,
                        context_artist: case.context_artist,
                        k: k_max,
                        items: Vec::new(),
                    },
                    Err(e) => return Err(e),
                };
                let predicted: Vec<GenreId> = prediction.genres().collect();
                let m = case_metrics(&predicted, &case.relevant, k_max);
                Ok((prediction, m))
            })
            .collect::<Result<_>>()?;

        let n = cases.len();
        let mut recall_sum = vec![0.0; k_max];
        let mut precision_sum = vec![0.0; k_max];
        let mut f1_sum = 0.0;
        let mut mrr_sum = 0.0;
        let mut map_sum = 0.0;
        let mut ndcg_sum = 0.0;
        let mut empty = 0usize;
        let mut per_user: BTreeMap<UserId, PerUserMeans> = BTreeMap::new();
        let mut predictions = Vec::with_capacity(n);
        for (case, (prediction, m)) in cases.iter().zip(scored) {
            for k in 0..k_max {
                recall_sum[k] += m.recall[k];
                precision_sum[k] += m.precision[k];
            }
            f1_sum += m.f1;
            mrr_sum += m.mrr;
            map_sum += m.map;
            ndcg_sum += m.ndcg;
            if prediction.is_empty() {
                empty += 1;
            }
            let entry = per_user.entry(case.user).or_default();
            entry.cases += 1;
            entry.f1 += m.f1;
            entry.mrr += m.mrr;
            entry.map += m.map;
            entry.ndcg += m.ndcg;
            predictions.push(prediction);
        }
        for means in per_user.values_mut() {
            let c = means.cases as f64;
            means.f1 /= c;
            means.mrr /= c;
            means.map /= c;
            means.ndcg /= c;
        }
        let nf = n as f64;
        Ok(EvalOutcome {
            algorithm,
            n_cases: n,
            empty_predictions: empty,
            means: MetricMeans {
                recall: recall_sum.into_iter().map(|s| s / nf).collect(),
                precision: precision_sum.into_iter().map(|s| s / nf).collect(),
                f1: f1_sum / nf,
                mrr: mrr_sum / nf,
                map: map_sum / nf,
                ndcg: ndcg_sum / nf,
            },
            per_user,
            predictions,
        })
    }

    /// F1 is reported at this cutoff (5, or `k_max` when smaller).
    pub fn f1_k(&self) -> usize {
        F1_K.min(self.config.k_max)
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }
}

fn mix_seed(seed: u64, user: u32, artist: u32, ref_time: i64) -> u64 {
    // splitmix64 over the packed case identity.
    let mut x = seed
        ^ (u64::from(user) << 32)
        ^ u64::from(artist)
        ^ (ref_time as u64).rotate_left(17);
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}
