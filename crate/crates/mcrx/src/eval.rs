//! The experiment harness: repeated seeded splits x modes x similarities x
//! neighborhood sizes, reporting MAE with dispersion over the splits.
//!
//! Leakage rules: per-user/per-item means, the index, and every neighbor
//! retrieval see the train split only; test records enter solely as
//! (query, truth) pairs. Cold-start queries fall through the predictor's
//! fallback chain, so MAE is always defined over the full test set.
//!
//! The per-field top-`k*m` hit lists of a deeper search are prefix-stable
//! (identical comparator, larger truncation), so one search pass at the
//! largest requested `k` serves every smaller `k` exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use mcrx_core::{
    brute_knn, compute_means, dual_search, encode_profile, encode_query, merge_dual,
    predict_item_based, predict_user_based, split, BaselineSimilarity, IndexMode,
    InvertedIndex, MeansTable, Prediction, PredictionSource, RatingsDataset, ScoredNeighbor,
    ScorerConfig, ScorerKind, SplitError,
};
use mcrx_core::index::SearchScratch;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("cannot emit an empty report")]
    EmptyReport,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The similarity axis of the sweep: five index-backed scorers plus the three
/// exact pairwise baselines computed by brute force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Similarity {
    Tf,
    TfIdf,
    Bm25,
    Dirichlet,
    JelinekMercer,
    Acs,
    Wacs,
    Pearson,
}

impl Similarity {
    pub const ALL: [Similarity; 8] = [
        Similarity::Tf,
        Similarity::TfIdf,
        Similarity::Bm25,
        Similarity::Dirichlet,
        Similarity::JelinekMercer,
        Similarity::Acs,
        Similarity::Wacs,
        Similarity::Pearson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Similarity::Tf => "tf",
            Similarity::TfIdf => "tfidf",
            Similarity::Bm25 => "bm25",
            Similarity::Dirichlet => "dirichlet",
            Similarity::JelinekMercer => "jelinek_mercer",
            Similarity::Acs => "acs",
            Similarity::Wacs => "wacs",
            Similarity::Pearson => "pearson",
        }
    }

    pub fn scorer_kind(self) -> Option<ScorerKind> {
        match self {
            Similarity::Tf => Some(ScorerKind::Tf),
            Similarity::TfIdf => Some(ScorerKind::TfIdf),
            Similarity::Bm25 => Some(ScorerKind::Bm25),
            Similarity::Dirichlet => Some(ScorerKind::Dirichlet),
            Similarity::JelinekMercer => Some(ScorerKind::JelinekMercer),
            _ => None,
        }
    }

    pub fn baseline_kind(self) -> Option<BaselineSimilarity> {
        match self {
            Similarity::Acs => Some(BaselineSimilarity::Acs),
            Similarity::Wacs => Some(BaselineSimilarity::Wacs),
            Similarity::Pearson => Some(BaselineSimilarity::Pearson),
            _ => None,
        }
    }

    pub fn is_index_backed(self) -> bool {
        self.scorer_kind().is_some()
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether MAE is computed on step-rounded predictions (the default) or on
/// clamped raw values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Rounded,
    Raw,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub modes: Vec<IndexMode>,
    pub similarities: Vec<Similarity>,
    /// Sorted ascending.
    pub k_values: Vec<usize>,
    /// The expansion factor m.
    pub expansion_factor: usize,
    pub scale_factor: u32,
    pub split_count: usize,
    pub train_fraction: f64,
    pub base_seed: u64,
    pub rounding: Rounding,
    /// Scorer parameters shared by every index-backed similarity in the sweep.
    pub scorer_params: ScorerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            modes: vec![IndexMode::UserBased, IndexMode::ItemBased],
            similarities: Similarity::ALL.to_vec(),
            k_values: vec![10, 40, 160],
            expansion_factor: 10,
            scale_factor: 100,
            split_count: 10,
            train_fraction: 0.8,
            base_seed: 42,
            rounding: Rounding::Rounded,
            scorer_params: ScorerConfig::default(),
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), EvalError> {
        let invalid = |msg: &str| Err(EvalError::InvalidConfig(msg.to_string()));
        if self.modes.is_empty() {
            return invalid("at least one mode is required");
        }
        if self.similarities.is_empty() {
            return invalid("at least one similarity is required");
        }
        if self.k_values.is_empty() || self.k_values.iter().any(|&k| k == 0) {
            return invalid("k values must be positive and nonempty");
        }
        if !self.k_values.windows(2).all(|w| w[0] < w[1]) {
            return invalid("k values must be strictly ascending");
        }
        if self.expansion_factor == 0 {
            return invalid("expansion factor must be positive");
        }
        if self.scale_factor == 0 {
            return invalid("scale factor must be positive");
        }
        if self.split_count == 0 {
            return invalid("at least one split is required");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return invalid("train fraction must lie strictly between 0 and 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub mode: IndexMode,
    pub similarity: Similarity,
    pub k: usize,
    pub mae_mean: f64,
    pub mae_std: f64,
    /// Mean fraction of test records predicted from a nonempty neighborhood.
    pub coverage: f64,
    pub splits: usize,
}

/// MAE of the mean-only predictor (user mean or item mean, falling back to
/// the global mean) over the same splits; the sanity reference every real
/// configuration is expected to beat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineRow {
    pub mode: IndexMode,
    pub mae_mean: f64,
    pub mae_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub mean_baselines: Vec<BaselineRow>,
    pub split_count: usize,
}

impl EvalReport {
    pub fn get(&self, mode: IndexMode, similarity: Similarity, k: usize) -> Option<&EvalRow> {
        self.rows
            .iter()
            .find(|r| r.mode == mode && r.similarity == similarity && r.k == k)
    }

    pub fn baseline(&self, mode: IndexMode) -> Option<&BaselineRow> {
        self.mean_baselines.iter().find(|b| b.mode == mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Tsv,
}

pub fn mode_name(mode: IndexMode) -> &'static str {
    match mode {
        IndexMode::UserBased => "user_based",
        IndexMode::ItemBased => "item_based",
    }
}

/// Encodes every profile of one orientation of the train matrix and builds
/// the index the harness (and the CLI) searches.
pub fn build_mode_index(
    train: &RatingsDataset,
    means: &MeansTable,
    mode: IndexMode,
    scale_factor: u32,
) -> InvertedIndex {
    let docs = match mode {
        IndexMode::UserBased => train
            .users()
            .map(|u| {
                encode_profile(
                    u,
                    train.user_profile(u).expect("listed user has a profile"),
                    means.user_mean[&u],
                    scale_factor,
                )
            })
            .collect(),
        IndexMode::ItemBased => train
            .items()
            .map(|i| {
                encode_profile(
                    i,
                    train.item_profile(i).expect("listed item has a profile"),
                    means.item_mean[&i],
                    scale_factor,
                )
            })
            .collect(),
    };
    InvertedIndex::build(docs, mode, scale_factor)
        .expect("profiles have unique ids and a single scale factor")
}

/// Per-(query, k) neighbor sets for an index-backed similarity. One dual
/// search at the deepest `k * m` serves every k: the per-field lists are
/// truncated to each k's own depth before merging, which reproduces exactly
/// what a fresh search at that depth would return.
fn index_neighbor_sets(
    index: &InvertedIndex,
    train: &RatingsDataset,
    means: &MeansTable,
    mode: IndexMode,
    key: u64,
    k_values: &[usize],
    expansion_factor: usize,
    scorer: &ScorerConfig,
    scratch: &mut SearchScratch,
) -> Vec<Vec<ScoredNeighbor>> {
    let empty = || vec![Vec::new(); k_values.len()];
    let (profile, mean) = match mode {
        IndexMode::UserBased => {
            (train.user_profile(key), means.user_mean.get(&key).copied())
        }
        IndexMode::ItemBased => {
            (train.item_profile(key), means.item_mean.get(&key).copied())
        }
    };
    let (Some(profile), Some(mean)) = (profile, mean) else {
        return empty();
    };
    let query = encode_query(profile, mean, index.scale_factor());
    if query.is_empty() {
        return empty();
    }
    let max_depth = k_values.last().unwrap() * expansion_factor;
    let (prate, nrate) = dual_search(index, &query, max_depth, scorer, Some(key), scratch);
    k_values
        .iter()
        .map(|&k| {
            let depth = k * expansion_factor;
            merge_dual(
                &prate[..depth.min(prate.len())],
                &nrate[..depth.min(nrate.len())],
                k,
            )
        })
        .collect()
}

fn predict(
    mode: IndexMode,
    key: u64,
    other: u64,
    neighbors: &[ScoredNeighbor],
    train: &RatingsDataset,
    means: &MeansTable,
) -> Prediction {
    match mode {
        IndexMode::UserBased => predict_user_based(key, other, neighbors, train, means),
        IndexMode::ItemBased => predict_item_based(other, key, neighbors, train, means),
    }
}

fn error_of(prediction: &Prediction, truth: f64, rounding: Rounding, train: &RatingsDataset) -> f64 {
    let scale = train.scale();
    let predicted = match rounding {
        Rounding::Rounded => prediction.rounded,
        Rounding::Raw => prediction.value.clamp(scale.min(), scale.max()),
    };
    (predicted - truth).abs()
}

/// (sum of absolute errors, count predicted with a nonempty neighborhood)
/// per requested k.
type GroupSums = Vec<(f64, usize)>;

fn add_sums(totals: &mut GroupSums, group: &GroupSums) {
    for (t, g) in totals.iter_mut().zip(group) {
        t.0 += g.0;
        t.1 += g.1;
    }
}

/// Runs the full sweep over `config.split_count` seeded splits of `dataset`.
pub fn run_experiment(
    dataset: &RatingsDataset,
    config: &ExperimentConfig,
) -> Result<EvalReport, EvalError> {
    config.validate()?;
    let k_count = config.k_values.len();
    let max_k = *config.k_values.last().unwrap();

    // per [mode][similarity][k] per-split MAE and coverage values
    let mut maes =
        vec![vec![vec![Vec::with_capacity(config.split_count); k_count]; config.similarities.len()]; config.modes.len()];
    let mut coverages =
        vec![vec![vec![Vec::with_capacity(config.split_count); k_count]; config.similarities.len()]; config.modes.len()];
    let mut baseline_maes = vec![Vec::with_capacity(config.split_count); config.modes.len()];

    for split_index in 0..config.split_count {
        let seed = config.base_seed + split_index as u64;
        let pair = split(dataset, config.train_fraction, seed)?;
        let train = &pair.train;
        let means = compute_means(train);
        let test_count = pair.test.len();
        if test_count == 0 {
            return Err(EvalError::InvalidConfig(format!(
                "split {split_index} produced an empty test set"
            )));
        }

        for (mode_index, &mode) in config.modes.iter().enumerate() {
            // Queries repeat across test records (one user rates many test
            // items and vice versa), so records are grouped by query id and
            // each neighborhood is retrieved once.
            let mut groups: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
            for record in &pair.test {
                let (key, other) = match mode {
                    IndexMode::UserBased => (record.user_id, record.item_id),
                    IndexMode::ItemBased => (record.item_id, record.user_id),
                };
                groups.entry(key).or_default().push((other, record.rating));
            }
            let groups: Vec<(u64, Vec<(u64, f64)>)> = groups.into_iter().collect();

            let baseline_sum: f64 = pair
                .test
                .par_iter()
                .map(|record| {
                    let (key, other) = match mode {
                        IndexMode::UserBased => (record.user_id, record.item_id),
                        IndexMode::ItemBased => (record.item_id, record.user_id),
                    };
                    let p = predict(mode, key, other, &[], train, &means);
                    error_of(&p, record.rating, config.rounding, train)
                })
                .sum();
            baseline_maes[mode_index].push(baseline_sum / test_count as f64);

            let index = config
                .similarities
                .iter()
                .any(|s| s.is_index_backed())
                .then(|| build_mode_index(train, &means, mode, config.scale_factor));

            for (sim_index, &similarity) in config.similarities.iter().enumerate() {
                let group_sums: Vec<GroupSums> = if let Some(kind) = similarity.scorer_kind()
                {
                    let index = index.as_ref().expect("index built for index-backed sims");
                    let scorer = ScorerConfig { kind, ..config.scorer_params };
                    groups
                        .par_iter()
                        .map_init(SearchScratch::default, |scratch, (key, tests)| {
                            let neighbor_sets = index_neighbor_sets(
                                index,
                                train,
                                &means,
                                mode,
                                *key,
                                &config.k_values,
                                config.expansion_factor,
                                &scorer,
                                scratch,
                            );
                            score_group(
                                mode, *key, tests, &neighbor_sets, train, &means, config,
                            )
                        })
                        .collect()
                } else {
                    let baseline = similarity.baseline_kind().expect("non-index similarity");
                    groups
                        .par_iter()
                        .map(|(key, tests)| {
                            let all =
                                brute_knn(train, &means, *key, mode, max_k, baseline);
                            let neighbor_sets: Vec<Vec<ScoredNeighbor>> = config
                                .k_values
                                .iter()
                                .map(|&k| all[..k.min(all.len())].to_vec())
                                .collect();
                            score_group(
                                mode, *key, tests, &neighbor_sets, train, &means, config,
                            )
                        })
                        .collect()
                };

                let mut totals: GroupSums = vec![(0.0, 0); k_count];
                for sums in &group_sums {
                    add_sums(&mut totals, sums);
                }
                for (k_index, &(err_sum, full)) in totals.iter().enumerate() {
                    maes[mode_index][sim_index][k_index].push(err_sum / test_count as f64);
                    coverages[mode_index][sim_index][k_index]
                        .push(full as f64 / test_count as f64);
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (mode_index, &mode) in config.modes.iter().enumerate() {
        for (sim_index, &similarity) in config.similarities.iter().enumerate() {
            for (k_index, &k) in config.k_values.iter().enumerate() {
                let values = &maes[mode_index][sim_index][k_index];
                rows.push(EvalRow {
                    mode,
                    similarity,
                    k,
                    mae_mean: mean(values),
                    mae_std: sample_std(values),
                    coverage: mean(&coverages[mode_index][sim_index][k_index]),
                    splits: config.split_count,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (mode_name(a.mode), a.similarity.name(), a.k)
            .cmp(&(mode_name(b.mode), b.similarity.name(), b.k))
    });
    let mut mean_baselines: Vec<BaselineRow> = config
        .modes
        .iter()
        .enumerate()
        .map(|(mode_index, &mode)| BaselineRow {
            mode,
            mae_mean: mean(&baseline_maes[mode_index]),
            mae_std: sample_std(&baseline_maes[mode_index]),
        })
        .collect();
    mean_baselines.sort_by_key(|b| mode_name(b.mode));
    Ok(EvalReport { rows, mean_baselines, split_count: config.split_count })
}

fn score_group(
    mode: IndexMode,
    key: u64,
    tests: &[(u64, f64)],
    neighbor_sets: &[Vec<ScoredNeighbor>],
    train: &RatingsDataset,
    means: &MeansTable,
    config: &ExperimentConfig,
) -> GroupSums {
    let mut sums: GroupSums = vec![(0.0, 0); neighbor_sets.len()];
    for &(other, truth) in tests {
        for (k_index, neighbors) in neighbor_sets.iter().enumerate() {
            let p = predict(mode, key, other, neighbors, train, means);
            sums[k_index].0 += error_of(&p, truth, config.rounding, train);
            if p.source == PredictionSource::Full {
                sums[k_index].1 += 1;
            }
        }
    }
    sums
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for fewer than two observations (the split
/// count is carried in the report so readers can form intervals themselves).
fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var =
        values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Writes `mode,similarity,k,mae_mean,mae_std,coverage,splits` rows at six
/// decimal places, sorted by (mode, similarity, k).
pub fn emit_report(
    report: &EvalReport,
    writer: &mut impl Write,
    format: ReportFormat,
) -> Result<(), EvalError> {
    if report.rows.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    let sep = match format {
        ReportFormat::Csv => ',',
        ReportFormat::Tsv => '\t',
    };
    writeln!(
        writer,
        "mode{sep}similarity{sep}k{sep}mae_mean{sep}mae_std{sep}coverage{sep}splits"
    )?;
    for row in &report.rows {
        writeln!(
            writer,
            "{}{sep}{}{sep}{}{sep}{:.6}{sep}{:.6}{sep}{:.6}{sep}{}",
            mode_name(row.mode),
            row.similarity.name(),
            row.k,
            row.mae_mean,
            row.mae_std,
            row.coverage,
            row.splits,
        )?;
    }
    Ok(())
}

pub fn emit_report_to_path(
    report: &EvalReport,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<(), EvalError> {
    let mut writer = BufWriter::new(File::create(path)?);
    emit_report(report, &mut writer, format)?;
    writer.flush()?;
    Ok(())
}
