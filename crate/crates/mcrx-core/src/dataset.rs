//! Rating records, scales, and the sparse user x item rating matrix.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

/// Grid tolerance when checking that a rating sits on a scale step.
const STEP_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("invalid rating scale: {0}")]
    InvalidScale(&'static str),
    #[error("duplicate rating for user {user}, item {item}")]
    DuplicateRating { user: u64, item: u64 },
    #[error("rating {rating} for user {user}, item {item} is off the scale")]
    OffScale { user: u64, item: u64, rating: f64 },
}

/// One observed rating. The timestamp is carried through but takes no part in
/// any computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingRecord {
    pub user_id: u64,
    pub item_id: u64,
    pub rating: f64,
    pub timestamp: i64,
}

/// Closed rating range with a fixed step, e.g. 1..5 step 1 or 0.5..5 step 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    min: f64,
    max: f64,
    step: f64,
}

impl RatingScale {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, DatasetError> {
        if !(step > 0.0) {
            return Err(DatasetError::InvalidScale("step must be positive"));
        }
        if !(max >= min) {
            return Err(DatasetError::InvalidScale("max must be >= min"));
        }
        let span_steps = (max - min) / step;
        if (span_steps - libm::round(span_steps)).abs() > STEP_EPS {
            return Err(DatasetError::InvalidScale(
                "max - min must be an integer multiple of step",
            ));
        }
        Ok(RatingScale { min, max, step })
    }

    /// 1..5 step 1 (the MovieLens 100K grid).
    pub fn one_to_five() -> Self {
        RatingScale { min: 1.0, max: 5.0, step: 1.0 }
    }

    /// 0.5..5 step 0.5 (the MovieLens 1M/10M grid).
    pub fn half_to_five() -> Self {
        RatingScale { min: 0.5, max: 5.0, step: 0.5 }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Whether `rating` lies in `[min, max]` and on the step grid.
    pub fn contains(&self, rating: f64) -> bool {
        if !(rating >= self.min - STEP_EPS && rating <= self.max + STEP_EPS) {
            return false;
        }
        let steps = (rating - self.min) / self.step;
        (steps - libm::round(steps)).abs() <= STEP_EPS
    }
}

/// Sparse rating matrix with both row (per-user) and column (per-item) views.
///
/// Immutable after construction; profiles are sorted by the opposing id so
/// pairwise overlaps can be computed by linear merges.
#[derive(Debug, Clone)]
pub struct RatingsDataset {
    scale: RatingScale,
    records: Vec<RatingRecord>,
    by_user: BTreeMap<u64, Vec<(u64, f64)>>,
    by_item: BTreeMap<u64, Vec<(u64, f64)>>,
}

impl RatingsDataset {
    /// Builds the dataset, rejecting off-scale ratings and duplicate
    /// (user, item) pairs. Records are re-sorted by (user, item).
    pub fn from_records(
        mut records: Vec<RatingRecord>,
        scale: RatingScale,
    ) -> Result<Self, DatasetError> {
        records.sort_unstable_by(|a, b| {
            (a.user_id, a.item_id).cmp(&(b.user_id, b.item_id))
        });
        for pair in records.windows(2) {
            if pair[0].user_id == pair[1].user_id && pair[0].item_id == pair[1].item_id {
                return Err(DatasetError::DuplicateRating {
                    user: pair[0].user_id,
                    item: pair[0].item_id,
                });
            }
        }
        let mut by_user: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        let mut by_item: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        for rec in &records {
            if !scale.contains(rec.rating) {
                return Err(DatasetError::OffScale {
                    user: rec.user_id,
                    item: rec.item_id,
                    rating: rec.rating,
                });
            }
            by_user.entry(rec.user_id).or_default().push((rec.item_id, rec.rating));
            by_item.entry(rec.item_id).or_default().push((rec.user_id, rec.rating));
        }
        for profile in by_item.values_mut() {
            profile.sort_unstable_by_key(|&(id, _)| id);
        }
        // by_user profiles are already item-sorted thanks to the record sort.
        Ok(RatingsDataset { scale, records, by_user, by_item })
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    /// Number of ratings.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn user_count(&self) -> usize {
        self.by_user.len()
    }

    pub fn item_count(&self) -> usize {
        self.by_item.len()
    }

    pub fn users(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_user.keys().copied()
    }

    pub fn items(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_item.keys().copied()
    }

    /// All records, sorted by (user, item).
    pub fn records(&self) -> &[RatingRecord] {
        &self.records
    }

    /// A user's ratings as (item, rating), sorted by item id.
    pub fn user_profile(&self, user: u64) -> Option<&[(u64, f64)]> {
        self.by_user.get(&user).map(Vec::as_slice)
    }

    /// An item's ratings as (user, rating), sorted by user id.
    pub fn item_profile(&self, item: u64) -> Option<&[(u64, f64)]> {
        self.by_item.get(&item).map(Vec::as_slice)
    }

    pub fn rating(&self, user: u64, item: u64) -> Option<f64> {
        let profile = self.by_user.get(&user)?;
        profile
            .binary_search_by_key(&item, |&(id, _)| id)
            .ok()
            .map(|idx| profile[idx].1)
    }
}

/// Per-user and per-item arithmetic means over all of their ratings, plus the
/// grand mean used as the last-resort prediction fallback.
#[derive(Debug, Clone, Default)]
pub struct MeansTable {
    pub user_mean: BTreeMap<u64, f64>,
    pub item_mean: BTreeMap<u64, f64>,
    pub global_mean: f64,
}

/// Global (all-ratings) means per user and per item.
///
/// On an empty dataset the tables are empty and the global mean is 0.
pub fn compute_means(dataset: &RatingsDataset) -> MeansTable {
    let mut table = MeansTable::default();
    for (user, profile) in &dataset.by_user {
        let sum: f64 = profile.iter().map(|&(_, r)| r).sum();
        table.user_mean.insert(*user, sum / profile.len() as f64);
    }
    for (item, profile) in &dataset.by_item {
        let sum: f64 = profile.iter().map(|&(_, r)| r).sum();
        table.item_mean.insert(*item, sum / profile.len() as f64);
    }
    if !dataset.is_empty() {
        let total: f64 = dataset.records.iter().map(|r| r.rating).sum();
        table.global_mean = total / dataset.len() as f64;
    }
    table
}

/// Mean-centered rate: the signed deviation of a rating from a mean.
pub fn mcr(rating: f64, mean: f64) -> f64 {
    rating - mean
}
