//! Rating prediction: a base estimate (the target's stored mean) plus a
//! neighborhood estimate (the similarity-weighted average of neighbor
//! deviations), followed by clamping and rounding to the rating scale.
//!
//! Fallback chain: full formula -> base estimate when no usable neighbor
//! remains (or all similarities are 0) -> global train mean when even the
//! base mean is unknown (cold-start user/item).

use crate::dataset::{MeansTable, RatingScale, RatingsDataset};
use crate::knn::ScoredNeighbor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionSource {
    /// Base + neighborhood estimate.
    Full,
    /// Mean-only fallback.
    BaseOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Unclamped, unrounded estimate.
    pub value: f64,
    /// `value` clamped into the scale and rounded to the nearest step.
    pub rounded: f64,
    pub source: PredictionSource,
    /// Neighbors that actually entered the sums.
    pub neighbor_count_used: usize,
}

/// Clamps into `[min, max]`, then rounds to the nearest step multiple.
/// Exact half-step ties round toward positive infinity.
pub fn round_to_scale(value: f64, scale: &RatingScale) -> f64 {
    let clamped = value.clamp(scale.min(), scale.max());
    let steps = (clamped - scale.min()) / scale.step();
    let max_steps = libm::round((scale.max() - scale.min()) / scale.step());
    let rounded_steps = libm::floor(steps + 0.5).clamp(0.0, max_steps);
    scale.min() + rounded_steps * scale.step()
}

fn weighted_estimate(
    base: f64,
    deviations: impl Iterator<Item = (f64, f64)>,
    scale: &RatingScale,
) -> Prediction {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut used = 0;
    for (similarity, deviation) in deviations {
        numerator += similarity * deviation;
        denominator += similarity.abs();
        used += 1;
    }
    if used == 0 || denominator == 0.0 {
        Prediction {
            value: base,
            rounded: round_to_scale(base, scale),
            source: PredictionSource::BaseOnly,
            neighbor_count_used: 0,
        }
    } else {
        let value = base + numerator / denominator;
        Prediction {
            value,
            rounded: round_to_scale(value, scale),
            source: PredictionSource::Full,
            neighbor_count_used: used,
        }
    }
}

/// Predicts user `user`'s rating of `item` from similar users. Neighbors
/// without a rating for `item` in `train` drop out of both sums.
pub fn predict_user_based(
    user: u64,
    item: u64,
    neighbors: &[ScoredNeighbor],
    train: &RatingsDataset,
    means: &MeansTable,
) -> Prediction {
    let base = means.user_mean.get(&user).copied().unwrap_or(means.global_mean);
    let scale = train.scale();
    let deviations = neighbors.iter().filter_map(|n| {
        let rating = train.rating(n.neighbor_id, item)?;
        let mean = means.user_mean.get(&n.neighbor_id)?;
        Some((n.similarity, rating - mean))
    });
    weighted_estimate(base, deviations, &scale)
}

/// Predicts user `user`'s rating of `item` from similar items. Neighbor
/// items the user has not rated drop out of both sums.
pub fn predict_item_based(
    user: u64,
    item: u64,
    neighbors: &[ScoredNeighbor],
    train: &RatingsDataset,
    means: &MeansTable,
) -> Prediction {
    let base = means.item_mean.get(&item).copied().unwrap_or(means.global_mean);
    let scale = train.scale();
    let deviations = neighbors.iter().filter_map(|n| {
        let rating = train.rating(user, n.neighbor_id)?;
        let mean = means.item_mean.get(&n.neighbor_id)?;
        Some((n.similarity, rating - mean))
    });
    weighted_estimate(base, deviations, &scale)
}
