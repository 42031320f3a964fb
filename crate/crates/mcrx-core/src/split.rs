//! Seeded train/test partitioning of a rating dataset.

use alloc::vec::Vec;

use thiserror::Error;

use crate::dataset::{RatingRecord, RatingsDataset};
use crate::rng::SplitRng;

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("cannot split an empty dataset")]
    EmptyDataset,
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
}

/// A train/test partition of the rating triples. Test records keep their
/// timestamps; cold-start users/items in test are deliberately retained.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: RatingsDataset,
    pub test: Vec<RatingRecord>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Uniform random partition of the rating triples.
///
/// The shuffle is a Fisher-Yates pass driven by [`SplitRng`] (xoshiro256++
/// seeded through splitmix64), so a fixed seed reproduces the same split on
/// every run of the same build. The cut point is `round(n * train_fraction)`.
pub fn split(
    dataset: &RatingsDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitPair, SplitError> {
    if dataset.is_empty() {
        return Err(SplitError::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SplitError::InvalidFraction(train_fraction));
    }
    let records = dataset.records();
    let mut order: Vec<u32> = (0..records.len() as u32).collect();
    let mut rng = SplitRng::new(seed);
    rng.shuffle(&mut order);

    let cut = libm::round(records.len() as f64 * train_fraction) as usize;
    let train_records: Vec<RatingRecord> =
        order[..cut].iter().map(|&i| records[i as usize]).collect();
    let mut test: Vec<RatingRecord> =
        order[cut..].iter().map(|&i| records[i as usize]).collect();
    test.sort_unstable_by_key(|r| (r.user_id, r.item_id));

    // Re-validation cannot fail: the subset inherits scale conformance and
    // uniqueness from the parent dataset.
    let train = RatingsDataset::from_records(train_records, dataset.scale())
        .expect("train subset of a valid dataset is valid");
    Ok(SplitPair { train, test, seed, train_fraction })
}
