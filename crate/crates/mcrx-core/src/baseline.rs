//! Exact pairwise similarities (Pearson, adjusted cosine, Jaccard-weighted
//! adjusted cosine) and brute-force kNN over all candidates. These are both
//! the classical comparison baselines and the oracles the index-backed path
//! is validated against.
//!
//! Pearson centers each side by its mean over the co-rated overlap only; the
//! adjusted cosine centers by the global (all-ratings) mean of each rater.
//! The two disagree in general, which is the entire reason the index can
//! store one precomputed mean per document and still be exact for ACS.

use alloc::vec::Vec;

use crate::dataset::{MeansTable, RatingsDataset};
use crate::index::IndexMode;
use crate::knn::ScoredNeighbor;

/// A pairwise similarity value. `degenerate` flags pairs carrying no signal
/// (empty or too-small overlap, or a zero-norm centered vector); the value is
/// then 0 so such pairs sort below any genuinely positive similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseScore {
    pub value: f64,
    pub degenerate: bool,
}

impl PairwiseScore {
    fn degenerate() -> Self {
        PairwiseScore { value: 0.0, degenerate: true }
    }

    fn of(value: f64) -> Self {
        PairwiseScore { value, degenerate: false }
    }
}

/// Walks two id-sorted profiles and yields co-rated (left, right) pairs.
fn for_each_overlap(
    left: &[(u64, f64)],
    right: &[(u64, f64)],
    mut visit: impl FnMut(f64, f64),
) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < left.len() && j < right.len() {
        let (lid, lr) = left[i];
        let (rid, rr) = right[j];
        if lid == rid {
            visit(lr, rr);
            count += 1;
            i += 1;
            j += 1;
        } else if lid < rid {
            i += 1;
        } else {
            j += 1;
        }
    }
    count
}

/// Pearson correlation over the co-rated overlap, each side centered by its
/// own overlap mean. Overlaps smaller than 2 cannot carry a correlation and
/// come back degenerate.
pub fn pearson(left: &[(u64, f64)], right: &[(u64, f64)]) -> PairwiseScore {
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for_each_overlap(left, right, |l, r| pairs.push((l, r)));
    if pairs.len() < 2 {
        return PairwiseScore::degenerate();
    }
    let n = pairs.len() as f64;
    let left_mean = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let right_mean = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut dot = 0.0;
    let mut left_sq = 0.0;
    let mut right_sq = 0.0;
    for (l, r) in pairs {
        let dl = l - left_mean;
        let dr = r - right_mean;
        dot += dl * dr;
        left_sq += dl * dl;
        right_sq += dr * dr;
    }
    if left_sq == 0.0 || right_sq == 0.0 {
        return PairwiseScore::degenerate();
    }
    PairwiseScore::of(dot / (libm::sqrt(left_sq) * libm::sqrt(right_sq)))
}

/// Adjusted cosine similarity over the co-rated overlap, each side centered
/// by its global mean (all ratings of that user/item, not just the overlap).
pub fn acs(
    left: &[(u64, f64)],
    right: &[(u64, f64)],
    left_global_mean: f64,
    right_global_mean: f64,
) -> PairwiseScore {
    let mut dot = 0.0;
    let mut left_sq = 0.0;
    let mut right_sq = 0.0;
    let overlap = for_each_overlap(left, right, |l, r| {
        let dl = l - left_global_mean;
        let dr = r - right_global_mean;
        dot += dl * dr;
        left_sq += dl * dl;
        right_sq += dr * dr;
    });
    if overlap == 0 || left_sq == 0.0 || right_sq == 0.0 {
        return PairwiseScore::degenerate();
    }
    PairwiseScore::of(dot / (libm::sqrt(left_sq) * libm::sqrt(right_sq)))
}

/// Jaccard coefficient of the two profiles' id sets; 0 when both are empty.
pub fn jaccard(left: &[(u64, f64)], right: &[(u64, f64)]) -> f64 {
    let overlap = for_each_overlap(left, right, |_, _| {});
    let union = left.len() + right.len() - overlap;
    if union == 0 {
        0.0
    } else {
        overlap as f64 / union as f64
    }
}

/// Adjusted cosine boosted by the Jaccard coefficient of the support sets.
pub fn wacs(
    left: &[(u64, f64)],
    right: &[(u64, f64)],
    left_global_mean: f64,
    right_global_mean: f64,
) -> PairwiseScore {
    let base = acs(left, right, left_global_mean, right_global_mean);
    PairwiseScore { value: base.value * jaccard(left, right), degenerate: base.degenerate }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineSimilarity {
    Pearson,
    Acs,
    Wacs,
}

/// One similarity evaluation under the chosen baseline. Means are ignored by
/// Pearson, which derives its own pairwise means.
pub fn pair_similarity(
    similarity: BaselineSimilarity,
    left: &[(u64, f64)],
    right: &[(u64, f64)],
    left_global_mean: f64,
    right_global_mean: f64,
) -> PairwiseScore {
    match similarity {
        BaselineSimilarity::Pearson => pearson(left, right),
        BaselineSimilarity::Acs => acs(left, right, left_global_mean, right_global_mean),
        BaselineSimilarity::Wacs => wacs(left, right, left_global_mean, right_global_mean),
    }
}

/// Exact top-k by scanning every candidate. The query itself is excluded;
/// candidates are scored, sorted by (similarity desc, id asc), and truncated.
/// No pairwise matrix is materialized. Returns an empty list when the query
/// id has no profile in the dataset.
pub fn brute_knn(
    dataset: &RatingsDataset,
    means: &MeansTable,
    query_id: u64,
    mode: IndexMode,
    k: usize,
    similarity: BaselineSimilarity,
) -> Vec<ScoredNeighbor> {
    let (query_profile, query_mean) = match mode {
        IndexMode::UserBased => (
            dataset.user_profile(query_id),
            means.user_mean.get(&query_id).copied(),
        ),
        IndexMode::ItemBased => (
            dataset.item_profile(query_id),
            means.item_mean.get(&query_id).copied(),
        ),
    };
    let (Some(query_profile), Some(query_mean)) = (query_profile, query_mean) else {
        return Vec::new();
    };
    let mut neighbors: Vec<ScoredNeighbor> = Vec::new();
    let mut visit = |candidate: u64, profile: &[(u64, f64)], candidate_mean: f64| {
        if candidate == query_id {
            return;
        }
        let score = pair_similarity(
            similarity,
            query_profile,
            profile,
            query_mean,
            candidate_mean,
        );
        neighbors.push(ScoredNeighbor { neighbor_id: candidate, similarity: score.value });
    };
    match mode {
        IndexMode::UserBased => {
            for user in dataset.users() {
                let profile = dataset.user_profile(user).expect("listed user has a profile");
                visit(user, profile, means.user_mean[&user]);
            }
        }
        IndexMode::ItemBased => {
            for item in dataset.items() {
                let profile = dataset.item_profile(item).expect("listed item has a profile");
                visit(item, profile, means.item_mean[&item]);
            }
        }
    }
    neighbors.sort_unstable_by(|a, b| {
        b.similarity.total_cmp(&a.similarity).then(a.neighbor_id.cmp(&b.neighbor_id))
    });
    neighbors.truncate(k);
    neighbors
}
