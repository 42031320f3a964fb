//! Dual-field neighbor search: the same encoded query is run against PRATE
//! and NRATE and the two scores are subtracted per document, which restores
//! the sign information the prefix encoding split across the fields.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::baseline::{brute_knn, BaselineSimilarity};
use crate::dataset::{MeansTable, RatingsDataset};
use crate::encode::{encode_query, TermId};
use crate::index::{Field, IndexMode, InvertedIndex, SearchHit, SearchScratch};
use crate::score::ScorerConfig;

/// A neighbor (user or item) with its signed merged similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredNeighbor {
    pub neighbor_id: u64,
    pub similarity: f64,
}

/// Neighborhood size `k` and the expansion factor `m`: each single-field
/// search requests `k * m` hits so the merged set still has a good chance of
/// holding `k` documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnConfig {
    pub k: usize,
    pub expansion_factor: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 10, expansion_factor: 10 }
    }
}

impl KnnConfig {
    pub fn new(k: usize, expansion_factor: usize) -> Self {
        debug_assert!(k >= 1 && expansion_factor >= 1);
        KnnConfig { k, expansion_factor }
    }

    pub fn search_depth(&self) -> usize {
        self.k.saturating_mul(self.expansion_factor)
    }
}

/// Runs one query against both fields at the given depth.
pub fn dual_search(
    index: &InvertedIndex,
    query: &BTreeMap<TermId, u32>,
    depth: usize,
    scorer: &ScorerConfig,
    exclude: Option<u64>,
    scratch: &mut SearchScratch,
) -> (Vec<SearchHit>, Vec<SearchHit>) {
    let prate = index.search_with(Field::Prate, query, depth, scorer, exclude, scratch);
    let nrate = index.search_with(Field::Nrate, query, depth, scorer, exclude, scratch);
    (prate, nrate)
}

/// Merges the two hit lists by score subtraction. A document present in only
/// one list contributes 0 for the missing side, which is exactly the score
/// the engine assigns to a document with no term overlap. Results are sorted
/// by descending merged score, ties by ascending id, and truncated to `k`.
pub fn merge_dual(
    prate_hits: &[SearchHit],
    nrate_hits: &[SearchHit],
    k: usize,
) -> Vec<ScoredNeighbor> {
    let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
    for hit in prate_hits {
        *merged.entry(hit.doc_id).or_insert(0.0) += hit.score;
    }
    for hit in nrate_hits {
        *merged.entry(hit.doc_id).or_insert(0.0) -= hit.score;
    }
    let mut neighbors: Vec<ScoredNeighbor> = merged
        .into_iter()
        .map(|(neighbor_id, similarity)| ScoredNeighbor { neighbor_id, similarity })
        .collect();
    neighbors.sort_unstable_by(|a, b| {
        b.similarity.total_cmp(&a.similarity).then(a.neighbor_id.cmp(&b.neighbor_id))
    });
    neighbors.truncate(k);
    neighbors
}

/// Top-k neighbors of an already-encoded query.
pub fn knn_encoded(
    index: &InvertedIndex,
    query: &BTreeMap<TermId, u32>,
    config: &KnnConfig,
    scorer: &ScorerConfig,
    exclude_self: Option<u64>,
) -> Vec<ScoredNeighbor> {
    if query.is_empty() {
        return Vec::new();
    }
    let mut scratch = SearchScratch::default();
    let (prate, nrate) =
        dual_search(index, query, config.search_depth(), scorer, exclude_self, &mut scratch);
    merge_dual(&prate, &nrate, config.k)
}

/// Encodes a raw profile with the index's scale factor and returns its top-k
/// neighbors. An empty encoded query (every deviation below the quantization
/// step) yields an empty list, signalling the caller to fall back to the base
/// estimate.
pub fn knn(
    index: &InvertedIndex,
    query_profile: &[(u64, f64)],
    query_mean: f64,
    config: &KnnConfig,
    scorer: &ScorerConfig,
    exclude_self: Option<u64>,
) -> Vec<ScoredNeighbor> {
    let query = encode_query(query_profile, query_mean, index.scale_factor());
    knn_encoded(index, &query, config, scorer, exclude_self)
}

/// Exact top-k by adjusted cosine over all candidates; the oracle the index
/// path is checked against. Same sort and tie rules as [`knn`].
pub fn knn_exhaustive(
    dataset: &RatingsDataset,
    means: &MeansTable,
    query_id: u64,
    mode: IndexMode,
    k: usize,
) -> Vec<ScoredNeighbor> {
    brute_knn(dataset, means, query_id, mode, k, BaselineSimilarity::Acs)
}
