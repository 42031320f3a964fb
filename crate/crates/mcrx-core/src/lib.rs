//! Memory-based collaborative filtering on top of an embedded inverted index.
//!
//! Rating profiles (a user's row or an item's column of the rating matrix) are
//! mean-centered, quantized to integer term frequencies, and stored as two-field
//! documents. Running the same query against both fields and subtracting the
//! scores recovers the signed adjusted-cosine numerator, so a plain top-k text
//! search doubles as a nearest-neighbor search over raters.
//!
//! The crate is `no_std` (with `alloc`); everything that touches files — dataset
//! ingestion, index persistence, the CLI — lives in the companion `mcrx` crate.
//!
//! Module map:
//! - [`dataset`]: rating records, scales, the sparse rating matrix, means.
//! - [`split`]: seeded train/test partitioning.
//! - [`encode`]: profile -> two-field term-frequency document.
//! - [`index`]: postings, field-scoped top-n search.
//! - [`score`]: tf / tf-idf / BM25 / Dirichlet / Jelinek-Mercer scorers.
//! - [`knn`]: the dual-field query-merge neighbor search.
//! - [`predict`]: base + neighborhood rating estimate.
//! - [`baseline`]: exact Pearson / ACS / wACS and brute-force kNN oracles.
//! - [`metrics`]: mean absolute error.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod dataset;
pub mod encode;
pub mod index;
pub mod knn;
pub mod metrics;
pub mod predict;
pub mod rng;
pub mod score;
pub mod split;

pub use baseline::{acs, brute_knn, jaccard, pearson, wacs, BaselineSimilarity, PairwiseScore};
pub use dataset::{
    compute_means, mcr, MeansTable, RatingRecord, RatingScale, RatingsDataset, DatasetError,
};
pub use encode::{encode_profile, encode_query, flip_query, EncodedDocument, Sign, TermId};
pub use index::{
    DocRecord, Field, IndexError, IndexMode, InvertedIndex, Posting, SearchHit, SearchScratch,
};
pub use knn::{dual_search, knn, knn_encoded, knn_exhaustive, merge_dual, KnnConfig, ScoredNeighbor};
pub use metrics::{mae, MaeError};
pub use predict::{predict_item_based, predict_user_based, round_to_scale, Prediction, PredictionSource};
pub use score::{ScorerConfig, ScorerKind};
pub use split::{split, SplitError, SplitPair};
