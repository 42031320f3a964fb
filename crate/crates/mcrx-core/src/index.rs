//! Embedded inverted index over encoded rating profiles.
//!
//! Documents are either user profiles (user-based mode) or item profiles
//! (item-based mode). Each document contributes postings to two fields, PRATE
//! and NRATE, which hold mirrored sign prefixes; per-document statistics (the
//! stored profile mean, the frequency-vector norm, and the field length) are
//! kept in a doc table addressed by ordinal. Ordinals are assigned by
//! ascending doc id, which keeps postings naturally sorted and makes the
//! on-disk layout of the companion crate delta-friendly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::encode::{EncodedDocument, TermId};
use crate::score::{
    tfidf_idf, DocStats, FieldStats, FieldView, QueryStats, ScorerConfig, TermStats,
};

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("duplicate document id {0}")]
    DuplicateDocId(u64),
    #[error("document {doc_id} was encoded with scale factor {found}, index expects {expected}")]
    ScaleFactorMismatch { doc_id: u64, expected: u32, found: u32 },
    #[error("doc table is not sorted by ascending doc id")]
    UnsortedDocTable,
    #[error("posting references ordinal {ordinal} but the index has {doc_count} documents")]
    PostingOutOfRange { ordinal: u32, doc_count: u32 },
    #[error("postings list is not strictly ascending by ordinal")]
    UnsortedPostings,
    #[error("posting with zero frequency")]
    ZeroFrequency,
    #[error("duplicate postings list for a term")]
    DuplicateTerm,
    #[error("field term count {postings} does not match the doc table total {doc_table}")]
    LengthMismatch { postings: u64, doc_table: u64 },
}

/// Whether documents are user profiles or item profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    UserBased,
    ItemBased,
}

/// The two mirrored term fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Prate,
    Nrate,
}

impl Field {
    pub const ALL: [Field; 2] = [Field::Prate, Field::Nrate];

    fn slot(self) -> usize {
        match self {
            Field::Prate => 0,
            Field::Nrate => 1,
        }
    }
}

/// One document's entry in a postings list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc_ordinal: u32,
    pub frequency: u32,
}

#[derive(Debug, Clone)]
struct PostingList {
    postings: Vec<Posting>,
    collection_freq: u64,
}

/// Per-document statistics stored alongside the postings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocRecord {
    pub doc_id: u64,
    pub stored_mean: f64,
    pub norm: f64,
    pub doc_length: u64,
}

/// A scored document returned by [`InvertedIndex::search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchHit {
    pub doc_id: u64,
    pub score: f64,
}

#[derive(Debug, Clone, Default)]
struct FieldData {
    vocab: BTreeMap<TermId, PostingList>,
    total_terms: u64,
    tfidf_norms: Vec<f64>,
}

/// Immutable two-field inverted index with per-document statistics.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    mode: IndexMode,
    scale_factor: u32,
    docs: Vec<DocRecord>,
    ordinal_of: BTreeMap<u64, u32>,
    fields: [FieldData; 2],
}

/// Reusable buffers for [`InvertedIndex::search_with`]; callers running many
/// queries can keep one per worker to avoid re-zeroing a dense accumulator.
#[derive(Debug, Default)]
pub struct SearchScratch {
    scores: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<u32>,
}

impl SearchScratch {
    fn ensure(&mut self, doc_count: usize) {
        if self.scores.len() < doc_count {
            self.scores.resize(doc_count, 0.0);
            self.seen.resize(doc_count, false);
        }
        self.touched.clear();
    }
}

impl InvertedIndex {
    /// Builds the index from encoded documents. Documents encoding to nothing
    /// (norm 0) are kept in the doc table but appear in no postings list.
    pub fn build(
        mut documents: Vec<EncodedDocument>,
        mode: IndexMode,
        scale_factor: u32,
    ) -> Result<Self, IndexError> {
        documents.sort_unstable_by_key(|d| d.doc_id);
        for pair in documents.windows(2) {
            if pair[0].doc_id == pair[1].doc_id {
                return Err(IndexError::DuplicateDocId(pair[0].doc_id));
            }
        }
        let mut docs = Vec::with_capacity(documents.len());
        let mut fields = [FieldData::default(), FieldData::default()];
        for (ordinal, doc) in documents.iter().enumerate() {
            if doc.scale_factor != scale_factor {
                return Err(IndexError::ScaleFactorMismatch {
                    doc_id: doc.doc_id,
                    expected: scale_factor,
                    found: doc.scale_factor,
                });
            }
            docs.push(DocRecord {
                doc_id: doc.doc_id,
                stored_mean: doc.stored_mean,
                norm: doc.norm,
                doc_length: doc.doc_length(),
            });
            for (field, terms) in [(Field::Prate, &doc.prate), (Field::Nrate, &doc.nrate)] {
                let data = &mut fields[field.slot()];
                for (&term, &frequency) in terms {
                    data.vocab
                        .entry(term)
                        .or_insert_with(|| PostingList {
                            postings: Vec::new(),
                            collection_freq: 0,
                        })
                        .postings
                        .push(Posting { doc_ordinal: ordinal as u32, frequency });
                }
            }
        }
        let ordinal_of =
            docs.iter().enumerate().map(|(ord, d)| (d.doc_id, ord as u32)).collect();
        let mut index = InvertedIndex { mode, scale_factor, docs, ordinal_of, fields };
        index.finalize();
        Ok(index)
    }

    /// Reassembles an index from raw parts (the persistence path). Validates
    /// the ordinal convention, postings order, and field/doc-table agreement;
    /// derived statistics are recomputed exactly as [`build`] computes them.
    ///
    /// [`build`]: InvertedIndex::build
    pub fn from_parts(
        mode: IndexMode,
        scale_factor: u32,
        docs: Vec<DocRecord>,
        postings: impl IntoIterator<Item = (Field, TermId, Vec<Posting>)>,
    ) -> Result<Self, IndexError> {
        for pair in docs.windows(2) {
            if pair[0].doc_id >= pair[1].doc_id {
                return Err(IndexError::UnsortedDocTable);
            }
        }
        let doc_count = docs.len() as u32;
        let mut fields = [FieldData::default(), FieldData::default()];
        for (field, term, list) in postings {
            let mut prev: Option<u32> = None;
            for p in &list {
                if p.doc_ordinal >= doc_count {
                    return Err(IndexError::PostingOutOfRange {
                        ordinal: p.doc_ordinal,
                        doc_count,
                    });
                }
                if prev.is_some_and(|prev| p.doc_ordinal <= prev) {
                    return Err(IndexError::UnsortedPostings);
                }
                if p.frequency == 0 {
                    return Err(IndexError::ZeroFrequency);
                }
                prev = Some(p.doc_ordinal);
            }
            let data = &mut fields[field.slot()];
            if data
                .vocab
                .insert(term, PostingList { postings: list, collection_freq: 0 })
                .is_some()
            {
                return Err(IndexError::DuplicateTerm);
            }
        }
        let ordinal_of =
            docs.iter().enumerate().map(|(ord, d)| (d.doc_id, ord as u32)).collect();
        let mut index = InvertedIndex { mode, scale_factor, docs, ordinal_of, fields };
        index.finalize();
        let doc_table_total: u64 = index.docs.iter().map(|d| d.doc_length).sum();
        for field in Field::ALL {
            let postings_total = index.fields[field.slot()].total_terms;
            if postings_total != doc_table_total {
                return Err(IndexError::LengthMismatch {
                    postings: postings_total,
                    doc_table: doc_table_total,
                });
            }
        }
        Ok(index)
    }

    /// Recomputes collection frequencies, field totals, and the per-document
    /// tf-idf norms. Iteration order is the vocabulary order, so rebuilding
    /// from parts reproduces bit-identical statistics.
    fn finalize(&mut self) {
        let doc_count = self.docs.len() as u64;
        for data in &mut self.fields {
            let mut total = 0u64;
            let mut norms_sq = vec![0.0f64; self.docs.len()];
            for list in data.vocab.values_mut() {
                list.collection_freq =
                    list.postings.iter().map(|p| p.frequency as u64).sum();
                total += list.collection_freq;
                let idf = tfidf_idf(list.postings.len() as u64, doc_count);
                for p in &list.postings {
                    let w = p.frequency as f64 * idf;
                    norms_sq[p.doc_ordinal as usize] += w * w;
                }
            }
            data.total_terms = total;
            data.tfidf_norms = norms_sq.into_iter().map(libm::sqrt).collect();
        }
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn scale_factor(&self) -> u32 {
        self.scale_factor
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn docs(&self) -> &[DocRecord] {
        &self.docs
    }

    pub fn ordinal_of(&self, doc_id: u64) -> Option<u32> {
        self.ordinal_of.get(&doc_id).copied()
    }

    pub fn doc_record(&self, doc_id: u64) -> Option<&DocRecord> {
        self.ordinal_of(doc_id).map(|ord| &self.docs[ord as usize])
    }

    pub fn field_total_terms(&self, field: Field) -> u64 {
        self.fields[field.slot()].total_terms
    }

    pub fn avg_doc_length(&self, field: Field) -> f64 {
        self.field_stats(field).avg_doc_length()
    }

    pub fn vocab_len(&self, field: Field) -> usize {
        self.fields[field.slot()].vocab.len()
    }

    pub fn doc_freq(&self, field: Field, term: &TermId) -> u64 {
        self.fields[field.slot()]
            .vocab
            .get(term)
            .map_or(0, |l| l.postings.len() as u64)
    }

    pub fn collection_freq(&self, field: Field, term: &TermId) -> u64 {
        self.fields[field.slot()].vocab.get(term).map_or(0, |l| l.collection_freq)
    }

    pub fn postings(&self, field: Field, term: &TermId) -> Option<&[Posting]> {
        self.fields[field.slot()].vocab.get(term).map(|l| l.postings.as_slice())
    }

    /// Iterates the vocabulary of one field in term order.
    pub fn vocab_iter(
        &self,
        field: Field,
    ) -> impl Iterator<Item = (&TermId, &[Posting])> + '_ {
        self.fields[field.slot()]
            .vocab
            .iter()
            .map(|(t, l)| (t, l.postings.as_slice()))
    }

    /// Precomputed tf-idf-weighted norm of a document in one field.
    pub fn tfidf_norm(&self, field: Field, ordinal: u32) -> f64 {
        self.fields[field.slot()].tfidf_norms[ordinal as usize]
    }

    fn field_stats(&self, field: Field) -> FieldStats {
        FieldStats {
            doc_count: self.docs.len() as u64,
            total_terms: self.fields[field.slot()].total_terms,
        }
    }

    /// Reconstructs a document's term/frequency map for one field by scanning
    /// the vocabulary. Intended for inspection and query-by-document, not for
    /// hot paths.
    pub fn document_terms(&self, field: Field, doc_id: u64) -> Option<BTreeMap<TermId, u32>> {
        let ordinal = self.ordinal_of(doc_id)?;
        let mut terms = BTreeMap::new();
        for (term, postings) in self.vocab_iter(field) {
            if let Ok(idx) = postings.binary_search_by_key(&ordinal, |p| p.doc_ordinal) {
                terms.insert(*term, postings[idx].frequency);
            }
        }
        Some(terms)
    }

    /// Scores every document sharing at least one term with the query and
    /// returns the best `top_n`, sorted by descending score with ties broken
    /// by ascending doc id. `exclude_doc_id` is filtered out before
    /// truncation. Both fields always exist, so there is no unknown-field
    /// error path.
    pub fn search(
        &self,
        field: Field,
        query: &BTreeMap<TermId, u32>,
        top_n: usize,
        scorer: &ScorerConfig,
        exclude_doc_id: Option<u64>,
    ) -> Vec<SearchHit> {
        let mut scratch = SearchScratch::default();
        self.search_with(field, query, top_n, scorer, exclude_doc_id, &mut scratch)
    }

    /// [`search`] with caller-provided scratch buffers.
    ///
    /// [`search`]: InvertedIndex::search
    pub fn search_with(
        &self,
        field: Field,
        query: &BTreeMap<TermId, u32>,
        top_n: usize,
        scorer: &ScorerConfig,
        exclude_doc_id: Option<u64>,
        scratch: &mut SearchScratch,
    ) -> Vec<SearchHit> {
        let data = &self.fields[field.slot()];
        let field_stats = self.field_stats(field);
        scratch.ensure(self.docs.len());
        let mut query_total = 0u64;
        for (term, &q_freq) in query {
            let Some(list) = data.vocab.get(term) else { continue };
            let term_stats = TermStats {
                doc_freq: list.postings.len() as u64,
                collection_freq: list.collection_freq,
            };
            let Some(weight) = scorer.term_weight(q_freq, &term_stats, &field_stats)
            else {
                continue;
            };
            query_total += q_freq as u64;
            for p in &list.postings {
                let ord = p.doc_ordinal as usize;
                let contribution = scorer.posting_contribution(
                    &weight,
                    p.frequency,
                    self.docs[ord].doc_length,
                    &field_stats,
                );
                if scratch.seen[ord] {
                    scratch.scores[ord] += contribution;
                } else {
                    scratch.seen[ord] = true;
                    scratch.scores[ord] = contribution;
                    scratch.touched.push(p.doc_ordinal);
                }
            }
        }
        let query_stats = QueryStats { total_freq: query_total };
        let mut hits = Vec::with_capacity(scratch.touched.len());
        for &ord in &scratch.touched {
            let doc = &self.docs[ord as usize];
            scratch.seen[ord as usize] = false;
            if exclude_doc_id == Some(doc.doc_id) {
                continue;
            }
            let doc_stats = DocStats {
                doc_length: doc.doc_length,
                tf_norm: doc.norm,
                tfidf_norm: data.tfidf_norms[ord as usize],
            };
            let score =
                scorer.finalize(scratch.scores[ord as usize], &query_stats, &doc_stats);
            hits.push(SearchHit { doc_id: doc.doc_id, score });
        }
        rank_hits(&mut hits, top_n);
        hits
    }
}

/// Sorts by (score desc, doc id asc) and truncates, selecting first when the
/// candidate set is much larger than `top_n`.
fn rank_hits(hits: &mut Vec<SearchHit>, top_n: usize) {
    let by_rank = |a: &SearchHit, b: &SearchHit| {
        b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id))
    };
    if hits.len() > top_n {
        if top_n == 0 {
            hits.clear();
            return;
        }
        hits.select_nth_unstable_by(top_n - 1, by_rank);
        hits.truncate(top_n);
    }
    hits.sort_unstable_by(by_rank);
}

/// One field of an index, viewed as a statistics source for the
/// whole-document scoring functions.
pub struct IndexFieldView<'a> {
    index: &'a InvertedIndex,
    field: Field,
}

impl InvertedIndex {
    pub fn field_view(&self, field: Field) -> IndexFieldView<'_> {
        IndexFieldView { index: self, field }
    }
}

impl FieldView for IndexFieldView<'_> {
    fn field_stats(&self) -> FieldStats {
        self.index.field_stats(self.field)
    }

    fn term_stats(&self, term: &TermId) -> TermStats {
        TermStats {
            doc_freq: self.index.doc_freq(self.field, term),
            collection_freq: self.index.collection_freq(self.field, term),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_profile;
    use crate::score::score_tfidf;

    fn worked_document() -> EncodedDocument {
        // prate {p37:5, n24:4}, the worked two-term document.
        encode_profile(1, &[(37, 4.0), (24, 3.91)], 3.95, 100)
    }

    fn worked_query() -> BTreeMap<TermId, u32> {
        [(TermId::positive(37), 3), (TermId::positive(24), 6)].into_iter().collect()
    }

    #[test]
    fn shared_term_postings_length() {
        let a = encode_profile(1, &[(37, 4.0)], 3.95, 100);
        let b = encode_profile(2, &[(37, 5.0)], 4.5, 100);
        let index = InvertedIndex::build(vec![a, b], IndexMode::UserBased, 100).unwrap();
        assert_eq!(index.postings(Field::Prate, &TermId::positive(37)).unwrap().len(), 2);
        assert_eq!(index.doc_freq(Field::Prate, &TermId::positive(37)), 2);
    }

    #[test]
    fn mirrored_fields_of_the_worked_example() {
        let index =
            InvertedIndex::build(vec![worked_document()], IndexMode::UserBased, 100).unwrap();
        let p = index.postings(Field::Prate, &TermId::positive(37)).unwrap();
        assert_eq!(p, &[Posting { doc_ordinal: 0, frequency: 5 }]);
        let n = index.postings(Field::Nrate, &TermId::negative(37)).unwrap();
        assert_eq!(n, &[Posting { doc_ordinal: 0, frequency: 5 }]);
        assert_eq!(index.field_total_terms(Field::Prate), 9);
        assert_eq!(index.field_total_terms(Field::Nrate), 9);
    }

    #[test]
    fn empty_corpus_searches_empty() {
        let index = InvertedIndex::build(Vec::new(), IndexMode::UserBased, 100).unwrap();
        assert_eq!(index.doc_count(), 0);
        let hits = index.search(Field::Prate, &worked_query(), 5, &ScorerConfig::tf(), None);
        assert!(hits.is_empty());
    }

    #[test]
    fn duplicate_doc_id_is_rejected() {
        let a = encode_profile(1, &[(37, 4.0)], 3.0, 100);
        let b = encode_profile(1, &[(24, 2.0)], 3.0, 100);
        let err = InvertedIndex::build(vec![a, b], IndexMode::UserBased, 100).unwrap_err();
        assert_eq!(err, IndexError::DuplicateDocId(1));
    }

    #[test]
    fn scale_factor_mismatch_is_rejected() {
        let a = encode_profile(1, &[(37, 4.0)], 3.0, 100);
        let err = InvertedIndex::build(vec![a], IndexMode::UserBased, 1000).unwrap_err();
        assert!(matches!(err, IndexError::ScaleFactorMismatch { doc_id: 1, .. }));
    }

    #[test]
    fn golden_dual_field_scores() {
        let index =
            InvertedIndex::build(vec![worked_document()], IndexMode::UserBased, 100).unwrap();
        let q = worked_query();
        let prate = index.search(Field::Prate, &q, 10, &ScorerConfig::tf(), None);
        assert_eq!(prate.len(), 1);
        assert!((prate[0].score - 15.0 / libm::sqrt(41.0)).abs() < 1e-12);
        let nrate = index.search(Field::Nrate, &q, 10, &ScorerConfig::tf(), None);
        assert_eq!(nrate.len(), 1);
        assert!((nrate[0].score - 24.0 / libm::sqrt(41.0)).abs() < 1e-12);
    }

    #[test]
    fn no_term_overlap_no_hits() {
        let index =
            InvertedIndex::build(vec![worked_document()], IndexMode::UserBased, 100).unwrap();
        let q: BTreeMap<TermId, u32> = [(TermId::positive(99), 4)].into_iter().collect();
        assert!(index.search(Field::Prate, &q, 10, &ScorerConfig::tf(), None).is_empty());
    }

    #[test]
    fn exclusion_removes_a_document() {
        let a = encode_profile(1, &[(37, 4.0)], 3.95, 100);
        let b = encode_profile(2, &[(37, 5.0)], 4.5, 100);
        let index = InvertedIndex::build(vec![a, b], IndexMode::UserBased, 100).unwrap();
        let q: BTreeMap<TermId, u32> = [(TermId::positive(37), 2)].into_iter().collect();
        let hits = index.search(Field::Prate, &q, 10, &ScorerConfig::tf(), Some(1));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, 2);
    }

    #[test]
    fn equal_scores_tie_break_by_ascending_id() {
        let a = encode_profile(7, &[(1, 4.0)], 3.0, 100);
        let b = encode_profile(3, &[(1, 4.0)], 3.0, 100);
        let index = InvertedIndex::build(vec![a, b], IndexMode::UserBased, 100).unwrap();
        let q: BTreeMap<TermId, u32> = [(TermId::positive(1), 1)].into_iter().collect();
        let hits = index.search(Field::Prate, &q, 10, &ScorerConfig::tf(), None);
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].doc_id, 3);
        assert_eq!(hits[1].doc_id, 7);
        assert_eq!(hits[0].score, hits[1].score);
    }

    #[test]
    fn top_n_prefix_agreement() {
        let docs: Vec<EncodedDocument> = (1..=20)
            .map(|id| encode_profile(id, &[(1, 1.0 + (id % 5) as f64)], 0.5, 100))
            .collect();
        let index = InvertedIndex::build(docs, IndexMode::UserBased, 100).unwrap();
        let q: BTreeMap<TermId, u32> = [(TermId::positive(1), 3)].into_iter().collect();
        let all = index.search(Field::Prate, &q, 20, &ScorerConfig::tf(), None);
        for n in [1usize, 3, 7, 20] {
            let top = index.search(Field::Prate, &q, n, &ScorerConfig::tf(), None);
            assert_eq!(top.as_slice(), &all[..n.min(all.len())]);
        }
    }

    #[test]
    fn empty_documents_are_stored_but_unmatched() {
        let empty = encode_profile(5, &[(1, 3.0)], 3.0, 100);
        let real = encode_profile(6, &[(1, 4.0)], 3.0, 100);
        let index =
            InvertedIndex::build(vec![empty, real], IndexMode::ItemBased, 100).unwrap();
        assert_eq!(index.doc_count(), 2);
        assert_eq!(index.doc_record(5).unwrap().norm, 0.0);
        let q: BTreeMap<TermId, u32> = [(TermId::positive(1), 1)].into_iter().collect();
        let hits = index.search(Field::Prate, &q, 10, &ScorerConfig::tf(), None);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, 6);
    }

    #[test]
    fn cached_tfidf_norm_matches_document_view() {
        let docs = vec![
            encode_profile(1, &[(10, 5.0), (11, 2.0)], 3.5, 100),
            encode_profile(2, &[(10, 4.0), (12, 1.0)], 3.0, 100),
            encode_profile(3, &[(11, 4.5), (12, 2.5)], 3.5, 100),
        ];
        let index = InvertedIndex::build(docs, IndexMode::UserBased, 100).unwrap();
        for field in Field::ALL {
            for doc in index.docs() {
                let ordinal = index.ordinal_of(doc.doc_id).unwrap();
                let terms = index.document_terms(field, doc.doc_id).unwrap();
                let recomputed =
                    crate::score::tfidf_norm_of(&terms, &index.field_view(field));
                assert!((index.tfidf_norm(field, ordinal) - recomputed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn search_matches_document_level_scorer() {
        let docs = vec![
            encode_profile(1, &[(10, 5.0), (11, 2.0)], 3.5, 100),
            encode_profile(2, &[(10, 4.0), (12, 1.0)], 3.0, 100),
        ];
        let index = InvertedIndex::build(docs, IndexMode::UserBased, 100).unwrap();
        let q: BTreeMap<TermId, u32> =
            [(TermId::positive(10), 4), (TermId::negative(11), 2)].into_iter().collect();
        let hits = index.search(Field::Prate, &q, 10, &ScorerConfig::tfidf(), None);
        assert!(!hits.is_empty());
        for hit in hits {
            let terms = index.document_terms(Field::Prate, hit.doc_id).unwrap();
            let direct = score_tfidf(&q, &terms, &index.field_view(Field::Prate));
            assert!((hit.score - direct).abs() < 1e-12);
        }
    }
}
