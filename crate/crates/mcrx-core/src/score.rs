//! Pluggable document scorers: tf-cosine, tf-idf cosine, BM25, and the
//! Dirichlet / Jelinek-Mercer query-likelihood language models.
//!
//! All five share one evaluation shape so the search loop can run them
//! term-at-a-time over postings:
//!
//! ```text
//! score(q, d) = finalize( sum_t posting_contribution(term_weight(t), f_{t,d}) )
//! ```
//!
//! Formulas (df = document frequency, cf = collection frequency, N = doc
//! count, dl = document length, p_c(t) = cf(t) / total_terms):
//!
//! - tf:        sum_t qf * f  / tf_norm(d)
//! - tf-idf:    sum_t qf * f * idf(t)^2 / tfidf_norm(d),  idf = 1 + ln(N/(df+1))
//! - BM25:      sum_t idf(t) * qf * f*(k1+1) / (f + k1*(1 - b + b*dl/avgdl)),
//!              idf = ln(1 + (N - df + 0.5)/(df + 0.5))
//! - Dirichlet: max(0, sum_t qf * max(0, ln(1 + f/(mu*p_c))) + |q| * ln(mu/(mu+dl)))
//! - JM:        sum_t qf * ln(1 + ((1-lambda)/lambda) * (f/dl)/p_c)
//!
//! Query terms with p_c = 0 are skipped by the language models (and carry no
//! postings anyway). The query-side cosine norm is never applied here: it is
//! constant per query and the downstream prediction formula normalizes by the
//! sum of absolute similarities, so any uniform positive scale cancels.

use alloc::collections::BTreeMap;

use crate::encode::TermId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorerKind {
    Tf,
    TfIdf,
    Bm25,
    Dirichlet,
    JelinekMercer,
}

/// A scorer choice plus its parameters. Defaults: k1 = 1.2, b = 0.75,
/// mu = 2000, lambda = 0.1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub dirichlet_mu: f64,
    pub jm_lambda: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            kind: ScorerKind::Tf,
            bm25_k1: 1.2,
            bm25_b: 0.75,
            dirichlet_mu: 2000.0,
            jm_lambda: 0.1,
        }
    }
}

impl ScorerConfig {
    pub fn of_kind(kind: ScorerKind) -> Self {
        ScorerConfig { kind, ..ScorerConfig::default() }
    }

    pub fn tf() -> Self {
        Self::of_kind(ScorerKind::Tf)
    }

    pub fn tfidf() -> Self {
        Self::of_kind(ScorerKind::TfIdf)
    }

    pub fn bm25() -> Self {
        Self::of_kind(ScorerKind::Bm25)
    }

    pub fn dirichlet() -> Self {
        Self::of_kind(ScorerKind::Dirichlet)
    }

    pub fn jelinek_mercer() -> Self {
        Self::of_kind(ScorerKind::JelinekMercer)
    }
}

/// Per-term corpus statistics for one field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TermStats {
    pub doc_freq: u64,
    pub collection_freq: u64,
}

/// Field-level aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldStats {
    pub doc_count: u64,
    pub total_terms: u64,
}

impl FieldStats {
    pub fn avg_doc_length(&self) -> f64 {
        if self.doc_count == 0 {
            0.0
        } else {
            self.total_terms as f64 / self.doc_count as f64
        }
    }
}

/// Per-document statistics needed at scoring time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocStats {
    pub doc_length: u64,
    pub tf_norm: f64,
    pub tfidf_norm: f64,
}

/// Query-level aggregate: total frequency over terms that were not skipped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub total_freq: u64,
}

/// Precomputed per-term multiplier for the posting loop.
#[derive(Debug, Clone, Copy)]
pub struct TermWeight {
    q_freq: f64,
    factor: f64,
}

impl ScorerConfig {
    /// Per-term setup. `None` means the term contributes nothing and must be
    /// skipped entirely (its frequency then also stays out of [`QueryStats`]).
    pub fn term_weight(
        &self,
        q_freq: u32,
        term: &TermStats,
        field: &FieldStats,
    ) -> Option<TermWeight> {
        let q_freq = q_freq as f64;
        let factor = match self.kind {
            ScorerKind::Tf => 1.0,
            ScorerKind::TfIdf => {
                let idf = tfidf_idf(term.doc_freq, field.doc_count);
                idf * idf
            }
            ScorerKind::Bm25 => bm25_idf(term.doc_freq, field.doc_count),
            ScorerKind::Dirichlet => {
                if term.collection_freq == 0 {
                    return None;
                }
                let p_c = term.collection_freq as f64 / field.total_terms as f64;
                1.0 / (self.dirichlet_mu * p_c)
            }
            ScorerKind::JelinekMercer => {
                if term.collection_freq == 0 {
                    return None;
                }
                let p_c = term.collection_freq as f64 / field.total_terms as f64;
                ((1.0 - self.jm_lambda) / self.jm_lambda) / p_c
            }
        };
        Some(TermWeight { q_freq, factor })
    }

    /// Contribution of one (term, document) match.
    pub fn posting_contribution(
        &self,
        weight: &TermWeight,
        d_freq: u32,
        doc_length: u64,
        field: &FieldStats,
    ) -> f64 {
        let f = d_freq as f64;
        match self.kind {
            ScorerKind::Tf | ScorerKind::TfIdf => weight.q_freq * f * weight.factor,
            ScorerKind::Bm25 => {
                let dl = doc_length as f64;
                let denom = f
                    + self.bm25_k1
                        * (1.0 - self.bm25_b + self.bm25_b * dl / field.avg_doc_length());
                weight.factor * weight.q_freq * f * (self.bm25_k1 + 1.0) / denom
            }
            ScorerKind::Dirichlet => {
                let term = libm::log(1.0 + f * weight.factor);
                weight.q_freq * if term > 0.0 { term } else { 0.0 }
            }
            ScorerKind::JelinekMercer => {
                let dl = doc_length as f64;
                weight.q_freq * libm::log(1.0 + weight.factor * f / dl)
            }
        }
    }

    /// Turns an accumulated sum of contributions into the document score.
    pub fn finalize(&self, accumulated: f64, query: &QueryStats, doc: &DocStats) -> f64 {
        match self.kind {
            ScorerKind::Tf => accumulated / doc.tf_norm,
            ScorerKind::TfIdf => accumulated / doc.tfidf_norm,
            ScorerKind::Bm25 | ScorerKind::JelinekMercer => accumulated,
            ScorerKind::Dirichlet => {
                let mu = self.dirichlet_mu;
                let dl = doc.doc_length as f64;
                let score =
                    accumulated + query.total_freq as f64 * libm::log(mu / (mu + dl));
                if score > 0.0 {
                    score
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn tfidf_idf(doc_freq: u64, doc_count: u64) -> f64 {
    1.0 + libm::log(doc_count as f64 / (doc_freq as f64 + 1.0))
}

pub fn bm25_idf(doc_freq: u64, doc_count: u64) -> f64 {
    let df = doc_freq as f64;
    libm::log(1.0 + (doc_count as f64 - df + 0.5) / (df + 0.5))
}

/// Statistics lookup for whole-document scoring outside the index search
/// loop (the index implements this per field; tests build table-backed ones).
pub trait FieldView {
    fn field_stats(&self) -> FieldStats;
    /// Zeros when the term is absent from the field.
    fn term_stats(&self, term: &TermId) -> TermStats;
}

fn doc_length_of(doc_terms: &BTreeMap<TermId, u32>) -> u64 {
    doc_terms.values().map(|&f| f as u64).sum()
}

fn tf_norm_of(doc_terms: &BTreeMap<TermId, u32>) -> f64 {
    libm::sqrt(doc_terms.values().map(|&f| (f as f64) * (f as f64)).sum())
}

/// tf-idf-weighted document norm over all terms of the document.
pub fn tfidf_norm_of(doc_terms: &BTreeMap<TermId, u32>, view: &impl FieldView) -> f64 {
    let field = view.field_stats();
    let sum: f64 = doc_terms
        .iter()
        .map(|(t, &f)| {
            let w = f as f64 * tfidf_idf(view.term_stats(t).doc_freq, field.doc_count);
            w * w
        })
        .sum();
    libm::sqrt(sum)
}

fn score_with(
    config: &ScorerConfig,
    query: &BTreeMap<TermId, u32>,
    doc_terms: &BTreeMap<TermId, u32>,
    doc: &DocStats,
    view: &impl FieldView,
) -> f64 {
    let field = view.field_stats();
    let mut acc = 0.0;
    let mut query_total = 0u64;
    for (term, &q_freq) in query {
        let Some(weight) = config.term_weight(q_freq, &view.term_stats(term), &field)
        else {
            continue;
        };
        query_total += q_freq as u64;
        if let Some(&d_freq) = doc_terms.get(term) {
            acc += config.posting_contribution(&weight, d_freq, doc.doc_length, &field);
        }
    }
    config.finalize(acc, &QueryStats { total_freq: query_total }, doc)
}

/// Cosine dot product normalized by the document norm only. Dividing the
/// result by the query norm gives the full cosine similarity.
pub fn score_tf(
    query: &BTreeMap<TermId, u32>,
    doc_terms: &BTreeMap<TermId, u32>,
    doc_norm: f64,
) -> f64 {
    debug_assert!(doc_norm > 0.0);
    let dot: f64 = query
        .iter()
        .filter_map(|(t, &qf)| doc_terms.get(t).map(|&df| qf as f64 * df as f64))
        .sum();
    dot / doc_norm
}

pub fn score_tfidf(
    query: &BTreeMap<TermId, u32>,
    doc_terms: &BTreeMap<TermId, u32>,
    view: &impl FieldView,
) -> f64 {
    let doc = DocStats {
        doc_length: doc_length_of(doc_terms),
        tf_norm: tf_norm_of(doc_terms),
        tfidf_norm: tfidf_norm_of(doc_terms, view),
    };
    score_with(&ScorerConfig::tfidf(), query, doc_terms, &doc, view)
}

pub fn score_bm25(
    query: &BTreeMap<TermId, u32>,
    doc_terms: &BTreeMap<TermId, u32>,
    view: &impl FieldView,
    k1: f64,
    b: f64,
) -> f64 {
    let config = ScorerConfig { kind: ScorerKind::Bm25, bm25_k1: k1, bm25_b: b, ..Default::default() };
    let doc = DocStats {
        doc_length: doc_length_of(doc_terms),
        tf_norm: tf_norm_of(doc_terms),
        tfidf_norm: 0.0,
    };
    score_with(&config, query, doc_terms, &doc, view)
}

pub fn score_dirichlet(
    query: &BTreeMap<TermId, u32>,
    doc_terms: &BTreeMap<TermId, u32>,
    view: &impl FieldView,
    mu: f64,
) -> f64 {
    let config = ScorerConfig { kind: ScorerKind::Dirichlet, dirichlet_mu: mu, ..Default::default() };
    let doc = DocStats {
        doc_length: doc_length_of(doc_terms),
        tf_norm: tf_norm_of(doc_terms),
        tfidf_norm: 0.0,
    };
    score_with(&config, query, doc_terms, &doc, view)
}

pub fn score_jelinek_mercer(
    query: &BTreeMap<TermId, u32>,
    doc_terms: &BTreeMap<TermId, u32>,
    view: &impl FieldView,
    lambda: f64,
) -> f64 {
    let config =
        ScorerConfig { kind: ScorerKind::JelinekMercer, jm_lambda: lambda, ..Default::default() };
    let doc = DocStats {
        doc_length: doc_length_of(doc_terms),
        tf_norm: tf_norm_of(doc_terms),
        tfidf_norm: 0.0,
    };
    score_with(&config, query, doc_terms, &doc, view)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::TermId;
    use alloc::vec::Vec;

    struct TableView {
        field: FieldStats,
        terms: BTreeMap<TermId, TermStats>,
    }

    impl FieldView for TableView {
        fn field_stats(&self) -> FieldStats {
            self.field
        }
        fn term_stats(&self, term: &TermId) -> TermStats {
            self.terms.get(term).copied().unwrap_or_default()
        }
    }

    fn terms(entries: &[(TermId, u32)]) -> BTreeMap<TermId, u32> {
        entries.iter().copied().collect()
    }

    fn p(id: u64) -> TermId {
        TermId::positive(id)
    }

    fn n(id: u64) -> TermId {
        TermId::negative(id)
    }

    /// Two documents: d1 = {p1:2, n2:3}, d2 = {p1:1, p3:4}.
    fn two_doc_view() -> (TableView, BTreeMap<TermId, u32>, BTreeMap<TermId, u32>) {
        let d1 = terms(&[(p(1), 2), (n(2), 3)]);
        let d2 = terms(&[(p(1), 1), (p(3), 4)]);
        let mut stats = BTreeMap::new();
        stats.insert(p(1), TermStats { doc_freq: 2, collection_freq: 3 });
        stats.insert(n(2), TermStats { doc_freq: 1, collection_freq: 3 });
        stats.insert(p(3), TermStats { doc_freq: 1, collection_freq: 4 });
        let view = TableView { field: FieldStats { doc_count: 2, total_terms: 10 }, terms: stats };
        (view, d1, d2)
    }

    #[test]
    fn tf_golden_fraction() {
        // Query {p37:3, p24:6} against the document {p37:5, n24:4}.
        let q = terms(&[(p(37), 3), (p(24), 6)]);
        let d = terms(&[(p(37), 5), (n(24), 4)]);
        let doc_norm = libm::sqrt(41.0);
        let score = score_tf(&q, &d, doc_norm);
        assert!((score - 15.0 / libm::sqrt(41.0)).abs() < 1e-12);
        // Explicit query-norm division recovers the full cosine.
        let query_norm = libm::sqrt(45.0);
        assert!((score / query_norm - 0.349_215_147_884_789_1).abs() < 1e-9);
    }

    #[test]
    fn tf_self_similarity_and_orthogonality() {
        let d = terms(&[(p(1), 3), (n(2), 4)]);
        let norm = tf_norm_of(&d);
        assert!((score_tf(&d, &d, norm) - norm).abs() < 1e-12);
        let disjoint = terms(&[(p(9), 2)]);
        assert_eq!(score_tf(&disjoint, &d, norm), 0.0);
    }

    #[test]
    fn tfidf_two_doc_oracle() {
        let (view, d1, d2) = two_doc_view();
        let q = terms(&[(p(1), 2), (n(2), 1)]);
        assert!((score_tfidf(&q, &d1, &view) - 1.367_775_361_643_216_7).abs() < 1e-12);
        assert!((score_tfidf(&q, &d2, &view) - 0.174_815_408_029_112_27).abs() < 1e-12);
    }

    #[test]
    fn tfidf_rarer_term_contributes_more() {
        let (view, ..) = two_doc_view();
        // Same frequency, but n2 (df 1) must outweigh p1 (df 2).
        let d = terms(&[(p(1), 2), (n(2), 2)]);
        let common_only = terms(&[(p(1), 1)]);
        let rare_only = terms(&[(n(2), 1)]);
        let common = score_tfidf(&common_only, &d, &view);
        let rare = score_tfidf(&rare_only, &d, &view);
        assert!(rare > common);
    }

    #[test]
    fn constant_idf_preserves_tf_ranking() {
        // Every term has df 1, so idf is a single constant and tf-idf must
        // rank documents exactly like tf.
        let docs = [
            terms(&[(p(1), 5), (n(2), 1)]),
            terms(&[(p(3), 2), (n(4), 2)]),
            terms(&[(p(5), 7)]),
        ];
        let mut stats = BTreeMap::new();
        for d in &docs {
            for (t, &f) in d {
                stats.insert(*t, TermStats { doc_freq: 1, collection_freq: f as u64 });
            }
        }
        let view = TableView { field: FieldStats { doc_count: 3, total_terms: 17 }, terms: stats };
        let q = terms(&[(p(1), 2), (p(3), 3), (p(5), 1)]);
        let mut tf_ranked: Vec<(usize, f64)> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (i, score_tf(&q, d, tf_norm_of(d))))
            .collect();
        let mut tfidf_ranked: Vec<(usize, f64)> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (i, score_tfidf(&q, d, &view)))
            .collect();
        tf_ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        tfidf_ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let tf_order: Vec<usize> = tf_ranked.iter().map(|&(i, _)| i).collect();
        let tfidf_order: Vec<usize> = tfidf_ranked.iter().map(|&(i, _)| i).collect();
        assert_eq!(tf_order, tfidf_order);
    }

    /// Three documents: d1 = {p1:3, n2:1}, d2 = {p1:1, p3:2}, d3 = {n2:2, p3:2, p4:1}.
    fn three_doc_view() -> (TableView, [BTreeMap<TermId, u32>; 3]) {
        let d1 = terms(&[(p(1), 3), (n(2), 1)]);
        let d2 = terms(&[(p(1), 1), (p(3), 2)]);
        let d3 = terms(&[(n(2), 2), (p(3), 2), (p(4), 1)]);
        let mut stats = BTreeMap::new();
        stats.insert(p(1), TermStats { doc_freq: 2, collection_freq: 4 });
        stats.insert(n(2), TermStats { doc_freq: 2, collection_freq: 3 });
        stats.insert(p(3), TermStats { doc_freq: 2, collection_freq: 4 });
        stats.insert(p(4), TermStats { doc_freq: 1, collection_freq: 1 });
        let view =
            TableView { field: FieldStats { doc_count: 3, total_terms: 12 }, terms: stats };
        (view, [d1, d2, d3])
    }

    #[test]
    fn bm25_three_doc_oracle() {
        let (view, docs) = three_doc_view();
        let q = terms(&[(p(1), 2), (n(2), 1)]);
        let expected = [1.947_157_892_589_476_4, 1.047_096_693_003_158, 0.603_800_282_826_638_6];
        for (d, want) in docs.iter().zip(expected) {
            assert!((score_bm25(&q, d, &view, 1.2, 0.75) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bm25_saturates_at_high_frequency() {
        // At fixed document length, the per-term contribution approaches
        // idf * qf * (k1 + 1) from below as d_freq grows.
        let (view, ..) = three_doc_view();
        let field = view.field_stats();
        let config = ScorerConfig::bm25();
        let stats = view.term_stats(&p(1));
        let weight = config.term_weight(2, &stats, &field).unwrap();
        let limit = bm25_idf(2, 3) * 2.0 * (1.2 + 1.0);
        let dl = field.avg_doc_length() as u64;
        let near = config.posting_contribution(&weight, 1_000_000_000, dl, &field);
        assert!(near < limit);
        assert!((limit - near) / limit < 1e-6);
        // And it is monotone: more occurrences never score lower.
        let lo = config.posting_contribution(&weight, 1, dl, &field);
        let hi = config.posting_contribution(&weight, 10, dl, &field);
        assert!(hi > lo);
    }

    #[test]
    fn bm25_b_zero_ignores_doc_length() {
        let (view, ..) = three_doc_view();
        let q = terms(&[(p(1), 2)]);
        let short = terms(&[(p(1), 2)]);
        let long = terms(&[(p(1), 2), (p(3), 500)]);
        let a = score_bm25(&q, &short, &view, 1.2, 0.0);
        let b = score_bm25(&q, &long, &view, 1.2, 0.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_two_doc_oracle() {
        let (view, d1, d2) = two_doc_view();
        let q = terms(&[(p(1), 2), (n(2), 1)]);
        assert!(
            (score_dirichlet(&q, &d1, &view, 2000.0) - 0.004_152_481_100_626_997).abs() < 1e-12
        );
        // d2 matches only p1; the length penalty pushes the total below zero,
        // which the clamp turns into 0.
        assert_eq!(score_dirichlet(&q, &d2, &view, 2000.0), 0.0);
        assert!((score_dirichlet(&q, &d1, &view, 10.0) - 0.498_403_103_767_433).abs() < 1e-12);
        assert_eq!(score_dirichlet(&q, &d2, &view, 10.0), 0.0);
    }

    #[test]
    fn dirichlet_is_monotone_in_term_frequency() {
        let (view, ..) = two_doc_view();
        let q = terms(&[(p(1), 1)]);
        let few = terms(&[(p(1), 1), (n(2), 2)]);
        let many = terms(&[(p(1), 3)]);
        // Same length (3) so only the matched frequency differs.
        let lo = score_dirichlet(&q, &few, &view, 10.0);
        let hi = score_dirichlet(&q, &many, &view, 10.0);
        assert!(hi > lo);
    }

    #[test]
    fn dirichlet_vanishes_as_mu_grows() {
        let (view, d1, _) = two_doc_view();
        let q = terms(&[(p(1), 2), (n(2), 1)]);
        assert!(score_dirichlet(&q, &d1, &view, 1e12) < 1e-9);
    }

    #[test]
    fn jm_two_doc_oracle() {
        let (view, d1, d2) = two_doc_view();
        let q = terms(&[(p(1), 2), (n(2), 1)]);
        assert!(
            (score_jelinek_mercer(&q, &d1, &view, 0.1) - 8.074_337_694_089_515).abs() < 1e-12
        );
        assert!(
            (score_jelinek_mercer(&q, &d2, &view, 0.1) - 3.891_820_298_110_626_5).abs() < 1e-12
        );
    }

    #[test]
    fn jm_vanishes_as_lambda_approaches_one() {
        let (view, d1, _) = two_doc_view();
        let q = terms(&[(p(1), 2), (n(2), 1)]);
        assert!(score_jelinek_mercer(&q, &d1, &view, 1.0 - 1e-12) < 1e-9);
    }

    #[test]
    fn jm_prefers_higher_relative_frequency() {
        let (view, ..) = two_doc_view();
        let q = terms(&[(p(1), 1)]);
        let concentrated = terms(&[(p(1), 4), (n(2), 1)]);
        let diluted = terms(&[(p(1), 1), (n(2), 4)]);
        let hi = score_jelinek_mercer(&q, &concentrated, &view, 0.1);
        let lo = score_jelinek_mercer(&q, &diluted, &view, 0.1);
        assert!(hi > lo);
    }

    #[test]
    fn unknown_terms_are_skipped_by_language_models() {
        let (view, d1, _) = two_doc_view();
        let q = terms(&[(p(1), 2), (p(999), 5)]);
        let q_known = terms(&[(p(1), 2)]);
        assert_eq!(
            score_dirichlet(&q, &d1, &view, 10.0),
            score_dirichlet(&q_known, &d1, &view, 10.0)
        );
        assert_eq!(
            score_jelinek_mercer(&q, &d1, &view, 0.1),
            score_jelinek_mercer(&q_known, &d1, &view, 0.1)
        );
    }
}
