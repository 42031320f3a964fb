//! Property tests spanning the core modules: dataset/split invariants, the
//! prefix-flip duality of the encoder, the mirror and antisymmetry laws of
//! the dual-field search, and the adjusted-cosine equivalence of the index
//! path against the exhaustive oracle.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use mcrx_core::{
    acs, compute_means, encode_profile, encode_query, knn_exhaustive, mae, merge_dual,
    predict_user_based, round_to_scale, split, Field, IndexMode, InvertedIndex, RatingRecord,
    RatingScale, RatingsDataset, ScoredNeighbor, ScorerConfig, ScorerKind, TermId,
};

const ALL_SCORERS: [ScorerKind; 5] = [
    ScorerKind::Tf,
    ScorerKind::TfIdf,
    ScorerKind::Bm25,
    ScorerKind::Dirichlet,
    ScorerKind::JelinekMercer,
];

fn one_to_five() -> RatingScale {
    RatingScale::one_to_five()
}

/// Random sparse corpus: up to 12 users x 10 items, integer ratings 1..=5.
fn arb_records() -> impl Strategy<Value = Vec<RatingRecord>> {
    proptest::collection::btree_map((0u64..12, 0u64..10), 1u8..=5, 1..60).prop_map(|cells| {
        cells
            .into_iter()
            .map(|((u, i), r)| RatingRecord {
                user_id: u + 1,
                item_id: i + 1,
                rating: r as f64,
                timestamp: (u * 1000 + i) as i64,
            })
            .collect()
    })
}

fn arb_dataset() -> impl Strategy<Value = RatingsDataset> {
    arb_records()
        .prop_map(|records| RatingsDataset::from_records(records, one_to_five()).unwrap())
}

/// Dense corpus whose profile sizes divide 100: every user rates every item,
/// so each mean-centered rate is an exact multiple of 0.01 and every pair's
/// co-rated overlap spans both full profiles. Both properties are needed for
/// the index path to reproduce the adjusted cosine exactly: the encoding is
/// lossless only on the 0.01 grid, and the adjusted cosine normalizes over
/// the overlap while document norms cover the whole profile.
fn arb_exact_mcr_dataset() -> impl Strategy<Value = RatingsDataset> {
    (prop::sample::select(vec![1usize, 2, 4, 5, 10]), 2usize..10)
        .prop_flat_map(|(items, users)| {
            proptest::collection::vec(proptest::collection::vec(1u8..=5, items), users)
        })
        .prop_map(|rows| {
            let mut records = Vec::new();
            for (u, row) in rows.into_iter().enumerate() {
                for (i, r) in row.into_iter().enumerate() {
                    records.push(RatingRecord {
                        user_id: u as u64 + 1,
                        item_id: i as u64 + 1,
                        rating: r as f64,
                        timestamp: 0,
                    });
                }
            }
            RatingsDataset::from_records(records, one_to_five()).unwrap()
        })
}

fn triples(records: &[RatingRecord]) -> BTreeSet<(u64, u64, u64)> {
    records
        .iter()
        .map(|r| (r.user_id, r.item_id, (r.rating * 2.0) as u64))
        .collect()
}

fn user_index(dataset: &RatingsDataset, scale_factor: u32) -> InvertedIndex {
    let means = compute_means(dataset);
    let docs = dataset
        .users()
        .map(|u| {
            encode_profile(u, dataset.user_profile(u).unwrap(), means.user_mean[&u], scale_factor)
        })
        .collect();
    InvertedIndex::build(docs, IndexMode::UserBased, scale_factor).unwrap()
}

proptest! {
    #[test]
    fn transpose_consistency(dataset in arb_dataset()) {
        let mut from_users = BTreeSet::new();
        for u in dataset.users() {
            for &(i, r) in dataset.user_profile(u).unwrap() {
                from_users.insert((u, i, (r * 2.0) as u64));
            }
        }
        let mut from_items = BTreeSet::new();
        for i in dataset.items() {
            for &(u, r) in dataset.item_profile(i).unwrap() {
                from_items.insert((u, i, (r * 2.0) as u64));
            }
        }
        prop_assert_eq!(&from_users, &from_items);
        prop_assert_eq!(from_users, triples(dataset.records()));
    }

    #[test]
    fn centered_profile_sums_to_zero(dataset in arb_dataset()) {
        let means = compute_means(&dataset);
        for u in dataset.users() {
            let profile = dataset.user_profile(u).unwrap();
            let total: f64 = profile
                .iter()
                .map(|&(_, r)| mcrx_core::mcr(r, means.user_mean[&u]))
                .sum();
            prop_assert!(total.abs() <= profile.len() as f64 * 1e-12);
        }
    }

    #[test]
    fn split_is_a_partition(dataset in arb_dataset(), seed in any::<u64>(), cut in 1u32..99) {
        let fraction = cut as f64 / 100.0;
        let pair = split(&dataset, fraction, seed).unwrap();
        let train = triples(pair.train.records());
        let test = triples(&pair.test);
        prop_assert!(train.is_disjoint(&test));
        let mut union = train.clone();
        union.extend(test.iter().copied());
        prop_assert_eq!(union, triples(dataset.records()));
        // Cut-point arithmetic: |train|/n within 1/n of the fraction.
        let n = dataset.len() as f64;
        prop_assert!((pair.train.len() as f64 / n - fraction).abs() <= 1.0 / n + 1e-12);
    }

    #[test]
    fn means_are_permutation_invariant(records in arb_records(), seed in any::<u64>()) {
        let a = RatingsDataset::from_records(records.clone(), one_to_five()).unwrap();
        let mut shuffled = records;
        let mut rng = mcrx_core::rng::SplitRng::new(seed);
        rng.shuffle(&mut shuffled);
        let b = RatingsDataset::from_records(shuffled, one_to_five()).unwrap();
        let ma = compute_means(&a);
        let mb = compute_means(&b);
        for mean in ma.user_mean.values().chain(ma.item_mean.values()) {
            prop_assert!(*mean >= one_to_five().min() && *mean <= one_to_five().max());
        }
        prop_assert_eq!(ma.user_mean, mb.user_mean);
        prop_assert_eq!(ma.item_mean, mb.item_mean);
        prop_assert_eq!(ma.global_mean, mb.global_mean);
    }

    #[test]
    fn prefix_flip_duality(dataset in arb_dataset(), scale_factor in prop::sample::select(vec![1u32, 10, 100, 1000])) {
        let means = compute_means(&dataset);
        for u in dataset.users() {
            let doc = encode_profile(u, dataset.user_profile(u).unwrap(), means.user_mean[&u], scale_factor);
            let flipped: BTreeMap<TermId, u32> =
                doc.prate.iter().map(|(t, &f)| (t.flipped(), f)).collect();
            prop_assert_eq!(&flipped, &doc.nrate);
            let nrate_norm: f64 =
                doc.nrate.values().map(|&f| (f as f64).powi(2)).sum::<f64>().sqrt();
            prop_assert!((doc.norm - nrate_norm).abs() < 1e-12);
            // Frequency bound and sign recovery.
            let span = (one_to_five().max() - one_to_five().min()) * scale_factor as f64;
            for (term, &freq) in &doc.prate {
                prop_assert!(freq as f64 <= span + 1e-9);
                let rating = dataset.rating(u, term.raw_id).unwrap();
                let deviation = rating - means.user_mean[&u];
                match term.sign {
                    mcrx_core::Sign::Positive => prop_assert!(deviation > 0.0),
                    mcrx_core::Sign::Negative => prop_assert!(deviation < 0.0),
                }
            }
        }
    }

    #[test]
    fn exact_deviations_quantize_losslessly(dataset in arb_exact_mcr_dataset()) {
        let means = compute_means(&dataset);
        for u in dataset.users() {
            let profile = dataset.user_profile(u).unwrap();
            let mean = means.user_mean[&u];
            let doc = encode_profile(u, profile, mean, 100);
            for &(item, rating) in profile {
                // The true deviation times 100 is an integer by construction.
                let cents = (rating - mean) * 100.0;
                let expected = cents.abs().round() as u32;
                let term = if cents > 0.5 {
                    Some(TermId::positive(item))
                } else if cents < -0.5 {
                    Some(TermId::negative(item))
                } else {
                    None
                };
                if let Some(term) = term {
                    prop_assert_eq!(doc.prate.get(&term).copied(), Some(expected));
                }
            }
        }
    }

    #[test]
    fn mirror_property_across_all_scorers(dataset in arb_dataset(), query_user in 0usize..12) {
        let index = user_index(&dataset, 100);
        let users: Vec<u64> = dataset.users().collect();
        let u = users[query_user % users.len()];
        let means = compute_means(&dataset);
        let query = encode_query(dataset.user_profile(u).unwrap(), means.user_mean[&u], 100);
        let flipped: BTreeMap<TermId, u32> = query.iter().map(|(t, &f)| (t.flipped(), f)).collect();
        for kind in ALL_SCORERS {
            let scorer = ScorerConfig::of_kind(kind);
            let a = index.search(Field::Prate, &query, index.doc_count(), &scorer, None);
            let b = index.search(Field::Nrate, &flipped, index.doc_count(), &scorer, None);
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.doc_id, y.doc_id);
                prop_assert_eq!(x.score, y.score);
            }
        }
    }

    #[test]
    fn merge_antisymmetry(dataset in arb_dataset(), query_user in 0usize..12) {
        let index = user_index(&dataset, 100);
        let users: Vec<u64> = dataset.users().collect();
        let u = users[query_user % users.len()];
        let means = compute_means(&dataset);
        let query = encode_query(dataset.user_profile(u).unwrap(), means.user_mean[&u], 100);
        let flipped: BTreeMap<TermId, u32> = query.iter().map(|(t, &f)| (t.flipped(), f)).collect();
        let depth = index.doc_count().max(1);
        for kind in ALL_SCORERS {
            let scorer = ScorerConfig::of_kind(kind);
            let forward = merge_dual(
                &index.search(Field::Prate, &query, depth, &scorer, None),
                &index.search(Field::Nrate, &query, depth, &scorer, None),
                depth,
            );
            let backward = merge_dual(
                &index.search(Field::Prate, &flipped, depth, &scorer, None),
                &index.search(Field::Nrate, &flipped, depth, &scorer, None),
                depth,
            );
            let forward_map: BTreeMap<u64, f64> =
                forward.iter().map(|n| (n.neighbor_id, n.similarity)).collect();
            let backward_map: BTreeMap<u64, f64> =
                backward.iter().map(|n| (n.neighbor_id, n.similarity)).collect();
            prop_assert_eq!(forward_map.len(), backward_map.len());
            for (id, score) in &forward_map {
                prop_assert_eq!(-score, backward_map[id]);
            }
        }
    }

    #[test]
    fn index_knn_matches_exhaustive_acs(dataset in arb_exact_mcr_dataset()) {
        let means = compute_means(&dataset);
        let index = user_index(&dataset, 100);
        for u in dataset.users() {
            let profile = dataset.user_profile(u).unwrap();
            let mean = means.user_mean[&u];
            let query = encode_query(profile, mean, 100);
            if query.is_empty() {
                continue;
            }
            let query_norm: f64 =
                query.values().map(|&f| (f as f64).powi(2)).sum::<f64>().sqrt();
            let depth = index.doc_count();
            let merged = merge_dual(
                &index.search(Field::Prate, &query, depth, &ScorerConfig::tf(), Some(u)),
                &index.search(Field::Nrate, &query, depth, &ScorerConfig::tf(), Some(u)),
                depth,
            );
            for neighbor in merged {
                let other = dataset.user_profile(neighbor.neighbor_id).unwrap();
                let expected = acs(profile, other, mean, means.user_mean[&neighbor.neighbor_id]);
                prop_assert!(
                    (neighbor.similarity / query_norm - expected.value).abs() <= 1e-9,
                    "user {} vs {}: merged {} acs {}",
                    u,
                    neighbor.neighbor_id,
                    neighbor.similarity / query_norm,
                    expected.value
                );
            }
        }
    }

    #[test]
    fn exhaustive_knn_is_sorted_and_self_free(dataset in arb_dataset(), k in 1usize..8) {
        let means = compute_means(&dataset);
        for u in dataset.users() {
            let neighbors = knn_exhaustive(&dataset, &means, u, IndexMode::UserBased, k);
            prop_assert!(neighbors.len() <= k);
            prop_assert!(neighbors.iter().all(|n| n.neighbor_id != u));
            for pair in neighbors.windows(2) {
                let ordered = pair[0].similarity > pair[1].similarity
                    || (pair[0].similarity == pair[1].similarity
                        && pair[0].neighbor_id < pair[1].neighbor_id);
                prop_assert!(ordered);
            }
        }
    }

    #[test]
    fn scorers_are_non_negative(dataset in arb_dataset(), query_user in 0usize..12) {
        let index = user_index(&dataset, 100);
        let users: Vec<u64> = dataset.users().collect();
        let u = users[query_user % users.len()];
        let means = compute_means(&dataset);
        let query = encode_query(dataset.user_profile(u).unwrap(), means.user_mean[&u], 100);
        for kind in ALL_SCORERS {
            let scorer = ScorerConfig::of_kind(kind);
            for field in Field::ALL {
                for hit in index.search(field, &query, index.doc_count(), &scorer, None) {
                    prop_assert!(hit.score >= 0.0, "{:?} produced {}", kind, hit.score);
                }
            }
        }
    }

    #[test]
    fn prediction_is_scale_invariant(
        dataset in arb_dataset(),
        sims in proptest::collection::vec(-1.0f64..1.0, 1..6),
        factor in 0.01f64..100.0,
    ) {
        let means = compute_means(&dataset);
        let users: Vec<u64> = dataset.users().collect();
        let items: Vec<u64> = dataset.items().collect();
        let neighbors: Vec<ScoredNeighbor> = sims
            .iter()
            .enumerate()
            .map(|(i, &s)| ScoredNeighbor {
                neighbor_id: users[i % users.len()],
                similarity: s,
            })
            .collect();
        let scaled: Vec<ScoredNeighbor> = neighbors
            .iter()
            .map(|n| ScoredNeighbor { neighbor_id: n.neighbor_id, similarity: n.similarity * factor })
            .collect();
        let target_user = users[0];
        let target_item = items[0];
        let a = predict_user_based(target_user, target_item, &neighbors, &dataset, &means);
        let b = predict_user_based(target_user, target_item, &scaled, &dataset, &means);
        prop_assert_eq!(a.source, b.source);
        prop_assert!((a.value - b.value).abs() < 1e-9);
    }

    #[test]
    fn rounded_predictions_sit_on_the_scale(value in -10.0f64..10.0) {
        for scale in [RatingScale::one_to_five(), RatingScale::half_to_five()] {
            let rounded = round_to_scale(value, &scale);
            prop_assert!(rounded >= scale.min() && rounded <= scale.max());
            let steps = (rounded - scale.min()) / scale.step();
            prop_assert!((steps - steps.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn mae_is_non_negative(
        pairs in proptest::collection::vec((1.0f64..5.0, 1.0f64..5.0), 1..50)
    ) {
        let (preds, truths): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!(mae(&preds, &truths).unwrap() >= 0.0);
    }
}

/// The worked pair from the encoding scheme: Pearson sees perfect
/// correlation where the adjusted cosine does not.
#[test]
fn pearson_vs_acs_discrepancy_fixture() {
    let u = [(1u64, 5.0), (2, 3.0), (3, 4.0)];
    let a = [(1u64, 4.0), (2, 2.0), (4, 5.0)];
    let p = mcrx_core::pearson(&u, &a);
    let c = acs(&u, &a, 4.0, 11.0 / 3.0);
    assert!((p.value - 1.0).abs() < 1e-12);
    assert!((c.value - 0.832_050_294_337_843_7).abs() < 1e-12);
}
