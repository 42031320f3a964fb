//! Deterministic synthetic rating corpora.
//!
//! Two generators back the benchmark and acceptance suites:
//!
//! - [`CorpusConfig::generate`] draws a MovieLens-shaped corpus from a latent
//!   factor model (global mean + user bias + item bias + low-rank interaction
//!   + noise, quantized to the rating scale) with Zipf-like item popularity
//!   and user activity. Real collaborative-filtering structure emerges, so
//!   neighborhood methods behave qualitatively as they do on the public
//!   datasets.
//! - [`dense_exact_grid`] produces a fully dense integer-rated matrix whose
//!   profile lengths divide 100, making every mean-centered rate an exact
//!   multiple of 0.01. That is the corpus family on which the index-backed
//!   similarity is provably identical to the exact adjusted cosine.
//!
//! Both are pure functions of their seeds.

use mcrx_core::rng::SplitRng;
use mcrx_core::{round_to_scale, RatingRecord, RatingScale, RatingsDataset};

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub users: u64,
    pub items: u64,
    pub target_ratings: usize,
    pub min_ratings_per_user: usize,
    pub scale: RatingScale,
    pub latent_dim: usize,
    pub latent_sigma: f64,
    pub user_bias_sigma: f64,
    pub item_bias_sigma: f64,
    pub noise_sigma: f64,
    pub global_mean: f64,
    pub popularity_exponent: f64,
    pub activity_exponent: f64,
    pub seed: u64,
}

impl CorpusConfig {
    /// The 943 x 1682 / 100K-rating shape of MovieLens 100K on the 1..5 grid.
    pub fn movielens_100k_shaped(seed: u64) -> Self {
        CorpusConfig {
            users: 943,
            items: 1682,
            target_ratings: 100_000,
            min_ratings_per_user: 20,
            scale: RatingScale::one_to_five(),
            latent_dim: 8,
            latent_sigma: 0.44,
            user_bias_sigma: 0.5,
            item_bias_sigma: 0.45,
            noise_sigma: 0.4,
            global_mean: 3.53,
            popularity_exponent: 0.8,
            activity_exponent: 0.7,
            seed,
        }
    }

    pub fn generate(&self) -> RatingsDataset {
        let mut rng = SplitRng::new(self.seed);
        let users = self.users as usize;
        let items = self.items as usize;

        // Zipf-like popularity and activity, assigned by shuffled rank so ids
        // carry no ordering signal.
        let item_weights = zipf_weights(items, self.popularity_exponent, &mut rng);
        let activity = zipf_weights(users, self.activity_exponent, &mut rng);
        let activity_total: f64 = activity.iter().sum();

        let user_bias: Vec<f64> =
            (0..users).map(|_| gaussian(&mut rng) * self.user_bias_sigma).collect();
        let item_bias: Vec<f64> =
            (0..items).map(|_| gaussian(&mut rng) * self.item_bias_sigma).collect();
        let user_factors = factor_matrix(users, self.latent_dim, self.latent_sigma, &mut rng);
        let item_factors = factor_matrix(items, self.latent_dim, self.latent_sigma, &mut rng);

        let mut records = Vec::with_capacity(self.target_ratings);
        let mut keys: Vec<(f64, u32)> = Vec::with_capacity(items);
        for u in 0..users {
            let share = activity[u] / activity_total * self.target_ratings as f64;
            let count = (share.round() as usize).clamp(self.min_ratings_per_user, items);

            // Weighted sampling without replacement: exponential keys, take
            // the `count` smallest.
            keys.clear();
            keys.extend((0..items).map(|i| {
                let uniform = 1.0 - rng.next_f64();
                (-uniform.ln() / item_weights[i], i as u32)
            }));
            if count < keys.len() {
                keys.select_nth_unstable_by(count - 1, |a, b| a.0.total_cmp(&b.0));
                keys.truncate(count);
            }

            for &(_, i) in keys.iter() {
                let i = i as usize;
                let interaction: f64 = user_factors[u]
                    .iter()
                    .zip(&item_factors[i])
                    .map(|(a, b)| a * b)
                    .sum();
                let raw = self.global_mean
                    + user_bias[u]
                    + item_bias[i]
                    + interaction
                    + gaussian(&mut rng) * self.noise_sigma;
                records.push(RatingRecord {
                    user_id: u as u64 + 1,
                    item_id: i as u64 + 1,
                    rating: round_to_scale(raw, &self.scale),
                    timestamp: (u * items + i) as i64,
                });
            }
        }
        RatingsDataset::from_records(records, self.scale)
            .expect("generated ratings are on-scale and duplicate-free")
    }
}

/// Dense `users x items` corpus with uniform integer ratings 1..=5. Profile
/// means lie on the 0.01 grid whenever the profile length divides 100 (user
/// profiles have length `items`, item profiles length `users`), making the
/// scale-100 encoding lossless for that orientation; density makes every
/// pair's co-rated overlap span both full profiles.
pub fn dense_exact_grid(users: u64, items: u64, seed: u64) -> RatingsDataset {
    let mut rng = SplitRng::new(seed);
    let mut records = Vec::with_capacity((users * items) as usize);
    for user_id in 1..=users {
        for item_id in 1..=items {
            records.push(RatingRecord {
                user_id,
                item_id,
                rating: (rng.next_below(5) + 1) as f64,
                timestamp: 0,
            });
        }
    }
    RatingsDataset::from_records(records, RatingScale::one_to_five())
        .expect("dense integer grid is always valid")
}

fn zipf_weights(n: usize, exponent: f64, rng: &mut SplitRng) -> Vec<f64> {
    let mut ranks: Vec<u32> = (0..n as u32).collect();
    rng.shuffle(&mut ranks);
    ranks.into_iter().map(|r| 1.0 / (r as f64 + 1.0).powf(exponent)).collect()
}

fn factor_matrix(rows: usize, dim: usize, sigma: f64, rng: &mut SplitRng) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..dim).map(|_| gaussian(rng) * sigma).collect())
        .collect()
}

/// Standard normal via Box-Muller.
fn gaussian(rng: &mut SplitRng) -> f64 {
    let u1 = 1.0 - rng.next_f64();
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
