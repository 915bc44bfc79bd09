//! Synthetic implicit-feedback corpora with a popularity long tail and
//! latent user tastes, for experiments and tests that need realistic skew
//! without shipping a dataset.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Interaction, InteractionLog};
use crate::ids::Id;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    /// Mean interactions per user before any filtering.
    pub mean_interactions: f64,
    /// Smallest per-user interaction count.
    pub min_interactions: usize,
    /// Zipf exponent of item popularity.
    pub popularity_exponent: f64,
    /// Pareto shape of user activity (larger means less skew).
    pub activity_shape: f64,
    pub latent_dims: usize,
    /// How strongly latent affinity, as opposed to popularity, drives choices.
    pub taste_strength: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 1000,
            items: 800,
            mean_interactions: 40.0,
            min_interactions: 10,
            popularity_exponent: 0.9,
            activity_shape: 1.6,
            latent_dims: 8,
            taste_strength: 1.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Roughly the size and sparsity of MovieLens-100k after 5-core filtering.
    pub fn movielens_scale(seed: u64) -> Self {
        SynthConfig {
            users: 943,
            items: 1349,
            mean_interactions: 105.0,
            min_interactions: 20,
            popularity_exponent: 0.85,
            activity_shape: 1.4,
            latent_dims: 10,
            taste_strength: 1.5,
            seed,
        }
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws a corpus. Users are `0..users`, items `0..items`; which item id is
/// popular is random, so identifier order carries no signal.
pub fn generate(config: &SynthConfig) -> InteractionLog {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = config.items;
    let d = config.latent_dims.max(1);

    let mut popularity_rank: Vec<usize> = (0..m).collect();
    popularity_rank.shuffle(&mut rng);
    let log_pop: Vec<f64> = popularity_rank
        .iter()
        .map(|&r| -config.popularity_exponent * ((r + 1) as f64).ln())
        .collect();
    let item_vecs: Vec<f64> = (0..m * d).map(|_| standard_normal(&mut rng)).collect();

    // Pareto activity, rescaled to the requested mean
    let raw: Vec<f64> = (0..config.users)
        .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / config.activity_shape))
        .collect();
    let raw_mean = raw.iter().sum::<f64>() / raw.len().max(1) as f64;
    let extra = (config.mean_interactions - config.min_interactions as f64).max(0.0);
    let cap = m * 3 / 4;

    let scale = config.taste_strength / (d as f64).sqrt();
    let mut rows = Vec::new();
    let mut user_vec = vec![0.0; d];
    let mut keys: Vec<(f64, usize)> = Vec::with_capacity(m);
    for (u, a) in raw.iter().enumerate() {
        let count = ((config.min_interactions as f64 + extra * a / raw_mean).round() as usize)
            .clamp(1, cap.max(1));
        for v in user_vec.iter_mut() {
            *v = standard_normal(&mut rng);
        }
        // weighted sampling without replacement: largest ln(U)/w wins
        keys.clear();
        for i in 0..m {
            let affinity: f64 = user_vec
                .iter()
                .zip(&item_vecs[i * d..(i + 1) * d])
                .map(|(x, y)| x * y)
                .sum();
            let log_w = log_pop[i] + scale * affinity;
            let uniform: f64 = 1.0 - rng.random::<f64>();
            keys.push((uniform.ln().ln_neg() - log_w, i));
        }
        keys.select_nth_unstable_by(count - 1, |a, b| a.0.total_cmp(&b.0));
        for &(_, i) in &keys[..count] {
            rows.push(Interaction::new(Id::from(u as u64), Id::from(i as u64), 1.0));
        }
    }
    InteractionLog::from_interactions(rows).expect("synthetic weights are valid")
}

trait LnNeg {
    fn ln_neg(self) -> f64;
}

impl LnNeg for f64 {
    /// `ln(-x)` for negative `x`.
    fn ln_neg(self) -> f64 {
        (-self).ln()
    }
}

/// Writes a log as `user<TAB>item<TAB>weight` lines.
pub fn to_tsv(log: &InteractionLog) -> String {
    let mut out = String::with_capacity(log.len() * 12);
    for it in log.interactions() {
        out.push_str(it.user.as_str());
        out.push('\t');
        out.push_str(it.item.as_str());
        out.push('\t');
        out.push_str(&it.weight.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_skewed() {
        let cfg = SynthConfig { users: 200, items: 150, ..SynthConfig::default() };
        let a = generate(&cfg);
        assert_eq!(a, generate(&cfg));
        let mut counts: Vec<usize> = a.item_counts().into_values().collect();
        counts.sort_unstable_by(|x, y| y.cmp(x));
        let head: usize = counts[..counts.len() / 5].iter().sum();
        // the top fifth of items collects well over a fifth of the feedback
        assert!(head as f64 > 0.35 * a.len() as f64, "head share {}", head as f64 / a.len() as f64);
    }

    #[test]
    fn respects_minimum_activity() {
        let cfg = SynthConfig { users: 100, items: 120, min_interactions: 12, ..SynthConfig::default() };
        let log = generate(&cfg);
        assert!(log.user_counts().values().all(|&c| c >= 12));
    }
}
