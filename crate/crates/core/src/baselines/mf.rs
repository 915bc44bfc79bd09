//! A small pointwise matrix-factorisation recommender trained with SGD on
//! logistic loss and uniformly sampled negatives. It is a desk-scale stand-in
//! for stronger learned baselines, not a reproduction of any of them.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{top_n_normalized, BaselineError, CandidateLists, SeenItems};
use crate::corpus::InteractionLog;
use crate::ids::Id;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct MfConfig {
    pub factors: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub regularization: f64,
    pub seed: u64,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig {
            factors: 32,
            epochs: 20,
            learning_rate: 0.05,
            negatives_per_positive: 4,
            regularization: 0.005,
            seed: 0,
        }
    }
}

/// Trained factor tables.
#[derive(Debug, Clone, PartialEq)]
pub struct MfModel {
    users: Vec<Id>,
    items: Vec<Id>,
    factors: usize,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
    item_bias: Vec<f64>,
}

impl MfModel {
    pub fn users(&self) -> &[Id] {
        &self.users
    }

    pub fn items(&self) -> &[Id] {
        &self.items
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn user_factors(&self) -> &[f64] {
        &self.user_factors
    }

    pub fn item_factors(&self) -> &[f64] {
        &self.item_factors
    }

    fn user_row(&self, u: usize) -> &[f64] {
        &self.user_factors[u * self.factors..(u + 1) * self.factors]
    }

    fn item_row(&self, i: usize) -> &[f64] {
        &self.item_factors[i * self.factors..(i + 1) * self.factors]
    }

    /// Raw (unnormalised) score of item index `i` for user index `u`.
    pub fn score(&self, u: usize, i: usize) -> f64 {
        self.item_bias[i] + dot(self.user_row(u), self.item_row(i))
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-log sigmoid(x)` without overflow.
#[inline]
fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn train_mf(train: &InteractionLog, config: &MfConfig) -> Result<MfModel, BaselineError> {
    if config.factors == 0 {
        return Err(BaselineError::InvalidParameter("factors must be at least 1".into()));
    }
    if train.is_empty() {
        return Err(BaselineError::InvalidParameter("training log is empty".into()));
    }
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(BaselineError::InvalidParameter(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    let users = train.users();
    let items = train.items();
    let user_index: HashMap<&Id, usize> = users.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let item_index: HashMap<&Id, usize> = items.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let positives: Vec<(usize, usize)> = train
        .interactions()
        .iter()
        .map(|it| (user_index[&it.user], item_index[&it.item]))
        .collect();
    let mut positive_sets: Vec<HashSet<usize>> = vec![HashSet::new(); users.len()];
    for &(u, i) in &positives {
        positive_sets[u].insert(i);
    }

    let f = config.factors;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = 0.1 / (f as f64).sqrt();
    let mut init = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-scale..scale)).collect()
    };
    let mut model = MfModel {
        user_factors: init(users.len() * f),
        item_factors: init(items.len() * f),
        item_bias: vec![0.0; items.len()],
        users,
        items,
        factors: f,
    };

    let lr = config.learning_rate;
    let reg = config.regularization;
    let n_items = model.items.len();
    let mut order: Vec<usize> = (0..positives.len()).collect();
    let mut grad_u = vec![0.0; f];
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for &p in &order {
            let (u, i) = positives[p];
            let mut step = |item: usize, label: f64, grad_u: &mut [f64]| -> f64 {
                let x = model.score(u, item);
                let g = label - sigmoid(x);
                let uo = u * f;
                let io = item * f;
                for k in 0..f {
                    let pu = model.user_factors[uo + k];
                    let qi = model.item_factors[io + k];
                    grad_u[k] = g * qi - reg * pu;
                    model.item_factors[io + k] += lr * (g * pu - reg * qi);
                }
                for k in 0..f {
                    model.user_factors[uo + k] += lr * grad_u[k];
                }
                model.item_bias[item] += lr * (g - reg * model.item_bias[item]);
                if label > 0.5 {
                    softplus_neg(x)
                } else {
                    softplus_neg(-x)
                }
            };
            loss += step(i, 1.0, &mut grad_u);
            for _ in 0..config.negatives_per_positive {
                let mut j = rng.random_range(0..n_items);
                let mut tries = 0;
                while positive_sets[u].contains(&j) && tries < 16 {
                    j = rng.random_range(0..n_items);
                    tries += 1;
                }
                if positive_sets[u].contains(&j) {
                    continue;
                }
                loss += step(j, 0.0, &mut grad_u);
            }
        }
        if !loss.is_finite() {
            return Err(BaselineError::Divergence { epoch, loss });
        }
        log::debug!("mf epoch {epoch}: loss {loss:.4}");
    }
    Ok(model)
}

/// Scores every unseen catalog item for every model user and keeps the top `n`.
pub fn recommend_mf(
    model: &MfModel,
    n: usize,
    seen: &SeenItems,
) -> Result<CandidateLists, BaselineError> {
    if n == 0 {
        return Err(BaselineError::InvalidParameter("N must be positive".into()));
    }
    let rows: Vec<Vec<(Id, f64)>> = (0..model.users.len())
        .into_par_iter()
        .map(|u| {
            let user = &model.users[u];
            let scored: Vec<(Id, f64)> = (0..model.items.len())
                .filter(|&i| !seen.contains(user, &model.items[i]))
                .map(|i| (model.items[i].clone(), model.score(u, i)))
                .collect();
            top_n_normalized(user, scored, n)
        })
        .collect::<Result<_, _>>()?;
    let mut lists = CandidateLists::with_capacity(model.users.len(), n);
    for (user, row) in model.users.iter().zip(rows) {
        lists.push_row(user.clone(), row);
    }
    Ok(lists)
}
