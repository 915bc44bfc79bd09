use std::collections::{HashMap, HashSet};

use super::{McStrategy, RerankError};
use crate::baselines::CandidateLists;
use crate::corpus::{GroupAssignment, InteractionLog};
use crate::ids::Id;

/// What the consumer-benefit estimator is measured against.
#[derive(Debug, Clone, Copy, Default)]
pub struct McInputs<'a> {
    /// Validation split for `validation-dcg`, training split for `train-dcg`.
    pub ground_truth: Option<&'a InteractionLog>,
    /// Whether candidate lists had training items removed.
    pub train_items_excluded: bool,
}

/// Per-slot consumer benefit for one user's candidate list.
///
/// `score-proxy` min-max normalises the list's scores; the DCG strategies
/// give `1/log2(pos + 1)` to slots whose item is in the user's ground-truth
/// set and 0 elsewhere.
pub fn mc_estimate(
    items: &[Id],
    scores: &[f64],
    relevant: Option<&HashSet<Id>>,
    strategy: McStrategy,
) -> Vec<f64> {
    match strategy {
        McStrategy::ScoreProxy => {
            let mut v = scores.to_vec();
            crate::baselines::min_max_normalize(&mut v);
            v
        }
        McStrategy::ValidationDcg | McStrategy::TrainDcg => items
            .iter()
            .enumerate()
            .map(|(j, item)| {
                if relevant.is_some_and(|r| r.contains(item)) {
                    discount(j + 1)
                } else {
                    0.0
                }
            })
            .collect(),
    }
}

/// `1 / log2(pos + 1)` for a 1-based position.
#[inline]
pub fn discount(pos: usize) -> f64 {
    1.0 / ((pos + 1) as f64).log2()
}

/// Per-slot producer benefit: one unit of exposure per slot.
pub fn mp_estimate(items: &[Id]) -> Vec<f64> {
    vec![1.0; items.len()]
}

/// Benefit estimates and their signed versions for every candidate slot,
/// row-major over (user, position).
#[derive(Debug, Clone, PartialEq)]
pub struct BenefitTables {
    n_users: usize,
    list_len: usize,
    pub mc: Vec<f64>,
    pub mp: Vec<f64>,
    /// `UG_u * mc`
    pub cf: Vec<f64>,
    /// `PG_i * mp`
    pub pf: Vec<f64>,
}

impl BenefitTables {
    pub fn build(
        candidates: &CandidateLists,
        groups: &GroupAssignment,
        strategy: McStrategy,
        inputs: McInputs<'_>,
    ) -> Result<Self, RerankError> {
        let relevant: Option<HashMap<Id, HashSet<Id>>> = match strategy {
            McStrategy::ScoreProxy => None,
            McStrategy::TrainDcg if inputs.train_items_excluded => {
                return Err(RerankError::Estimator(
                    "train-dcg needs candidate lists that keep training items; \
                     with seen-item exclusion on it is identically zero"
                        .into(),
                ))
            }
            McStrategy::ValidationDcg | McStrategy::TrainDcg => {
                let truth = inputs.ground_truth.ok_or_else(|| {
                    RerankError::Estimator(format!("{strategy} needs a ground-truth split"))
                })?;
                Some(truth.user_item_sets())
            }
        };
        let n = candidates.list_len();
        let total = candidates.n_users() * n;
        let mut tables = BenefitTables {
            n_users: candidates.n_users(),
            list_len: n,
            mc: Vec::with_capacity(total),
            mp: Vec::with_capacity(total),
            cf: Vec::with_capacity(total),
            pf: Vec::with_capacity(total),
        };
        for (user, items, scores) in candidates.rows() {
            let rel = relevant.as_ref().and_then(|r| r.get(user));
            let mc = mc_estimate(items, scores, rel, strategy);
            let mp = mp_estimate(items);
            let ug = groups.user_sign(user).value();
            tables.cf.extend(mc.iter().map(|v| ug * v));
            tables
                .pf
                .extend(items.iter().zip(&mp).map(|(i, v)| groups.item_sign(i).value() * v));
            tables.mc.extend(mc);
            tables.mp.extend(mp);
        }
        Ok(tables)
    }

    /// Tables from raw per-slot values; `cf` and `pf` are derived from the
    /// signs given per row and per slot.
    pub fn from_parts(
        list_len: usize,
        mc: Vec<f64>,
        mp: Vec<f64>,
        user_signs: &[f64],
        item_signs: &[f64],
    ) -> Self {
        let n_users = user_signs.len();
        assert_eq!(mc.len(), n_users * list_len);
        assert_eq!(mp.len(), n_users * list_len);
        assert_eq!(item_signs.len(), n_users * list_len);
        let cf = mc
            .iter()
            .enumerate()
            .map(|(idx, v)| user_signs[idx / list_len] * v)
            .collect();
        let pf = mp.iter().zip(item_signs).map(|(v, s)| s * v).collect();
        BenefitTables {
            n_users,
            list_len,
            mc,
            mp,
            cf,
            pf,
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn list_len(&self) -> usize {
        self.list_len
    }

    pub(crate) fn check_shape(&self, candidates: &CandidateLists) -> Result<(), RerankError> {
        if self.n_users != candidates.n_users() || self.list_len != candidates.list_len() {
            return Err(RerankError::Mismatch(format!(
                "benefit tables are {}x{} but candidates are {}x{}",
                self.n_users,
                self.list_len,
                candidates.n_users(),
                candidates.list_len()
            )));
        }
        Ok(())
    }
}
