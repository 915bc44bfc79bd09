//! Consumer- and producer-fair re-ranking of candidate lists.
//!
//! The objective for a binary selection `A` (one row per user, one column
//! per candidate position, exactly `K` ones per row) is
//!
//! ```text
//! sum_u sum_i S[u,i] A[u,i]  -  lambda1 * DCF(A)  -  lambda2 * DPF(A)
//! ```
//!
//! where `DCF(A)` is the consumer benefit collected by active users minus the
//! benefit collected by inactive users, and `DPF(A)` is the exposure given to
//! short-head items minus the exposure given to long-tail items. Both are
//! linear in `A`, so the objective equals `sum A[u,i] * Ŝ[u,i]` with the
//! adjusted score `Ŝ = S + lambda1 * UG_u * MC + lambda2 * PG_i * MP`.

mod benefits;
mod greedy;
mod oracle;
mod output;
mod params;

use thiserror::Error;

use crate::baselines::{CandidateLists, RankedLists};

pub use benefits::{discount, mc_estimate, mp_estimate, BenefitTables, McInputs};
pub use greedy::{adjusted_scores, greedy_rerank, par_greedy_rerank};
pub use oracle::{exhaustive_oracle, ORACLE_GUARD};
pub use output::RerankSidecar;
pub use params::{FairnessParams, McStrategy, Mode};

#[derive(Debug, Error)]
pub enum RerankError {
    #[error("invalid fairness parameters: {0}")]
    InvalidParams(String),
    #[error("consumer-benefit estimator: {0}")]
    Estimator(String),
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    #[error("user {user}: C({n}, {k}) = {combinations} subsets exceeds the enumeration guard")]
    GuardExceeded {
        user: crate::ids::Id,
        n: usize,
        k: usize,
        combinations: u128,
    },
}

/// Objective value and its three linear parts.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Objective {
    pub value: f64,
    /// `sum S * A`
    pub relevance: f64,
    /// Consumer-benefit total of active users minus that of inactive users.
    pub dcf: f64,
    /// Short-head exposure minus long-tail exposure.
    pub dpf: f64,
}

impl Objective {
    /// Evaluates the objective of a selection mask with the applied weights.
    pub fn evaluate(
        candidates: &CandidateLists,
        benefits: &BenefitTables,
        lambda1: f64,
        lambda2: f64,
        mask: &[bool],
    ) -> Objective {
        let mut relevance = 0.0;
        let mut dcf = 0.0;
        let mut dpf = 0.0;
        let scores = candidates.score_matrix();
        for (idx, _) in mask.iter().enumerate().filter(|(_, a)| **a) {
            relevance += scores[idx];
            dcf -= benefits.cf[idx];
            dpf -= benefits.pf[idx];
        }
        Objective {
            value: relevance - lambda1 * dcf - lambda2 * dpf,
            relevance,
            dcf,
            dpf,
        }
    }
}

/// The selection matrix `A` plus the fair order of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    n: usize,
    k: usize,
    mask: Vec<bool>,
    order: Vec<u32>,
    adjusted: Vec<f64>,
    objective: Objective,
}

impl SelectionResult {
    pub(crate) fn new(
        n: usize,
        k: usize,
        mask: Vec<bool>,
        order: Vec<u32>,
        adjusted: Vec<f64>,
        objective: Objective,
    ) -> Self {
        SelectionResult {
            n,
            k,
            mask,
            order,
            adjusted,
            objective,
        }
    }

    pub fn n_users(&self) -> usize {
        self.order.len() / self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Row `row` of `A`.
    pub fn selection(&self, row: usize) -> &[bool] {
        &self.mask[row * self.n..(row + 1) * self.n]
    }

    /// Selected candidate positions (0-based) in fair order.
    pub fn fair_positions(&self, row: usize) -> &[u32] {
        &self.order[row * self.k..(row + 1) * self.k]
    }

    pub fn adjusted(&self, row: usize) -> &[f64] {
        &self.adjusted[row * self.n..(row + 1) * self.n]
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn objective_value(&self) -> f64 {
        self.objective.value
    }

    /// The fair top-K lists; scores are the adjusted scores.
    pub fn fair_lists(&self, candidates: &CandidateLists) -> RankedLists {
        let mut out = RankedLists::with_capacity(candidates.n_users(), self.k);
        for (row, user) in candidates.users().iter().enumerate() {
            let items = candidates.items(row);
            let adjusted = self.adjusted(row);
            out.push_row(
                user.clone(),
                self.fair_positions(row)
                    .iter()
                    .map(|&p| (items[p as usize].clone(), adjusted[p as usize])),
            );
        }
        out
    }
}
