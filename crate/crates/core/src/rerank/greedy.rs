use std::cmp::Ordering;

use rayon::prelude::*;

use super::{BenefitTables, FairnessParams, Objective, RerankError, SelectionResult};
use crate::baselines::CandidateLists;
use crate::corpus::GroupAssignment;

/// Adjusted scores `S + lambda1 * CF + lambda2 * PF`, row-major.
pub fn adjusted_scores(
    candidates: &CandidateLists,
    groups: &GroupAssignment,
    benefits: &BenefitTables,
    params: &FairnessParams,
) -> Result<Vec<f64>, RerankError> {
    benefits.check_shape(candidates)?;
    let (l1, l2) = params.effective_lambdas(groups);
    Ok(adjust(candidates.score_matrix(), benefits, l1, l2))
}

pub(crate) fn adjust(scores: &[f64], benefits: &BenefitTables, l1: f64, l2: f64) -> Vec<f64> {
    scores
        .iter()
        .zip(&benefits.cf)
        .zip(&benefits.pf)
        .map(|((s, cf), pf)| s + l1 * cf + l2 * pf)
        .collect()
}

/// Higher adjusted score first, then the earlier original position.
#[inline]
fn slot_order(adjusted: &[f64], a: u32, b: u32) -> Ordering {
    adjusted[b as usize]
        .total_cmp(&adjusted[a as usize])
        .then(a.cmp(&b))
}

/// Picks the `k` best slots of one row and writes them, in fair order, to
/// `order`; `mask` gets the matching indicator vector.
#[inline]
pub(crate) fn select_row(adjusted: &[f64], k: usize, idx: &mut Vec<u32>, order: &mut [u32], mask: &mut [bool]) {
    idx.clear();
    idx.extend(0..adjusted.len() as u32);
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| slot_order(adjusted, a, b));
    }
    let top = &mut idx[..k];
    top.sort_unstable_by(|&a, &b| slot_order(adjusted, a, b));
    mask.fill(false);
    for (slot, &pos) in order.iter_mut().zip(top.iter()) {
        *slot = pos;
        mask[pos as usize] = true;
    }
}

fn prepare(
    candidates: &CandidateLists,
    groups: &GroupAssignment,
    benefits: &BenefitTables,
    params: &FairnessParams,
) -> Result<(f64, f64), RerankError> {
    params.validate()?;
    benefits.check_shape(candidates)?;
    if candidates.list_len() != params.n {
        return Err(RerankError::Mismatch(format!(
            "candidate lists have length {} but N = {}",
            candidates.list_len(),
            params.n
        )));
    }
    Ok(params.effective_lambdas(groups))
}

/// Per user, keeps the `K` candidates with the highest adjusted score.
///
/// Because every slot carries the same weight and each user must receive
/// exactly `K` items, the joint objective decomposes into independent
/// per-user cardinality-constrained selections, and this top-K choice is an
/// exact optimum. Runs in `O(n * N)` plus `O(n * K log K)` for ordering.
pub fn greedy_rerank(
    candidates: &CandidateLists,
    groups: &GroupAssignment,
    benefits: &BenefitTables,
    params: &FairnessParams,
) -> Result<SelectionResult, RerankError> {
    let (l1, l2) = prepare(candidates, groups, benefits, params)?;
    let n = params.n;
    let k = params.k;
    let rows = candidates.n_users();
    let adjusted = adjust(candidates.score_matrix(), benefits, l1, l2);
    let mut order = vec![0u32; rows * k];
    let mut mask = vec![false; rows * n];
    let mut idx = Vec::with_capacity(n);
    for ((adj, ord), m) in adjusted
        .chunks_exact(n)
        .zip(order.chunks_exact_mut(k))
        .zip(mask.chunks_exact_mut(n))
    {
        select_row(adj, k, &mut idx, ord, m);
    }
    let objective = Objective::evaluate(candidates, benefits, l1, l2, &mask);
    Ok(SelectionResult::new(n, k, mask, order, adjusted, objective))
}

/// Same as [`greedy_rerank`], with users processed in parallel. The result
/// does not depend on scheduling.
pub fn par_greedy_rerank(
    candidates: &CandidateLists,
    groups: &GroupAssignment,
    benefits: &BenefitTables,
    params: &FairnessParams,
) -> Result<SelectionResult, RerankError> {
    let (l1, l2) = prepare(candidates, groups, benefits, params)?;
    let n = params.n;
    let k = params.k;
    let rows = candidates.n_users();
    let adjusted = adjust(candidates.score_matrix(), benefits, l1, l2);
    let mut order = vec![0u32; rows * k];
    let mut mask = vec![false; rows * n];
    adjusted
        .par_chunks_exact(n)
        .zip(order.par_chunks_exact_mut(k))
        .zip(mask.par_chunks_exact_mut(n))
        .for_each_init(
            || Vec::with_capacity(n),
            |idx, ((adj, ord), m)| select_row(adj, k, idx, ord, m),
        );
    let objective = Objective::evaluate(candidates, benefits, l1, l2, &mask);
    Ok(SelectionResult::new(n, k, mask, order, adjusted, objective))
}
