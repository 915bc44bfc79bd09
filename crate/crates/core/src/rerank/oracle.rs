use super::greedy::{adjust, select_row};
use super::{BenefitTables, FairnessParams, Objective, RerankError, SelectionResult};
use crate::baselines::CandidateLists;
use crate::corpus::GroupAssignment;

/// Largest number of subsets enumerated per user.
pub const ORACLE_GUARD: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact optimum by enumerating every `K`-subset of each user's candidates.
///
/// The objective separates over users, so per-user maxima add up to the
/// global maximum. Per-subset value is computed straight from the group
/// memberships and the raw benefits, not from the signed tables the greedy
/// path uses. Equal-valued subsets resolve to the lexicographically first.
pub fn exhaustive_oracle(
    candidates: &CandidateLists,
    groups: &GroupAssignment,
    benefits: &BenefitTables,
    params: &FairnessParams,
) -> Result<SelectionResult, RerankError> {
    params.validate()?;
    benefits.check_shape(candidates)?;
    let n = candidates.list_len();
    let k = params.k;
    if n != params.n {
        return Err(RerankError::Mismatch(format!(
            "candidate lists have length {n} but N = {}",
            params.n
        )));
    }
    let combos = binomial(n, k);
    if combos > ORACLE_GUARD {
        return Err(RerankError::GuardExceeded {
            user: candidates.users().first().cloned().unwrap_or_else(|| "".into()),
            n,
            k,
            combinations: combos,
        });
    }
    let (l1, l2) = params.effective_lambdas(groups);

    let mut mask = vec![false; candidates.n_users() * n];
    for (row, (user, items, scores)) in candidates.rows().enumerate() {
        let active = groups.is_active(user);
        let mc = &benefits.mc[row * n..(row + 1) * n];
        let mp = &benefits.mp[row * n..(row + 1) * n];
        let short_head: Vec<bool> = items.iter().map(|i| groups.is_short_head(i)).collect();

        let value_of = |subset: &[usize]| -> f64 {
            let relevance: f64 = subset.iter().map(|&j| scores[j]).sum();
            let consumer: f64 = subset.iter().map(|&j| mc[j]).sum();
            let dcf = if active { consumer } else { -consumer };
            let dpf: f64 = subset
                .iter()
                .map(|&j| if short_head[j] { mp[j] } else { -mp[j] })
                .sum();
            relevance - l1 * dcf - l2 * dpf
        };

        let mut subset: Vec<usize> = (0..k).collect();
        let mut best = subset.clone();
        let mut best_value = value_of(&subset);
        while next_combination(&mut subset, n) {
            let v = value_of(&subset);
            if v > best_value {
                best_value = v;
                best.copy_from_slice(&subset);
            }
        }
        for &j in &best {
            mask[row * n + j] = true;
        }
    }

    // order each chosen set the same way the greedy path does
    let adjusted = adjust(candidates.score_matrix(), benefits, l1, l2);
    let mut order = vec![0u32; candidates.n_users() * k];
    let mut idx = Vec::with_capacity(n);
    for row in 0..candidates.n_users() {
        let chosen = &mask[row * n..(row + 1) * n];
        let masked: Vec<f64> = adjusted[row * n..(row + 1) * n]
            .iter()
            .zip(chosen)
            .map(|(v, &c)| if c { *v } else { f64::NEG_INFINITY })
            .collect();
        let mut scratch = vec![false; n];
        select_row(&masked, k, &mut idx, &mut order[row * k..(row + 1) * k], &mut scratch);
        debug_assert_eq!(scratch.as_slice(), chosen);
    }
    let objective = Objective::evaluate(candidates, benefits, l1, l2, &mask);
    Ok(SelectionResult::new(n, k, mask, order, adjusted, objective))
}

/// Advances `c` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
