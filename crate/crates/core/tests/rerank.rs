mod common;

use common::{brute_force_optimum, random_instance};
use fairrerank::baselines::CandidateLists;
use fairrerank::corpus::GroupAssignment;
use fairrerank::rerank::{
    exhaustive_oracle, greedy_rerank, par_greedy_rerank, BenefitTables, FairnessParams,
    McStrategy, Mode,
};
use fairrerank::Id;
use proptest::prelude::*;

fn params(inst: &common::Instance, l1: f64, l2: f64) -> FairnessParams {
    FairnessParams::new(Mode::CP, l1, l2, inst.k, inst.n, McStrategy::ValidationDcg).unwrap()
}

#[test]
fn greedy_matches_both_oracles() {
    for seed in 0..300 {
        let inst = random_instance(seed, 12, 8, 4);
        let p = params(&inst, inst.lambda1, inst.lambda2);
        let (l1, l2) = p.effective_lambdas(&inst.groups);
        let greedy = greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        let oracle = exhaustive_oracle(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        let brute = brute_force_optimum(&inst, l1, l2);
        assert!((greedy.objective_value() - oracle.objective_value()).abs() <= 1e-12, "seed {seed}");
        assert!((greedy.objective_value() - brute).abs() <= 1e-12, "seed {seed}");
    }
}

#[test]
fn zero_weights_reproduce_baseline_top_k() {
    for seed in 0..100 {
        let inst = random_instance(seed, 10, 8, 4);
        let p = FairnessParams::new(Mode::N, 0.0, 0.0, inst.k, inst.n, McStrategy::ValidationDcg).unwrap();
        let res = greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        assert_eq!(res.fair_lists(&inst.candidates), inst.candidates.truncate(inst.k));
    }
}

#[test]
fn parallel_and_sequential_agree() {
    for seed in 0..50 {
        let inst = random_instance(seed, 20, 8, 4);
        let p = params(&inst, inst.lambda1, inst.lambda2);
        let a = greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        let b = par_greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        assert_eq!(a, b);
    }
}

fn long_tail_counts(inst: &common::Instance, l2: f64) -> Vec<usize> {
    let p = params(inst, inst.lambda1, l2);
    let res = greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
    (0..inst.candidates.n_users())
        .map(|r| {
            res.selection(r)
                .iter()
                .zip(&inst.rows[r].2)
                .filter(|(sel, head)| **sel && !**head)
                .count()
        })
        .collect()
}

/// Copy of `inst` with one user's scores replaced.
fn with_row_scores(inst: &common::Instance, row: usize, f: impl Fn(f64) -> f64) -> CandidateLists {
    let rows = inst.candidates.rows().enumerate().map(|(r, (u, items, scores))| {
        let new: Vec<(Id, f64)> = items
            .iter()
            .zip(scores)
            .map(|(i, &s)| (i.clone(), if r == row { f(s) } else { s }))
            .collect();
        (u.clone(), new)
    });
    CandidateLists::from_rows(rows.collect::<Vec<_>>(), inst.n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn long_tail_count_is_monotone_in_lambda2(seed in any::<u64>(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let inst = random_instance(seed, 8, 8, 4);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let low = long_tail_counts(&inst, lo);
        let high = long_tail_counts(&inst, hi);
        for (x, y) in low.iter().zip(&high) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn uniform_shift_keeps_selection(seed in any::<u64>(), shift in -5.0f64..5.0) {
        let inst = random_instance(seed, 6, 8, 4);
        let p = params(&inst, inst.lambda1, inst.lambda2);
        let before = greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        let shifted = with_row_scores(&inst, 0, |s| s + shift);
        let after = greedy_rerank(&shifted, &inst.groups, &inst.benefits, &p).unwrap();
        prop_assert_eq!(before.selection(0), after.selection(0));
    }

    #[test]
    fn changing_one_user_leaves_the_rest(seed in any::<u64>(), factor in 0.0f64..3.0) {
        let inst = random_instance(seed, 8, 8, 4);
        let p = params(&inst, inst.lambda1, inst.lambda2);
        let before = greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        let changed = with_row_scores(&inst, 0, |s| (1.0 - s) * factor);
        let after = greedy_rerank(&changed, &inst.groups, &inst.benefits, &p).unwrap();
        let a = before.fair_lists(&inst.candidates);
        let b = after.fair_lists(&changed);
        for r in 1..inst.candidates.n_users() {
            prop_assert_eq!(before.selection(r), after.selection(r));
            prop_assert_eq!(a.items(r), b.items(r));
        }
    }

    #[test]
    fn selections_have_k_items_from_the_candidates(seed in any::<u64>()) {
        let inst = random_instance(seed, 10, 8, 4);
        let p = params(&inst, inst.lambda1, inst.lambda2);
        let res = par_greedy_rerank(&inst.candidates, &inst.groups, &inst.benefits, &p).unwrap();
        let lists = res.fair_lists(&inst.candidates);
        for r in 0..inst.candidates.n_users() {
            prop_assert_eq!(res.selection(r).iter().filter(|s| **s).count(), inst.k);
            let candidates = inst.candidates.items(r);
            for item in lists.items(r) {
                prop_assert!(candidates.contains(item));
            }
            // fair order is by adjusted score, ties by original position
            let adjusted = res.adjusted(r);
            let pos = res.fair_positions(r);
            for w in pos.windows(2) {
                let (x, y) = (w[0] as usize, w[1] as usize);
                prop_assert!(adjusted[x] > adjusted[y] || (adjusted[x] == adjusted[y] && x < y));
            }
        }
    }
}

#[test]
fn single_group_instances_reduce_to_top_k() {
    for seed in 0..50 {
        let inst = random_instance(seed, 6, 8, 4);
        let everyone = GroupAssignment::from_sets(
            Default::default(),
            inst.candidates.users().iter().cloned().collect(),
            Default::default(),
            (0..16).map(|i| Id::new(&format!("i{i}"))).collect(),
        );
        let rows = inst.candidates.n_users();
        let benefits = BenefitTables::from_parts(
            inst.n,
            inst.benefits.mc.clone(),
            vec![1.0; rows * inst.n],
            &vec![1.0; rows],
            &vec![1.0; rows * inst.n],
        );
        let p = params(&inst, 0.7, 0.9);
        let res = exhaustive_oracle(&inst.candidates, &everyone, &benefits, &p).unwrap();
        assert_eq!(res.fair_lists(&inst.candidates).items(0), inst.candidates.truncate(inst.k).items(0));
    }
}
