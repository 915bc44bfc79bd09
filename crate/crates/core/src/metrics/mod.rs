//! Accuracy, exposure and two-sided fairness metrics for fair top-K lists.

mod report;

use std::collections::{HashMap, HashSet};

use crate::baselines::RankedLists;
use crate::corpus::{GroupAssignment, InteractionLog};
use crate::ids::Id;
use crate::rerank::discount;

pub use report::{assemble_report, derived_columns, FairnessReport, Provenance, ReportInputs};

/// Binary-relevance nDCG@K of one list. `None` when the user has no test items.
pub fn ndcg_at_k(list: &[Id], test_items: &HashSet<Id>, k: usize) -> Option<f64> {
    if test_items.is_empty() || k == 0 {
        return None;
    }
    let dcg: f64 = list
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, item)| test_items.contains(*item))
        .map(|(j, _)| discount(j + 1))
        .sum();
    let ideal: f64 = (1..=test_items.len().min(k)).map(discount).sum();
    Some(dcg / ideal)
}

/// Mean nDCG over all evaluable users and within each user group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupRelevance {
    pub all: f64,
    pub active: Option<f64>,
    pub inactive: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Plain means of per-user nDCG values. An empty group is reported absent.
pub fn group_relevance(per_user: &[(Id, f64)], groups: &GroupAssignment) -> GroupRelevance {
    let all: Vec<f64> = per_user.iter().map(|(_, v)| *v).collect();
    let (active, inactive): (Vec<&(Id, f64)>, Vec<&(Id, f64)>) =
        per_user.iter().partition(|(u, _)| groups.is_active(u));
    let active: Vec<f64> = active.into_iter().map(|(_, v)| *v).collect();
    let inactive: Vec<f64> = inactive.into_iter().map(|(_, v)| *v).collect();
    GroupRelevance {
        all: mean(&all).unwrap_or(0.0),
        active: mean(&active),
        inactive: mean(&inactive),
    }
}

/// `(M_active - M_inactive) / (M_active + M_inactive)`, 0 when both are 0.
pub fn dcf_reported(m_active: f64, m_inactive: f64) -> f64 {
    let total = m_active + m_inactive;
    if total == 0.0 {
        0.0
    } else {
        (m_active - m_inactive) / total
    }
}

/// Exposure shares of the two item groups over all recommendation slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exposure {
    pub short: f64,
    pub long: f64,
    pub dpf: f64,
}

/// Short-head share minus long-tail share.
pub fn dpf_from_shares(short: f64, long: f64) -> f64 {
    short - long
}

pub fn exposure_and_dpf(fair_lists: &RankedLists, groups: &GroupAssignment) -> Exposure {
    let slots = fair_lists.n_users() * fair_lists.list_len();
    if slots == 0 {
        return Exposure { short: 0.0, long: 0.0, dpf: 0.0 };
    }
    let short_count = (0..fair_lists.n_users())
        .flat_map(|r| fair_lists.items(r))
        .filter(|item| groups.is_short_head(item))
        .count();
    let short = short_count as f64 / slots as f64;
    let long = (slots - short_count) as f64 / slots as f64;
    Exposure {
        short,
        long,
        dpf: dpf_from_shares(short, long),
    }
}

/// Mean self-information, in bits, of the recommended items' training
/// popularity: `-log2(pop(i) / n)` averaged over slots. Items no training
/// user touched count as popularity 1.
pub fn novelty(fair_lists: &RankedLists, train: &InteractionLog) -> f64 {
    let n = train.n() as f64;
    let popularity: HashMap<Id, usize> = train.item_counts().into_iter().collect();
    let mut total = 0.0;
    let mut slots = 0usize;
    for r in 0..fair_lists.n_users() {
        for item in fair_lists.items(r) {
            let pop = popularity.get(item).copied().unwrap_or(0).max(1) as f64;
            total += -(pop / n).log2();
            slots += 1;
        }
    }
    if slots == 0 {
        0.0
    } else {
        total / slots as f64
    }
}

/// Fraction of the `m`-item catalog that appears in at least one list.
pub fn coverage(fair_lists: &RankedLists, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let distinct: HashSet<&Id> = (0..fair_lists.n_users())
        .flat_map(|r| fair_lists.items(r))
        .collect();
    distinct.len() as f64 / m as f64
}

/// `w * DPF + (1 - w) * DCF`, signed.
pub fn mcpf(dcf_reported: f64, dpf: f64, w: f64) -> f64 {
    w * dpf + (1.0 - w) * dcf_reported
}

/// `w * |DPF| + (1 - w) * |DCF|`.
pub fn mcpf_abs(dcf_reported: f64, dpf: f64, w: f64) -> f64 {
    mcpf(dcf_reported.abs(), dpf.abs(), w)
}

/// Relative improvement over a reference value, in percent.
pub fn delta_percent(reference_mcpf: f64, mcpf: f64) -> f64 {
    100.0 * (reference_mcpf - mcpf) / reference_mcpf
}

/// Per-user nDCG@K of fair lists against the test split, skipping users with
/// no test items. Output follows the lists' user order.
pub fn per_user_ndcg(fair_lists: &RankedLists, test: &InteractionLog, k: usize) -> Vec<(Id, f64)> {
    use rayon::prelude::*;
    let truth = test.user_item_sets();
    let empty = HashSet::new();
    let values: Vec<Option<f64>> = (0..fair_lists.n_users())
        .into_par_iter()
        .map(|r| {
            let user = &fair_lists.users()[r];
            ndcg_at_k(fair_lists.items(r), truth.get(user).unwrap_or(&empty), k)
        })
        .collect();
    fair_lists
        .users()
        .iter()
        .zip(values)
        .filter_map(|(u, v)| v.map(|v| (u.clone(), v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(ids: &[&str]) -> HashSet<Id> {
        ids.iter().map(|s| Id::new(s)).collect()
    }

    fn list(ids: &[&str]) -> Vec<Id> {
        ids.iter().map(|s| Id::new(s)).collect()
    }

    #[test]
    fn ndcg_examples() {
        let l = list(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        assert_eq!(ndcg_at_k(&l, &set(&["a"]), 10), Some(1.0));
        let v = ndcg_at_k(&l, &set(&["b"]), 10).unwrap();
        assert!((v - 0.6309).abs() < 1e-4);
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert_eq!(ndcg_at_k(&l, &set(&["zz"]), 10), Some(0.0));
        assert_eq!(ndcg_at_k(&l, &set(&[]), 10), None);
    }

    fn groups_with_active(active: &[&str], inactive: &[&str]) -> GroupAssignment {
        GroupAssignment::from_sets(
            active.iter().map(|s| Id::new(s)).collect(),
            inactive.iter().map(|s| Id::new(s)).collect(),
            BTreeSet::new(),
            BTreeSet::new(),
        )
    }

    #[test]
    fn group_means() {
        let g = groups_with_active(&["a"], &["b", "c"]);
        let per_user = vec![(Id::new("a"), 0.8), (Id::new("b"), 0.2), (Id::new("c"), 0.4)];
        let r = group_relevance(&per_user, &g);
        assert!((r.all - 0.466_666_666_666_666_7).abs() < 1e-12);
        assert_eq!(r.active, Some(0.8));
        assert!((r.inactive.unwrap() - 0.3).abs() < 1e-15);

        let same = vec![(Id::new("a"), 0.3), (Id::new("b"), 0.3), (Id::new("c"), 0.3)];
        let r = group_relevance(&same, &g);
        assert!((r.all - 0.3).abs() < 1e-15);
        assert_eq!(r.active, Some(0.3));

        let r = group_relevance(&per_user, &groups_with_active(&[], &["a", "b", "c"]));
        assert_eq!(r.active, None);
    }

    #[test]
    fn dcf_normalisation() {
        assert_eq!(dcf_reported(0.3, 0.3), 0.0);
        assert_eq!(dcf_reported(0.0, 0.0), 0.0);
        assert!((dcf_reported(0.0751, 0.0298) - 0.4318).abs() < 1e-4);
        assert!((dcf_reported(0.0732, 0.0316) - 0.3969).abs() < 1e-4);
    }

    #[test]
    fn mcpf_endpoints_and_delta() {
        assert_eq!(mcpf(0.4, -0.2, 1.0), -0.2);
        assert_eq!(mcpf(0.4, -0.2, 0.0), 0.4);
        assert!((mcpf(0.4321, 0.6562, 0.5) - 0.54415).abs() < 1e-12);
        assert_eq!(mcpf_abs(-0.4, -0.2, 0.5), 0.30000000000000004);
        assert!((delta_percent(0.621, 0.4074) - 34.39).abs() < 0.01);
    }

    #[test]
    fn novelty_and_coverage_formulas() {
        // 1024 training users; item "rare" has 1 user, "half" 512, "quarter" 256
        let mut rows = Vec::new();
        for u in 0..1024u64 {
            if u < 512 {
                rows.push(crate::corpus::Interaction::new(Id::from(u), "half", 1.0));
            }
            if u < 256 {
                rows.push(crate::corpus::Interaction::new(Id::from(u), "quarter", 1.0));
            }
            if u == 0 {
                rows.push(crate::corpus::Interaction::new(Id::from(u), "rare", 1.0));
            }
            rows.push(crate::corpus::Interaction::new(Id::from(u), "all", 1.0));
        }
        let train = InteractionLog::from_interactions(rows).unwrap();
        let one = |items: &[&str]| {
            RankedLists::from_rows(
                vec![(Id::new("x"), items.iter().map(|i| (Id::new(i), 0.0)).collect())],
                items.len(),
            )
            .unwrap()
        };
        assert_eq!(novelty(&one(&["rare"]), &train), 10.0);
        assert_eq!(novelty(&one(&["half", "quarter"]), &train), 1.5);
        assert_eq!(novelty(&one(&["all"]), &train), 0.0);
        assert_eq!(coverage(&one(&["half", "quarter"]), 4), 0.5);
        assert_eq!(coverage(&one(&["half", "quarter", "rare", "all"]), 4), 1.0);
    }
}
