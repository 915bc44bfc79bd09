//! Shared fixtures and straight-from-definition calculators for the
//! integration tests. Nothing here calls the library code it checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use fairrerank::baselines::{CandidateLists, RankedLists};
use fairrerank::corpus::{GroupAssignment, Interaction, InteractionLog};
use fairrerank::rerank::BenefitTables;
use fairrerank::Id;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random re-ranking instance with everything the oracle needs in plain form.
pub struct Instance {
    pub candidates: CandidateLists,
    pub groups: GroupAssignment,
    pub benefits: BenefitTables,
    pub n: usize,
    pub k: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Per user: (scores, mc, short_head flags), in candidate order.
    pub rows: Vec<(Vec<f64>, Vec<f64>, Vec<bool>)>,
    pub active: Vec<bool>,
}

pub fn random_instance(seed: u64, max_users: usize, max_n: usize, max_k: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = rng.random_range(1..=max_users);
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=max_k.min(n));
    let pool = n + rng.random_range(0..=n);
    let short_head: Vec<bool> = (0..pool).map(|_| rng.random_bool(0.3)).collect();
    // coarse scores some of the time so ties occur
    let coarse = rng.random_bool(0.3);

    let mut list_rows = Vec::new();
    let mut rows = Vec::new();
    let mut active = Vec::new();
    let mut mc_all = Vec::new();
    let mut user_signs = Vec::new();
    let mut item_signs = Vec::new();
    for u in 0..users {
        let mut items: Vec<usize> = (0..pool).collect();
        for i in 0..n {
            let j = rng.random_range(i..pool);
            items.swap(i, j);
        }
        items.truncate(n);
        let mut scores: Vec<f64> = (0..n)
            .map(|_| {
                if coarse {
                    rng.random_range(0..4) as f64 / 4.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        let mc: Vec<f64> = (0..n)
            .map(|j| {
                if rng.random_bool(0.4) {
                    1.0 / ((j + 2) as f64).log2()
                } else {
                    0.0
                }
            })
            .collect();
        let is_active = rng.random_bool(0.3);
        active.push(is_active);
        user_signs.push(if is_active { -1.0 } else { 1.0 });
        let heads: Vec<bool> = items.iter().map(|&i| short_head[i]).collect();
        item_signs.extend(heads.iter().map(|&h| if h { -1.0 } else { 1.0 }));
        mc_all.extend(mc.iter().copied());
        list_rows.push((
            Id::from(u as u64),
            items
                .iter()
                .zip(&scores)
                .map(|(&i, &s)| (Id::new(&format!("i{i}")), s))
                .collect::<Vec<_>>(),
        ));
        rows.push((scores, mc, heads));
    }
    let candidates = CandidateLists::from_rows(list_rows, n).unwrap();
    let groups = GroupAssignment::from_sets(
        (0..users).filter(|&u| active[u]).map(|u| Id::from(u as u64)).collect(),
        (0..users).filter(|&u| !active[u]).map(|u| Id::from(u as u64)).collect(),
        (0..pool).filter(|&i| short_head[i]).map(|i| Id::new(&format!("i{i}"))).collect(),
        (0..pool).filter(|&i| !short_head[i]).map(|i| Id::new(&format!("i{i}"))).collect(),
    );
    let benefits = BenefitTables::from_parts(n, mc_all, vec![1.0; users * n], &user_signs, &item_signs);
    Instance {
        candidates,
        groups,
        benefits,
        n,
        k,
        lambda1: rng.random::<f64>(),
        lambda2: rng.random::<f64>(),
        rows,
        active,
    }
}

/// Value of choosing `subset` for one user: relevance minus the weighted
/// group-total disparities the subset contributes.
pub fn subset_value(
    scores: &[f64],
    mc: &[f64],
    short_head: &[bool],
    active: bool,
    subset: &[usize],
    l1: f64,
    l2: f64,
) -> f64 {
    let mut relevance = 0.0;
    let mut consumer = 0.0;
    let mut producer = 0.0;
    for &j in subset {
        relevance += scores[j];
        // disparity terms: advantaged minus protected
        consumer += if active { mc[j] } else { -mc[j] };
        producer += if short_head[j] { 1.0 } else { -1.0 };
    }
    relevance - l1 * consumer - l2 * producer
}

/// Best achievable objective by enumerating every `k`-subset per user.
pub fn brute_force_optimum(inst: &Instance, l1: f64, l2: f64) -> f64 {
    let mut total = 0.0;
    for (u, (scores, mc, heads)) in inst.rows.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for bits in 0u32..(1 << inst.n) {
            if bits.count_ones() as usize != inst.k {
                continue;
            }
            let subset: Vec<usize> = (0..inst.n).filter(|j| bits & (1 << j) != 0).collect();
            best = best.max(subset_value(scores, mc, heads, inst.active[u], &subset, l1, l2));
        }
        total += best;
    }
    total
}

pub fn log_from(rows: &[(u64, u64)]) -> InteractionLog {
    InteractionLog::from_interactions(
        rows.iter().map(|&(u, i)| Interaction::new(Id::from(u), Id::from(i), 1.0)),
    )
    .unwrap()
}

pub fn ids(values: impl IntoIterator<Item = u64>) -> BTreeSet<Id> {
    values.into_iter().map(Id::from).collect()
}

/// Reference metric values for fair lists, computed from first principles.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMetrics {
    pub ndcg_all: f64,
    pub ndcg_active: Option<f64>,
    pub ndcg_inactive: Option<f64>,
    pub dcf: f64,
    pub short: f64,
    pub long: f64,
    pub dpf: f64,
    pub novelty: f64,
    pub coverage: f64,
    pub mcpf: f64,
}

pub fn reference_metrics(
    lists: &[(Id, Vec<Id>)],
    test: &HashMap<Id, HashSet<Id>>,
    train_pop: &HashMap<Id, usize>,
    n_train_users: usize,
    active: &HashSet<Id>,
    short_head: &HashSet<Id>,
    m: usize,
    k: usize,
    w: f64,
) -> ReferenceMetrics {
    let mut all = Vec::new();
    let mut act = Vec::new();
    let mut inact = Vec::new();
    for (user, list) in lists {
        let Some(truth) = test.get(user).filter(|t| !t.is_empty()) else {
            continue;
        };
        let mut dcg = 0.0;
        for (pos, item) in list.iter().enumerate().take(k) {
            if truth.contains(item) {
                dcg += 1.0 / ((pos + 2) as f64).log2();
            }
        }
        let mut idcg = 0.0;
        for pos in 0..truth.len().min(k) {
            idcg += 1.0 / ((pos + 2) as f64).log2();
        }
        let v = dcg / idcg;
        all.push(v);
        if active.contains(user) {
            act.push(v);
        } else {
            inact.push(v);
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let ndcg_active = mean(&act);
    let ndcg_inactive = mean(&inact);
    let dcf = match (ndcg_active, ndcg_inactive) {
        (Some(a), Some(i)) if a + i != 0.0 => (a - i) / (a + i),
        _ => 0.0,
    };
    let slots: usize = lists.iter().map(|(_, l)| l.len()).sum();
    let heads = lists
        .iter()
        .flat_map(|(_, l)| l)
        .filter(|i| short_head.contains(*i))
        .count();
    let short = heads as f64 / slots as f64;
    let long = (slots - heads) as f64 / slots as f64;
    let mut novelty = 0.0;
    for item in lists.iter().flat_map(|(_, l)| l) {
        let pop = train_pop.get(item).copied().unwrap_or(0).max(1) as f64;
        novelty -= (pop / n_train_users as f64).log2();
    }
    novelty /= slots as f64;
    let distinct: HashSet<&Id> = lists.iter().flat_map(|(_, l)| l).collect();
    ReferenceMetrics {
        ndcg_all: mean(&all).unwrap_or(0.0),
        ndcg_active,
        ndcg_inactive,
        dcf,
        short,
        long,
        dpf: short - long,
        novelty,
        coverage: distinct.len() as f64 / m as f64,
        mcpf: w * (short - long) + (1.0 - w) * dcf,
    }
}

/// A tiny random evaluation case: at most 5 users and 8 items.
pub struct SmallCase {
    pub lists: RankedLists,
    pub plain_lists: Vec<(Id, Vec<Id>)>,
    pub train: InteractionLog,
    pub test: InteractionLog,
    pub groups: GroupAssignment,
    pub active: HashSet<Id>,
    pub short_head: HashSet<Id>,
    pub m: usize,
    pub k: usize,
}

pub fn small_case(seed: u64) -> SmallCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = rng.random_range(1..=5u64);
    let m = rng.random_range(2..=8u64);
    let k = rng.random_range(1..=m as usize);
    let item = |i: u64| Id::new(&format!("i{i}"));
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut plain = Vec::new();
    for u in 0..users {
        let mut all: Vec<u64> = (0..m).collect();
        all.shuffle(&mut rng);
        plain.push((Id::from(u), all[..k].iter().map(|&i| item(i)).collect::<Vec<_>>()));
        for i in 0..m {
            match rng.random_range(0..4) {
                0 => train.push(Interaction::new(Id::from(u), item(i), 1.0)),
                1 => test.push(Interaction::new(Id::from(u), item(i), 1.0)),
                _ => {}
            }
        }
    }
    // keep at least one training row so popularity is defined
    train.push(Interaction::new(Id::from(0), item(0), 1.0));
    let active: HashSet<Id> = (0..users).filter(|_| rng.random_bool(0.4)).map(Id::from).collect();
    let short_head: HashSet<Id> = (0..m).filter(|_| rng.random_bool(0.3)).map(item).collect();
    let groups = GroupAssignment::from_sets(
        active.iter().cloned().collect(),
        (0..users).map(Id::from).filter(|u| !active.contains(u)).collect(),
        short_head.iter().cloned().collect(),
        (0..m).map(item).filter(|i| !short_head.contains(i)).collect(),
    );
    let lists = RankedLists::from_rows(
        plain
            .iter()
            .map(|(u, l)| (u.clone(), l.iter().map(|i| (i.clone(), 0.0)).collect::<Vec<_>>())),
        k,
    )
    .unwrap();
    SmallCase {
        lists,
        plain_lists: plain,
        train: InteractionLog::from_interactions(train).unwrap(),
        test: InteractionLog::from_interactions(test).unwrap(),
        groups,
        active,
        short_head,
        m: m as usize,
        k,
    }
}

/// The reference calculator applied to a [`SmallCase`].
pub fn expected_metrics(case: &SmallCase, w: f64) -> ReferenceMetrics {
    let mut test: HashMap<Id, HashSet<Id>> = HashMap::new();
    for it in case.test.interactions() {
        test.entry(it.user.clone()).or_default().insert(it.item.clone());
    }
    let mut users_of: HashMap<Id, HashSet<Id>> = HashMap::new();
    for it in case.train.interactions() {
        users_of.entry(it.item.clone()).or_default().insert(it.user.clone());
    }
    let pop = users_of.into_iter().map(|(i, us)| (i, us.len())).collect();
    let n_train: HashSet<&Id> = case.train.interactions().iter().map(|it| &it.user).collect();
    reference_metrics(
        &case.plain_lists,
        &test,
        &pop,
        n_train.len(),
        &case.active,
        &case.short_head,
        case.m,
        case.k,
        w,
    )
}
