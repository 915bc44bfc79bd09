//! Interaction data: loading, k-core filtering, splitting, statistics and
//! user/item group segmentation.

mod groups;
mod kcore;
mod load;
mod split;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::Id;

pub use groups::{segment_groups, GroupAssignment, Sign};
pub use kcore::kcore_filter;
pub use load::{load_interactions, parse_interactions, InputFormat};
pub use split::{split, PartCounts, Proportions, SplitBundle, SplitManifest};
pub use stats::{dataset_stats, StatsRow, StatsTable};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: u64,
        message: String,
    },
    #[error("empty result: {0}")]
    Empty(String),
    #[error("user {user} has {count} interactions, at least {needed} are required")]
    TooFewInteractions { user: Id, count: usize, needed: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate segmentation: {0}")]
    DegenerateGroups(String),
}

/// One user-item feedback record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub user: Id,
    pub item: Id,
    /// Explicit rating, or 1.0 for implicit feedback.
    pub weight: f64,
    pub timestamp: Option<i64>,
}

impl Interaction {
    pub fn new(user: impl Into<Id>, item: impl Into<Id>, weight: f64) -> Self {
        Interaction {
            user: user.into(),
            item: item.into(),
            weight,
            timestamp: None,
        }
    }

    pub fn with_timestamp(mut self, ts: i64) -> Self {
        self.timestamp = Some(ts);
        self
    }
}

/// A deduplicated set of interactions, kept in canonical `(user, item)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionLog {
    interactions: Vec<Interaction>,
    n_users: usize,
    n_items: usize,
}

impl InteractionLog {
    /// Builds a log, collapsing repeated `(user, item)` pairs: the highest
    /// weight wins, then the latest timestamp.
    ///
    /// Weights must be finite and non-negative.
    pub fn from_interactions(
        interactions: impl IntoIterator<Item = Interaction>,
    ) -> Result<Self, CorpusError> {
        let mut merged: BTreeMap<(Id, Id), Interaction> = BTreeMap::new();
        for it in interactions {
            if !(it.weight.is_finite() && it.weight >= 0.0) {
                return Err(CorpusError::InvalidParameter(format!(
                    "interaction ({}, {}) has invalid weight {}",
                    it.user, it.item, it.weight
                )));
            }
            match merged.entry((it.user.clone(), it.item.clone())) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(it);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let kept = slot.get_mut();
                    if prefer(&it, kept) {
                        *kept = it;
                    }
                }
            }
        }
        Ok(Self::from_sorted_unique(merged.into_values().collect()))
    }

    /// `interactions` must already be sorted by `(user, item)` without repeats.
    pub(crate) fn from_sorted_unique(interactions: Vec<Interaction>) -> Self {
        debug_assert!(interactions
            .windows(2)
            .all(|w| (&w[0].user, &w[0].item) < (&w[1].user, &w[1].item)));
        let n_users = {
            let mut n = 0;
            let mut last: Option<&Id> = None;
            for it in &interactions {
                if last != Some(&it.user) {
                    n += 1;
                    last = Some(&it.user);
                }
            }
            n
        };
        let n_items = interactions
            .iter()
            .map(|it| &it.item)
            .collect::<HashSet<_>>()
            .len();
        InteractionLog {
            interactions,
            n_users,
            n_items,
        }
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// Number of distinct users.
    pub fn n(&self) -> usize {
        self.n_users
    }

    /// Number of distinct items.
    pub fn m(&self) -> usize {
        self.n_items
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn users(&self) -> Vec<Id> {
        let mut users: Vec<Id> = Vec::with_capacity(self.n_users);
        for it in &self.interactions {
            if users.last() != Some(&it.user) {
                users.push(it.user.clone());
            }
        }
        users
    }

    pub fn items(&self) -> Vec<Id> {
        self.item_counts().into_keys().collect()
    }

    /// Interactions per user. Feedback counts as binary presence.
    pub fn user_counts(&self) -> BTreeMap<Id, usize> {
        let mut counts = BTreeMap::new();
        for it in &self.interactions {
            *counts.entry(it.user.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Distinct users per item.
    pub fn item_counts(&self) -> BTreeMap<Id, usize> {
        let mut counts = BTreeMap::new();
        for it in &self.interactions {
            *counts.entry(it.item.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Each user's interactions, contiguous and in item order.
    pub fn by_user(&self) -> impl Iterator<Item = (&Id, &[Interaction])> {
        self.interactions
            .chunk_by(|a, b| a.user == b.user)
            .map(|chunk| (&chunk[0].user, chunk))
    }

    /// Set of items per user.
    pub fn user_item_sets(&self) -> HashMap<Id, HashSet<Id>> {
        let mut sets: HashMap<Id, HashSet<Id>> = HashMap::with_capacity(self.n_users);
        for (user, chunk) in self.by_user() {
            sets.insert(user.clone(), chunk.iter().map(|it| it.item.clone()).collect());
        }
        sets
    }

    pub fn pairs(&self) -> BTreeSet<(Id, Id)> {
        self.interactions
            .iter()
            .map(|it| (it.user.clone(), it.item.clone()))
            .collect()
    }

    pub fn contains_user(&self, user: &Id) -> bool {
        self.interactions
            .binary_search_by(|it| it.user.cmp(user).then(std::cmp::Ordering::Greater))
            .map_or_else(
                |pos| self.interactions.get(pos).is_some_and(|it| &it.user == user),
                |_| true,
            )
    }
}

fn prefer(candidate: &Interaction, kept: &Interaction) -> bool {
    if candidate.weight != kept.weight {
        return candidate.weight > kept.weight;
    }
    candidate.timestamp > kept.timestamp
}

/// `ceil(fraction * count)` that ignores floating-point noise at exact
/// integers (e.g. `0.05 * 60` must give 3, not 4).
pub(crate) fn ceil_fraction(fraction: f64, count: usize) -> usize {
    let x = fraction * count as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_keeps_max_weight_then_latest() {
        let log = InteractionLog::from_interactions(vec![
            Interaction::new("a", "x", 3.0).with_timestamp(5),
            Interaction::new("a", "x", 4.0).with_timestamp(1),
            Interaction::new("a", "x", 4.0).with_timestamp(2),
            Interaction::new("b", "x", 1.0),
        ])
        .unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.n(), 2);
        assert_eq!(log.m(), 1);
        let first = &log.interactions()[0];
        assert_eq!(first.weight, 4.0);
        assert_eq!(first.timestamp, Some(2));
    }

    #[test]
    fn negative_weight_rejected() {
        let err = InteractionLog::from_interactions(vec![Interaction::new("a", "x", -1.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn contains_user_on_sorted_log() {
        let log = InteractionLog::from_interactions(vec![
            Interaction::new("1", "x", 1.0),
            Interaction::new("3", "x", 1.0),
            Interaction::new("3", "y", 1.0),
        ])
        .unwrap();
        assert!(log.contains_user(&Id::new("1")));
        assert!(log.contains_user(&Id::new("3")));
        assert!(!log.contains_user(&Id::new("2")));
        assert!(!log.contains_user(&Id::new("4")));
    }

    #[test]
    fn ceil_fraction_is_exact_at_integers() {
        assert_eq!(ceil_fraction(0.05, 60), 3);
        assert_eq!(ceil_fraction(0.05, 943), 48);
        assert_eq!(ceil_fraction(0.20, 1349), 270);
        assert_eq!(ceil_fraction(0.05, 1), 1);
    }
}
