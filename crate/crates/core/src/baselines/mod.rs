//! Baseline top-N candidate generation and external score-file ingestion.
//!
//! Every producer here returns a [`CandidateLists`]: for each user, exactly
//! `N` distinct items in descending score order (ties by ascending item id),
//! scores min-max normalised per user over the list.

mod mf;
mod mostpop;
mod random;
mod scorefile;

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::InteractionLog;
use crate::ids::Id;

pub use mf::{recommend_mf, train_mf, MfConfig, MfModel};
pub use mostpop::recommend_mostpop;
pub use random::recommend_random;
pub use scorefile::{
    load_external_scores, parse_score_csv, parse_score_jsonl, write_score_csv, write_score_jsonl,
    IdUniverse, ScoreFile,
};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("user {user} has only {eligible} eligible items, {requested} requested")]
    NotEnoughItems {
        user: Id,
        eligible: usize,
        requested: usize,
    },
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: u64,
        message: String,
    },
    #[error("user {user}: list has {found} items, expected {expected}")]
    WrongLength {
        user: Id,
        expected: usize,
        found: usize,
    },
    #[error("user {user}: item {item} appears more than once")]
    DuplicateItem { user: Id, item: Id },
    #[error("user {user}: score for item {item} is not a number")]
    NanScore { user: Id, item: Id },
    #[error("user {user} appears in more than one block")]
    DuplicateUser { user: Id },
    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: Id },
    #[error("user {user}: scores are not in descending order")]
    Unsorted { user: Id },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Per-user ranked lists of equal length, stored row-major.
///
/// Users are kept in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLists {
    users: Vec<Id>,
    list_len: usize,
    items: Vec<Id>,
    scores: Vec<f64>,
}

/// Baseline output: the top-N list `L_N(u)` with relevance scores.
pub type CandidateLists = RankedLists;

impl RankedLists {
    /// Builds lists from `(user, [(item, score)])` rows, validating that every
    /// row has `list_len` distinct items with finite scores.
    pub fn from_rows(
        rows: impl IntoIterator<Item = (Id, Vec<(Id, f64)>)>,
        list_len: usize,
    ) -> Result<Self, BaselineError> {
        let mut rows: Vec<(Id, Vec<(Id, f64)>)> = rows.into_iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(BaselineError::DuplicateUser { user: w[0].0.clone() });
        }
        let mut lists = RankedLists::with_capacity(rows.len(), list_len);
        for (user, row) in rows {
            if row.len() != list_len {
                return Err(BaselineError::WrongLength {
                    user,
                    expected: list_len,
                    found: row.len(),
                });
            }
            let mut seen = HashSet::with_capacity(row.len());
            for (item, score) in &row {
                if score.is_nan() {
                    return Err(BaselineError::NanScore {
                        user: user.clone(),
                        item: item.clone(),
                    });
                }
                if !seen.insert(item) {
                    return Err(BaselineError::DuplicateItem {
                        user: user.clone(),
                        item: item.clone(),
                    });
                }
            }
            lists.push_row(user, row);
        }
        Ok(lists)
    }

    pub(crate) fn with_capacity(users: usize, list_len: usize) -> Self {
        RankedLists {
            users: Vec::with_capacity(users),
            list_len,
            items: Vec::with_capacity(users * list_len),
            scores: Vec::with_capacity(users * list_len),
        }
    }

    /// Rows must arrive in ascending user order.
    pub(crate) fn push_row(&mut self, user: Id, row: impl IntoIterator<Item = (Id, f64)>) {
        debug_assert!(self.users.last().is_none_or(|last| *last < user));
        self.users.push(user);
        for (item, score) in row {
            self.items.push(item);
            self.scores.push(score);
        }
        debug_assert_eq!(self.items.len(), self.users.len() * self.list_len);
    }

    pub fn users(&self) -> &[Id] {
        &self.users
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// `N` for candidate lists, `K` for fair lists.
    pub fn list_len(&self) -> usize {
        self.list_len
    }

    pub fn items(&self, row: usize) -> &[Id] {
        &self.items[row * self.list_len..(row + 1) * self.list_len]
    }

    pub fn scores(&self, row: usize) -> &[f64] {
        &self.scores[row * self.list_len..(row + 1) * self.list_len]
    }

    /// All scores, row-major.
    pub fn score_matrix(&self) -> &[f64] {
        &self.scores
    }

    pub fn row_of(&self, user: &Id) -> Option<usize> {
        self.users.binary_search(user).ok()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Id, &[Id], &[f64])> {
        (0..self.users.len()).map(move |r| (&self.users[r], self.items(r), self.scores(r)))
    }

    /// Same lists cut to the first `k` entries.
    pub fn truncate(&self, k: usize) -> RankedLists {
        let k = k.min(self.list_len);
        let mut out = RankedLists::with_capacity(self.users.len(), k);
        for (user, items, scores) in self.rows() {
            out.push_row(
                user.clone(),
                items[..k].iter().cloned().zip(scores[..k].iter().copied()),
            );
        }
        out
    }

    /// Index of the first user whose row breaks descending-score order with
    /// ascending-item tie-breaks.
    pub fn first_misordered_row(&self) -> Option<usize> {
        (0..self.users.len()).find(|&r| {
            let items = self.items(r);
            let scores = self.scores(r);
            (1..self.list_len).any(|j| {
                scores[j - 1] < scores[j] || (scores[j - 1] == scores[j] && items[j - 1] > items[j])
            })
        })
    }

    /// Checks the ordering invariant of candidate lists.
    pub fn check_candidate_order(&self) -> Result<(), BaselineError> {
        match self.first_misordered_row() {
            Some(r) => Err(BaselineError::Unsorted {
                user: self.users[r].clone(),
            }),
            None => Ok(()),
        }
    }
}

/// Items to keep out of each user's candidates.
#[derive(Debug, Clone, Default)]
pub struct SeenItems {
    by_user: HashMap<Id, HashSet<Id>>,
}

impl SeenItems {
    pub fn none() -> Self {
        SeenItems::default()
    }

    pub fn from_logs(logs: &[&InteractionLog]) -> Self {
        let mut by_user: HashMap<Id, HashSet<Id>> = HashMap::new();
        for log in logs {
            for it in log.interactions() {
                by_user.entry(it.user.clone()).or_default().insert(it.item.clone());
            }
        }
        SeenItems { by_user }
    }

    pub fn contains(&self, user: &Id, item: &Id) -> bool {
        self.by_user.get(user).is_some_and(|s| s.contains(item))
    }
}

/// Min-max normalises a descending window in place. A constant window maps to 1.
pub(crate) fn min_max_normalize(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let span = max - min;
    for s in scores.iter_mut() {
        *s = if span > 0.0 { (*s - min) / span } else { 1.0 };
    }
}

/// Takes the best `n` of `scored` (descending score, ascending id) and
/// normalises their scores.
pub(crate) fn top_n_normalized(
    user: &Id,
    mut scored: Vec<(Id, f64)>,
    n: usize,
) -> Result<Vec<(Id, f64)>, BaselineError> {
    if scored.len() < n {
        return Err(BaselineError::NotEnoughItems {
            user: user.clone(),
            eligible: scored.len(),
            requested: n,
        });
    }
    let by_rank = |a: &(Id, f64), b: &(Id, f64)| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0));
    if n > 0 && n < scored.len() {
        scored.select_nth_unstable_by(n - 1, by_rank);
        scored.truncate(n);
    }
    scored.sort_by(by_rank);
    let mut window: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
    min_max_normalize(&mut window);
    Ok(scored.into_iter().map(|(i, _)| i).zip(window).collect())
}

/// Items of the training log in ascending id order.
pub(crate) fn catalog(train: &InteractionLog) -> Vec<Id> {
    train.items()
}
