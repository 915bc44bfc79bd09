use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CorpusError, InteractionLog};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub threshold: usize,
    /// Percentage of users with at least `threshold` interactions.
    pub users_pct: f64,
    /// Percentage of items with at least `threshold` interactions.
    pub items_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub rows: Vec<StatsRow>,
}

impl StatsTable {
    /// One line of percentages across thresholds, e.g. `100% 82.08% 46.98%`.
    pub fn users_line(&self) -> String {
        self.rows
            .iter()
            .map(|r| format_pct(r.users_pct))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn items_line(&self) -> String {
        self.rows
            .iter()
            .map(|r| format_pct(r.items_pct))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Threshold header plus a users row and an items row.
    pub fn render(&self, label: &str) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.rows.iter().map(|r| format!(">={}", r.threshold)).collect();
        let _ = writeln!(out, "{label}\t{}", header.join(" "));
        let _ = writeln!(out, "users\t{}", self.users_line());
        let _ = writeln!(out, "items\t{}", self.items_line());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,users_pct,items_pct\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.4},{:.4}", r.threshold, r.users_pct, r.items_pct);
        }
        out
    }
}

/// Two decimals, trailing zeros dropped: `100%`, `82.08%`, `46.9%`.
pub(crate) fn format_pct(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}%")
}

/// Share of users and items at or above each interaction threshold.
pub fn dataset_stats(log: &InteractionLog, thresholds: &[usize]) -> Result<StatsTable, CorpusError> {
    if thresholds.is_empty() || thresholds.contains(&0) {
        return Err(CorpusError::InvalidParameter(
            "thresholds must be a non-empty list of positive integers".into(),
        ));
    }
    if log.is_empty() {
        return Err(CorpusError::Empty("cannot compute statistics of an empty log".into()));
    }
    let user_counts: Vec<usize> = log.user_counts().into_values().collect();
    let item_counts: Vec<usize> = log.item_counts().into_values().collect();
    let pct = |counts: &[usize], t: usize| {
        100.0 * counts.iter().filter(|&&c| c >= t).count() as f64 / counts.len() as f64
    };
    let rows = thresholds
        .iter()
        .map(|&t| StatsRow {
            threshold: t,
            users_pct: pct(&user_counts, t),
            items_pct: pct(&item_counts, t),
        })
        .collect();
    Ok(StatsTable { rows })
}
