//! Score-file I/O.
//!
//! Two layouts are accepted:
//!
//! * JSON lines, one user per line:
//!   `{"user": "42", "items": ["7", "3"], "scores": [0.9, 0.4]}`
//! * long-form CSV with a `user,item,score,rank` header, `rank` 1-based.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BaselineError, CandidateLists, RankedLists};
use crate::corpus::InteractionLog;
use crate::ids::Id;

/// Known user and item ids against which a score file is checked.
#[derive(Debug, Clone, Default)]
pub struct IdUniverse {
    pub users: HashSet<Id>,
    pub items: HashSet<Id>,
}

impl IdUniverse {
    pub fn from_log(log: &InteractionLog) -> Self {
        IdUniverse {
            users: log.users().into_iter().collect(),
            items: log.items().into_iter().collect(),
        }
    }
}

/// A loaded score file plus any non-fatal findings.
#[derive(Debug, Clone)]
pub struct ScoreFile {
    pub lists: CandidateLists,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    user: Id,
    items: Vec<Id>,
    scores: Vec<f64>,
}

#[derive(Deserialize)]
struct CsvRow {
    user: Id,
    item: Id,
    score: f64,
    rank: usize,
}

/// Loads a score file, choosing the layout by its first non-blank character.
pub fn load_external_scores(
    path: &Path,
    expected_n: usize,
    universe: Option<&IdUniverse>,
) -> Result<ScoreFile, BaselineError> {
    let text = fs::read_to_string(path).map_err(|source| BaselineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.display().to_string();
    if text.trim_start().starts_with('{') {
        parse_score_jsonl(&text, expected_n, universe, &name)
    } else {
        parse_score_csv(&text, expected_n, universe, &name)
    }
}

pub fn parse_score_jsonl(
    text: &str,
    expected_n: usize,
    universe: Option<&IdUniverse>,
    source_name: &str,
) -> Result<ScoreFile, BaselineError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| BaselineError::Malformed {
            source_name: source_name.to_string(),
            line: idx as u64 + 1,
            message,
        };
        // NaN is not valid JSON, so a row that fails to parse because of a
        // bare NaN token is reported as a NaN score.
        let row: JsonRow = match serde_json::from_str(line) {
            Ok(row) => row,
            Err(e) => {
                if line.contains("NaN") {
                    let user = serde_json::from_str::<serde_json::Value>(
                        &line.replace("NaN", "null"),
                    )
                    .ok()
                    .and_then(|v| v.get("user").cloned())
                    .and_then(|v| serde_json::from_value::<Id>(v).ok());
                    if let Some(user) = user {
                        return Err(BaselineError::NanScore { user, item: Id::new("?") });
                    }
                }
                return Err(malformed(e.to_string()));
            }
        };
        if row.items.len() != row.scores.len() {
            return Err(malformed(format!(
                "{} items but {} scores",
                row.items.len(),
                row.scores.len()
            )));
        }
        rows.push((row.user, row.items.into_iter().zip(row.scores).collect::<Vec<_>>()));
    }
    finish(rows, expected_n, universe)
}

pub fn parse_score_csv(
    text: &str,
    expected_n: usize,
    universe: Option<&IdUniverse>,
    source_name: &str,
) -> Result<ScoreFile, BaselineError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut blocks: BTreeMap<Id, Vec<(usize, Id, f64)>> = BTreeMap::new();
    for record in reader.deserialize::<CsvRow>() {
        let row = record.map_err(|e| BaselineError::Malformed {
            source_name: source_name.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        blocks.entry(row.user).or_default().push((row.rank, row.item, row.score));
    }
    let rows = blocks.into_iter().map(|(user, mut entries)| {
        entries.sort_by_key(|e| e.0);
        (user, entries.into_iter().map(|(_, i, s)| (i, s)).collect::<Vec<_>>())
    });
    finish(rows.collect(), expected_n, universe)
}

fn finish(
    mut rows: Vec<(Id, Vec<(Id, f64)>)>,
    expected_n: usize,
    universe: Option<&IdUniverse>,
) -> Result<ScoreFile, BaselineError> {
    if let Some(universe) = universe {
        for (user, row) in &rows {
            if !universe.users.contains(user) {
                return Err(BaselineError::UnknownId { kind: "user", id: user.clone() });
            }
            if let Some((item, _)) = row.iter().find(|(i, _)| !universe.items.contains(i)) {
                return Err(BaselineError::UnknownId { kind: "item", id: item.clone() });
            }
        }
    }
    let mut warnings = Vec::new();
    for (user, row) in rows.iter_mut() {
        let sorted = row
            .windows(2)
            .all(|w| w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        if !sorted && row.iter().all(|(_, s)| !s.is_nan()) {
            row.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let msg = format!("user {user}: scores were not in descending order, re-sorted");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let lists = RankedLists::from_rows(rows, expected_n)?;
    Ok(ScoreFile { lists, warnings })
}

/// Writes lists as JSON lines.
pub fn write_score_jsonl(lists: &RankedLists) -> String {
    let mut out = String::new();
    for (user, items, scores) in lists.rows() {
        let row = JsonRow {
            user: user.clone(),
            items: items.to_vec(),
            scores: scores.to_vec(),
        };
        out.push_str(&serde_json::to_string(&row).expect("score rows serialize"));
        out.push('\n');
    }
    out
}

/// Writes lists as long-form CSV with 1-based ranks.
pub fn write_score_csv(lists: &RankedLists) -> String {
    let mut out = String::from("user,item,score,rank\n");
    for (user, items, scores) in lists.rows() {
        for (rank, (item, score)) in items.iter().zip(scores).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", csv_field(user), csv_field(item), score, rank + 1);
        }
    }
    out
}

fn csv_field(id: &Id) -> String {
    let s = id.as_str();
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WELL_FORMED: &str = "{\"user\": \"u1\", \"items\": [\"a\", \"b\"], \"scores\": [0.9, 0.1]}\n\
                               {\"user\": 2, \"items\": [3, 4], \"scores\": [1.0, 0.0]}\n";

    #[test]
    fn jsonl_loads_unchanged() {
        let f = parse_score_jsonl(WELL_FORMED, 2, None, "t").unwrap();
        assert!(f.warnings.is_empty());
        assert_eq!(f.lists.n_users(), 2);
        let again = parse_score_jsonl(&write_score_jsonl(&f.lists), 2, None, "t").unwrap();
        assert_eq!(again.lists, f.lists);
    }

    #[test]
    fn duplicated_item_names_user() {
        let text = "{\"user\": \"u9\", \"items\": [\"a\", \"a\"], \"scores\": [0.9, 0.1]}\n";
        let err = parse_score_jsonl(text, 2, None, "t").unwrap_err();
        assert!(err.to_string().contains("u9"), "{err}");
    }

    #[test]
    fn unsorted_rows_are_resorted_with_warning() {
        let text = "user,item,score,rank\nu,a,0.1,1\nu,b,0.7,2\nu,c,0.4,3\n";
        let f = parse_score_csv(text, 3, None, "t").unwrap();
        assert_eq!(f.warnings.len(), 1);
        let items: Vec<&str> = f.lists.items(0).iter().map(Id::as_str).collect();
        assert_eq!(items, vec!["b", "c", "a"]);
        f.lists.check_candidate_order().unwrap();
    }

    #[test]
    fn wrong_length_and_nan() {
        assert!(matches!(
            parse_score_jsonl(WELL_FORMED, 3, None, "t"),
            Err(BaselineError::WrongLength { .. })
        ));
        let nan = "{\"user\": \"u\", \"items\": [\"a\"], \"scores\": [NaN]}\n";
        assert!(matches!(
            parse_score_jsonl(nan, 1, None, "t"),
            Err(BaselineError::NanScore { .. })
        ));
        let csv_nan = "user,item,score,rank\nu,a,NaN,1\n";
        assert!(matches!(
            parse_score_csv(csv_nan, 1, None, "t"),
            Err(BaselineError::NanScore { .. })
        ));
    }

    #[test]
    fn unknown_ids_rejected() {
        let universe = IdUniverse {
            users: [Id::new("u1")].into_iter().collect(),
            items: [Id::new("a"), Id::new("b")].into_iter().collect(),
        };
        let err = parse_score_jsonl(WELL_FORMED, 2, Some(&universe), "t").unwrap_err();
        assert!(matches!(err, BaselineError::UnknownId { kind: "user", .. }));
    }

    #[test]
    fn csv_round_trip() {
        let f = parse_score_jsonl(WELL_FORMED, 2, None, "t").unwrap();
        let back = parse_score_csv(&write_score_csv(&f.lists), 2, None, "t").unwrap();
        assert_eq!(back.lists, f.lists);
    }
}
