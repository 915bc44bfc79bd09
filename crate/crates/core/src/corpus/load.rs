use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Interaction, InteractionLog};

/// Supported tabular layouts. All carry `user, item, weight[, timestamp]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Tsv,
    Csv,
    /// MovieLens dumps: tab-separated (`u.data`) or `::`-separated (`ratings.dat`).
    Movielens,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(InputFormat::Tsv),
            "csv" => Ok(InputFormat::Csv),
            "movielens" => Ok(InputFormat::Movielens),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

/// Reads an interaction file and deduplicates it.
pub fn load_interactions(path: &Path, format: InputFormat) -> Result<InteractionLog, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_interactions(&text, format, &path.display().to_string())
}

/// Parses interaction text. `source_name` only appears in error messages.
///
/// A first row whose weight field is not numeric is treated as a header.
pub fn parse_interactions(
    text: &str,
    format: InputFormat,
    source_name: &str,
) -> Result<InteractionLog, CorpusError> {
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, format);
        let malformed = |message: String| CorpusError::Malformed {
            source_name: source_name.to_string(),
            line: line_no,
            message,
        };
        if fields.len() < 3 || fields.len() > 4 {
            return Err(malformed(format!(
                "expected 3 or 4 columns (user, item, weight[, timestamp]), found {}",
                fields.len()
            )));
        }
        let weight = match fields[2].parse::<f64>() {
            Ok(w) => w,
            Err(_) if !seen_data => {
                seen_data = true;
                continue;
            }
            Err(_) => return Err(malformed(format!("weight {:?} is not a number", fields[2]))),
        };
        seen_data = true;
        if !weight.is_finite() || weight < 0.0 {
            return Err(malformed(format!("weight {weight} must be a finite non-negative number")));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(malformed("empty user or item identifier".into()));
        }
        let mut it = Interaction::new(fields[0], fields[1], weight);
        if let Some(ts) = fields.get(3) {
            let ts = ts
                .parse::<i64>()
                .map_err(|_| malformed(format!("timestamp {ts:?} is not an integer")))?;
            it = it.with_timestamp(ts);
        }
        rows.push(it);
    }
    if rows.is_empty() {
        return Err(CorpusError::Empty(format!("{source_name} contains no interactions")));
    }
    InteractionLog::from_interactions(rows)
}

fn split_fields(line: &str, format: InputFormat) -> Vec<&str> {
    let parts: Vec<&str> = match format {
        InputFormat::Tsv => line.split('\t').collect(),
        InputFormat::Csv => line.split(',').collect(),
        InputFormat::Movielens if line.contains("::") => line.split("::").collect(),
        InputFormat::Movielens => line.split('\t').collect(),
    };
    parts.into_iter().map(str::trim).collect()
}
