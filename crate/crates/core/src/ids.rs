//! Opaque user and item identifiers.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An opaque identifier for a user or an item.
///
/// Identifiers are ordered "naturally": two all-digit identifiers compare by
/// numeric value (so `"9" < "10"`), numeric identifiers sort before
/// non-numeric ones, and everything else compares lexicographically. Every tie
/// rule in the crate ("ascending identifier") uses this order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Id(Arc<str>);

impl Id {
    pub fn new(s: &str) -> Self {
        Id(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric_key(&self) -> Option<&str> {
        let s = self.as_str();
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            Some(s.trim_start_matches('0'))
        } else {
            None
        }
    }
}

impl Ord for Id {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric_key(), other.numeric_key()) {
            (Some(a), Some(b)) => a
                .len()
                .cmp(&b.len())
                .then_with(|| a.cmp(b))
                .then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Id {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Id {
    fn from(s: &str) -> Self {
        Id::new(s)
    }
}

impl From<String> for Id {
    fn from(s: String) -> Self {
        Id(Arc::from(s))
    }
}

impl From<u64> for Id {
    fn from(v: u64) -> Self {
        Id::from(v.to_string())
    }
}

impl Serialize for Id {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Id {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Score files written by other tools often carry numeric ids.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(u64),
            Signed(i64),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Str(s) => Id::from(s),
            Raw::Int(v) => Id::from(v),
            Raw::Signed(v) => Id::from(v.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_ids_sort_by_value() {
        let mut ids: Vec<Id> = ["10", "9", "b", "a", "100", "007"]
            .iter()
            .map(|s| Id::new(s))
            .collect();
        ids.sort();
        let sorted: Vec<&str> = ids.iter().map(Id::as_str).collect();
        assert_eq!(sorted, vec!["007", "9", "10", "100", "a", "b"]);
    }

    #[test]
    fn leading_zeros_are_distinct_but_adjacent() {
        let a = Id::new("7");
        let b = Id::new("07");
        assert_ne!(a, b);
        assert_ne!(a.cmp(&b), Ordering::Equal);
    }

    #[test]
    fn deserializes_numbers_and_strings() {
        let ids: Vec<Id> = serde_json::from_str(r#"[1, "x", 22]"#).unwrap();
        assert_eq!(ids, vec![Id::new("1"), Id::new("x"), Id::new("22")]);
    }
}
