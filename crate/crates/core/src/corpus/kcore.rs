use std::collections::HashMap;

use super::{CorpusError, Interaction, InteractionLog};
use crate::ids::Id;

/// Iteratively drops users and items with fewer than `k` interactions until
/// every remaining user and item has at least `k`.
pub fn kcore_filter(log: &InteractionLog, k: usize) -> Result<InteractionLog, CorpusError> {
    if k == 0 {
        return Err(CorpusError::InvalidParameter("k-core k must be at least 1".into()));
    }
    let mut alive: Vec<bool> = vec![true; log.len()];
    let rows = log.interactions();
    loop {
        let mut user_deg: HashMap<&Id, usize> = HashMap::new();
        let mut item_deg: HashMap<&Id, usize> = HashMap::new();
        for (it, _) in rows.iter().zip(&alive).filter(|(_, a)| **a) {
            *user_deg.entry(&it.user).or_insert(0) += 1;
            *item_deg.entry(&it.item).or_insert(0) += 1;
        }
        let mut changed = false;
        // users first, then items against the updated user set
        for (it, a) in rows.iter().zip(alive.iter_mut()) {
            if *a && user_deg[&it.user] < k {
                *a = false;
                changed = true;
                *item_deg.get_mut(&it.item).unwrap() -= 1;
            }
        }
        for (it, a) in rows.iter().zip(alive.iter_mut()) {
            if *a && item_deg[&it.item] < k {
                *a = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<Interaction> = rows
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(it, _)| it.clone())
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::Empty(format!(
            "{k}-core filtering removed every interaction"
        )));
    }
    Ok(InteractionLog::from_sorted_unique(kept))
}
