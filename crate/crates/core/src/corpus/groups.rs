use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{ceil_fraction, CorpusError, InteractionLog};
use crate::ids::Id;

/// Group indicator used in the adjusted score: `+1` for the protected group
/// (inactive users, long-tail items), `-1` for the advantaged one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Protected,
    Advantaged,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Protected => 1.0,
            Sign::Advantaged => -1.0,
        }
    }
}

/// Disjoint active/inactive users and short-head/long-tail items.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    pub active_users: BTreeSet<Id>,
    pub inactive_users: BTreeSet<Id>,
    pub short_head_items: BTreeSet<Id>,
    pub long_tail_items: BTreeSet<Id>,
    user_sign: HashMap<Id, Sign>,
    item_sign: HashMap<Id, Sign>,
}

impl GroupAssignment {
    /// Builds an assignment from explicit advantaged sets.
    pub fn from_sets(
        active_users: BTreeSet<Id>,
        inactive_users: BTreeSet<Id>,
        short_head_items: BTreeSet<Id>,
        long_tail_items: BTreeSet<Id>,
    ) -> Self {
        let user_sign = active_users
            .iter()
            .map(|u| (u.clone(), Sign::Advantaged))
            .chain(inactive_users.iter().map(|u| (u.clone(), Sign::Protected)))
            .collect();
        let item_sign = short_head_items
            .iter()
            .map(|i| (i.clone(), Sign::Advantaged))
            .chain(long_tail_items.iter().map(|i| (i.clone(), Sign::Protected)))
            .collect();
        GroupAssignment {
            active_users,
            inactive_users,
            short_head_items,
            long_tail_items,
            user_sign,
            item_sign,
        }
    }

    /// Users never seen in training have no activity and count as inactive.
    pub fn user_sign(&self, user: &Id) -> Sign {
        self.user_sign.get(user).copied().unwrap_or(Sign::Protected)
    }

    /// Items with no training interactions count as long-tail.
    pub fn item_sign(&self, item: &Id) -> Sign {
        self.item_sign.get(item).copied().unwrap_or(Sign::Protected)
    }

    pub fn is_active(&self, user: &Id) -> bool {
        self.user_sign(user) == Sign::Advantaged
    }

    pub fn is_short_head(&self, item: &Id) -> bool {
        self.item_sign(item) == Sign::Advantaged
    }

    pub fn has_both_user_groups(&self) -> bool {
        !self.active_users.is_empty() && !self.inactive_users.is_empty()
    }

    pub fn has_both_item_groups(&self) -> bool {
        !self.short_head_items.is_empty() && !self.long_tail_items.is_empty()
    }
}

/// Splits users and items of the training log into the top
/// `ceil(fraction * count)` by interaction count and the rest. Boundary ties
/// go to the smaller identifier.
pub fn segment_groups(
    train: &InteractionLog,
    user_top_fraction: f64,
    item_top_fraction: f64,
) -> Result<GroupAssignment, CorpusError> {
    for (name, f) in [("user", user_top_fraction), ("item", item_top_fraction)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(CorpusError::InvalidParameter(format!(
                "{name} top fraction must lie in (0, 1), got {f}"
            )));
        }
    }
    let (active, inactive) = top_fraction(train.user_counts(), user_top_fraction, "user")?;
    let (short_head, long_tail) = top_fraction(train.item_counts(), item_top_fraction, "item")?;
    Ok(GroupAssignment::from_sets(active, inactive, short_head, long_tail))
}

fn top_fraction(
    counts: std::collections::BTreeMap<Id, usize>,
    fraction: f64,
    what: &str,
) -> Result<(BTreeSet<Id>, BTreeSet<Id>), CorpusError> {
    let total = counts.len();
    let top = ceil_fraction(fraction, total);
    if top >= total {
        return Err(CorpusError::DegenerateGroups(format!(
            "ceil({fraction} * {total}) = {top} would place every {what} in the advantaged group"
        )));
    }
    let mut ranked: Vec<(Id, usize)> = counts.into_iter().collect();
    // BTreeMap order is ascending id, and the sort is stable
    ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
    let rest = ranked.split_off(top);
    Ok((
        ranked.into_iter().map(|(id, _)| id).collect(),
        rest.into_iter().map(|(id, _)| id).collect(),
    ))
}
