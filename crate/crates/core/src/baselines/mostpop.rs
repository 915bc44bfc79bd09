use super::{BaselineError, CandidateLists, SeenItems};
use crate::corpus::InteractionLog;
use crate::ids::Id;

/// Recommends the globally most popular unseen items to every training user.
///
/// Popularity is the number of distinct training users of an item; weights
/// are ignored. Scores are popularity min-max normalised over all of the
/// user's eligible items, so the top-N window need not reach 0.
pub fn recommend_mostpop(
    train: &InteractionLog,
    n: usize,
    seen: &SeenItems,
) -> Result<CandidateLists, BaselineError> {
    if n == 0 {
        return Err(BaselineError::InvalidParameter("N must be positive".into()));
    }
    let mut ranked: Vec<(Id, f64)> = train
        .item_counts()
        .into_iter()
        .map(|(item, c)| (item, c as f64))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let users = train.users();
    let mut lists = CandidateLists::with_capacity(users.len(), n);
    for user in users {
        let eligible: Vec<&(Id, f64)> = ranked
            .iter()
            .filter(|(item, _)| !seen.contains(&user, item))
            .collect();
        if eligible.len() < n {
            return Err(BaselineError::NotEnoughItems {
                user,
                eligible: eligible.len(),
                requested: n,
            });
        }
        // eligible is sorted descending, so the range ends are its first and last
        let max = eligible[0].1;
        let min = eligible[eligible.len() - 1].1;
        let span = max - min;
        let row: Vec<(Id, f64)> = eligible[..n]
            .iter()
            .map(|(item, c)| (item.clone(), if span > 0.0 { (c - min) / span } else { 1.0 }))
            .collect();
        lists.push_row(user, row);
    }
    Ok(lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Interaction;

    fn popularity_log() -> InteractionLog {
        // i1: 3 users, i2: 2 users, i3..i5: 1 user each; "z" has seen i3..i5
        let rows = vec![
            Interaction::new("a", "i1", 5.0),
            Interaction::new("b", "i1", 1.0),
            Interaction::new("c", "i1", 1.0),
            Interaction::new("a", "i2", 1.0),
            Interaction::new("b", "i2", 1.0),
            Interaction::new("z", "i3", 1.0),
            Interaction::new("z", "i4", 1.0),
            Interaction::new("z", "i5", 1.0),
        ];
        InteractionLog::from_interactions(rows).unwrap()
    }

    #[test]
    fn unseen_user_gets_popularity_order() {
        let log = popularity_log();
        let lists = recommend_mostpop(&log, 2, &SeenItems::from_logs(&[&log])).unwrap();
        let r = lists.row_of(&Id::new("z")).unwrap();
        let items: Vec<&str> = lists.items(r).iter().map(Id::as_str).collect();
        assert_eq!(items, vec!["i1", "i2"]);
        // z's eligible popularity range is [2, 3]
        assert_eq!(lists.scores(r), &[1.0, 0.0]);
    }

    #[test]
    fn three_item_catalog_example() {
        // train counts 30, 20, 10; nothing is excluded
        let mut rows = Vec::new();
        for (item, count) in [("i1", 30u64), ("i2", 20), ("i3", 10)] {
            for u in 0..count {
                rows.push(Interaction::new(Id::from(u), item, 1.0));
            }
        }
        let log = InteractionLog::from_interactions(rows).unwrap();
        let lists = recommend_mostpop(&log, 2, &SeenItems::none()).unwrap();
        let items: Vec<&str> = lists.items(0).iter().map(Id::as_str).collect();
        assert_eq!(items, vec!["i1", "i2"]);
        assert_eq!(lists.scores(0), &[1.0, 0.5]);
    }

    #[test]
    fn seen_popular_item_is_excluded() {
        let log = popularity_log();
        let lists = recommend_mostpop(&log, 1, &SeenItems::from_logs(&[&log])).unwrap();
        let r = lists.row_of(&Id::new("c")).unwrap();
        assert_eq!(lists.items(r)[0].as_str(), "i2");
    }

    #[test]
    fn equal_popularity_orders_by_id() {
        let rows = ["q", "p", "r"]
            .iter()
            .map(|i| Interaction::new("u", *i, 1.0))
            .collect::<Vec<_>>();
        let log = InteractionLog::from_interactions(rows).unwrap();
        let lists = recommend_mostpop(&log, 3, &SeenItems::none()).unwrap();
        let items: Vec<&str> = lists.items(0).iter().map(Id::as_str).collect();
        assert_eq!(items, vec!["p", "q", "r"]);
        assert_eq!(lists.scores(0), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn catalog_too_small() {
        let log = popularity_log();
        let err = recommend_mostpop(&log, 4, &SeenItems::from_logs(&[&log])).unwrap_err();
        assert!(matches!(err, BaselineError::NotEnoughItems { .. }));
    }

    #[test]
    fn weights_do_not_matter() {
        let log = popularity_log();
        let reweighted = InteractionLog::from_interactions(
            log.interactions()
                .iter()
                .map(|it| Interaction::new(it.user.clone(), it.item.clone(), 42.0)),
        )
        .unwrap();
        let a = recommend_mostpop(&log, 1, &SeenItems::none()).unwrap();
        let b = recommend_mostpop(&reweighted, 1, &SeenItems::none()).unwrap();
        assert_eq!(a, b);
    }
}
