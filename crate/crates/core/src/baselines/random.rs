use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{catalog, BaselineError, CandidateLists, SeenItems};
use crate::corpus::InteractionLog;
use crate::ids::Id;

/// Uniformly samples `n` unseen catalog items per user, without replacement.
///
/// The `j`-th sampled item gets score `1 - j/(n-1)` (a single item gets 1).
pub fn recommend_random(
    train: &InteractionLog,
    n: usize,
    seed: u64,
    seen: &SeenItems,
) -> Result<CandidateLists, BaselineError> {
    if n == 0 {
        return Err(BaselineError::InvalidParameter("N must be positive".into()));
    }
    let items = catalog(train);
    let users = train.users();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lists = CandidateLists::with_capacity(users.len(), n);
    for user in users {
        let eligible: Vec<&Id> = items.iter().filter(|i| !seen.contains(&user, i)).collect();
        if eligible.len() < n {
            return Err(BaselineError::NotEnoughItems {
                user,
                eligible: eligible.len(),
                requested: n,
            });
        }
        let picked = index::sample(&mut rng, eligible.len(), n);
        let row: Vec<(Id, f64)> = picked
            .into_iter()
            .enumerate()
            .map(|(j, idx)| (eligible[idx].clone(), spaced_score(j, n)))
            .collect();
        lists.push_row(user, row);
    }
    Ok(lists)
}

fn spaced_score(position: usize, n: usize) -> f64 {
    if n <= 1 {
        1.0
    } else {
        1.0 - position as f64 / (n - 1) as f64
    }
}
