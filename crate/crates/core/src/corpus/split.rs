use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Interaction, InteractionLog};

/// Minimum interactions a user needs before it can be split.
pub const MIN_INTERACTIONS_FOR_SPLIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for Proportions {
    fn default() -> Self {
        Proportions {
            train: 0.7,
            validation: 0.1,
            test: 0.2,
        }
    }
}

impl Proportions {
    fn validate(&self) -> Result<(), CorpusError> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(CorpusError::InvalidParameter(format!(
                "split proportions must be non-negative, got {parts:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidParameter(format!(
                "split proportions must sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }

    /// Largest-remainder apportionment of `count` interactions into
    /// (train, validation, test). Equal remainders favour the earlier part.
    pub fn apportion(&self, count: usize) -> [usize; 3] {
        let quotas = [self.train, self.validation, self.test].map(|p| p * count as f64);
        let mut sizes = quotas.map(|q| (q + 1e-9).floor() as usize);
        let assigned: usize = sizes.iter().sum();
        let mut order = [0usize, 1, 2];
        let remainder = |j: usize| quotas[j] - sizes[j] as f64;
        order.sort_by(|&a, &b| {
            let (ra, rb) = (remainder(a), remainder(b));
            if (ra - rb).abs() <= 1e-9 {
                a.cmp(&b)
            } else {
                rb.partial_cmp(&ra).unwrap()
            }
        });
        for &j in order.iter().take(count.saturating_sub(assigned)) {
            sizes[j] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone)]
pub struct SplitBundle {
    pub train: InteractionLog,
    pub validation: InteractionLog,
    pub test: InteractionLog,
    pub seed: u64,
    pub proportions: Proportions,
}

/// Sizes of one split part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartCounts {
    pub users: usize,
    pub items: usize,
    pub interactions: usize,
}

impl PartCounts {
    pub fn of(log: &InteractionLog) -> Self {
        PartCounts {
            users: log.n(),
            items: log.m(),
            interactions: log.len(),
        }
    }
}

/// Provenance record written next to split outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SplitManifest {
    pub seed: u64,
    pub proportions: Proportions,
    pub k: usize,
    pub train: PartCounts,
    pub validation: PartCounts,
    pub test: PartCounts,
}

impl SplitBundle {
    pub fn manifest(&self, k: usize) -> SplitManifest {
        SplitManifest {
            seed: self.seed,
            proportions: self.proportions,
            k,
            train: PartCounts::of(&self.train),
            validation: PartCounts::of(&self.validation),
            test: PartCounts::of(&self.test),
        }
    }
}

/// Per-user random split. Each user's interactions are shuffled with a
/// seeded generator and cut according to [`Proportions::apportion`].
pub fn split(
    log: &InteractionLog,
    proportions: Proportions,
    seed: u64,
) -> Result<SplitBundle, CorpusError> {
    proportions.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<Interaction>; 3] = Default::default();
    for (user, rows) in log.by_user() {
        if rows.len() < MIN_INTERACTIONS_FOR_SPLIT {
            return Err(CorpusError::TooFewInteractions {
                user: user.clone(),
                count: rows.len(),
                needed: MIN_INTERACTIONS_FOR_SPLIT,
            });
        }
        let sizes = proportions.apportion(rows.len());
        if sizes[0] == 0 {
            return Err(CorpusError::TooFewInteractions {
                user: user.clone(),
                count: rows.len(),
                needed: MIN_INTERACTIONS_FOR_SPLIT,
            });
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.shuffle(&mut rng);
        let mut cursor = 0;
        for (part, &size) in parts.iter_mut().zip(&sizes) {
            let mut chosen: Vec<usize> = order[cursor..cursor + size].to_vec();
            chosen.sort_unstable();
            part.extend(chosen.into_iter().map(|i| rows[i].clone()));
            cursor += size;
        }
    }
    let [train, validation, test] = parts;
    Ok(SplitBundle {
        train: InteractionLog::from_sorted_unique(train),
        validation: InteractionLog::from_sorted_unique(validation),
        test: InteractionLog::from_sorted_unique(test),
        seed,
        proportions,
    })
}
