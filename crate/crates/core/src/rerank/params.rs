use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RerankError;
use crate::corpus::GroupAssignment;

/// Which fairness terms are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Fairness-unaware baseline top-K.
    N,
    /// Consumer side only.
    C,
    /// Producer side only.
    P,
    /// Both sides.
    CP,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::N, Mode::C, Mode::P, Mode::CP];

    /// Zeroes the weights a mode does not use.
    pub fn mask(self, lambda1: f64, lambda2: f64) -> (f64, f64) {
        match self {
            Mode::N => (0.0, 0.0),
            Mode::C => (lambda1, 0.0),
            Mode::P => (0.0, lambda2),
            Mode::CP => (lambda1, lambda2),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::N => "N",
            Mode::C => "C",
            Mode::P => "P",
            Mode::CP => "CP",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "N" => Ok(Mode::N),
            "C" => Ok(Mode::C),
            "P" => Ok(Mode::P),
            "CP" => Ok(Mode::CP),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Consumer-benefit estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McStrategy {
    /// The candidate's own normalised score.
    ScoreProxy,
    /// Discounted gain of the candidate slot against validation items.
    ValidationDcg,
    /// Discounted gain against training items; needs candidate lists that
    /// keep training items.
    TrainDcg,
}

impl fmt::Display for McStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            McStrategy::ScoreProxy => "score-proxy",
            McStrategy::ValidationDcg => "validation-dcg",
            McStrategy::TrainDcg => "train-dcg",
        };
        f.write_str(s)
    }
}

impl FromStr for McStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "score-proxy" => Ok(McStrategy::ScoreProxy),
            "validation-dcg" => Ok(McStrategy::ValidationDcg),
            "train-dcg" => Ok(McStrategy::TrainDcg),
            other => Err(format!("unknown consumer-benefit strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FairnessParams {
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mc_strategy: McStrategy,
    pub mode: Mode,
}

impl FairnessParams {
    pub fn new(
        mode: Mode,
        lambda1: f64,
        lambda2: f64,
        k: usize,
        n: usize,
        mc_strategy: McStrategy,
    ) -> Result<Self, RerankError> {
        let p = FairnessParams {
            lambda1,
            lambda2,
            k,
            n,
            mc_strategy,
            mode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RerankError> {
        let bad = |msg: String| Err(RerankError::InvalidParams(msg));
        for (name, l) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(0.0..=1.0).contains(&l) {
                return bad(format!("{name} must lie in [0, 1], got {l}"));
            }
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("need 1 <= K <= N, got K = {}, N = {}", self.k, self.n));
        }
        let (l1, l2) = self.mode.mask(self.lambda1, self.lambda2);
        if l1 != self.lambda1 || l2 != self.lambda2 {
            return bad(format!(
                "mode {} does not allow (lambda1, lambda2) = ({}, {})",
                self.mode, self.lambda1, self.lambda2
            ));
        }
        if self.mode == Mode::C && self.mc_strategy == McStrategy::ScoreProxy {
            // a per-user monotone benefit cannot reorder a user's list when
            // only the consumer term is active
            return bad("score-proxy consumer benefit cannot be used in mode C".into());
        }
        Ok(())
    }

    /// The weights actually applied: a term whose groups are degenerate (one
    /// side empty) is dropped with a warning.
    pub fn effective_lambdas(&self, groups: &GroupAssignment) -> (f64, f64) {
        let mut l1 = self.lambda1;
        let mut l2 = self.lambda2;
        if l1 != 0.0 && !groups.has_both_user_groups() {
            log::warn!("one user group is empty; dropping the consumer fairness term");
            l1 = 0.0;
        }
        if l2 != 0.0 && !groups.has_both_item_groups() {
            log::warn!("one item group is empty; dropping the producer fairness term");
            l2 = 0.0;
        }
        (l1, l2)
    }
}
