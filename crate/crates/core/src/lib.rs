//! Two-sided fair re-ranking for top-K recommendation.
//!
//! The pipeline is `corpus` (load, k-core, split, groups) → `baselines`
//! (top-N candidates with scores) → `rerank` (select K of N per user under
//! consumer and producer fairness weights) → `metrics` (nDCG per user group,
//! exposure, DCF/DPF, mCPF). `runner` wires these together behind a JSON
//! config and the `fairrerank` command-line tool.

pub mod baselines;
pub mod corpus;
pub mod ids;
pub mod metrics;
pub mod rerank;
pub mod runner;
pub mod synth;

pub use ids::Id;
