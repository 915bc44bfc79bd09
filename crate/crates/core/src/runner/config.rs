use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::baselines::MfConfig;
use crate::corpus::{InputFormat, Proportions};
use crate::rerank::{FairnessParams, McStrategy, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Mostpop,
    Random,
    Mf,
    /// Scores exported by another model, read from `baselinePath`.
    External,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Mostpop => "mostpop",
            BaselineKind::Random => "random",
            BaselineKind::Mf => "mf",
            BaselineKind::External => "external",
        }
    }
}

/// Matrix-factorisation hyperparameters; the seed comes from `baselineSeed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct MfSettings {
    pub factors: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub regularization: f64,
}

impl Default for MfSettings {
    fn default() -> Self {
        let d = MfConfig::default();
        MfSettings {
            factors: d.factors,
            epochs: d.epochs,
            learning_rate: d.learning_rate,
            negatives_per_positive: d.negatives_per_positive,
            regularization: d.regularization,
        }
    }
}

impl MfSettings {
    pub fn to_config(&self, seed: u64) -> MfConfig {
        MfConfig {
            factors: self.factors,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            negatives_per_positive: self.negatives_per_positive,
            regularization: self.regularization,
            seed,
        }
    }
}

fn default_format() -> InputFormat {
    InputFormat::Tsv
}
fn default_kcore() -> usize {
    5
}
fn default_k() -> usize {
    10
}
fn default_n() -> usize {
    100
}
fn default_strategy() -> McStrategy {
    McStrategy::ValidationDcg
}
fn default_w() -> f64 {
    0.5
}
fn default_user_fraction() -> f64 {
    0.05
}
fn default_item_fraction() -> f64 {
    0.2
}
fn yes() -> bool {
    true
}

/// One end-to-end experiment. Relative paths are resolved against the
/// directory of the config file by [`load_config`].
///
/// The fairness weights a mode does not use are ignored, so one set of
/// weights can be shared by the N, C, P and CP variants of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    #[serde(default = "default_format")]
    pub dataset_format: InputFormat,
    #[serde(default = "default_kcore")]
    pub kcore: usize,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default)]
    pub split_proportions: Proportions,
    pub baseline: BaselineKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_path: Option<PathBuf>,
    #[serde(default)]
    pub baseline_seed: u64,
    #[serde(default)]
    pub mf: MfSettings,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(rename = "K", default = "default_k")]
    pub k: usize,
    pub mode: Mode,
    #[serde(default)]
    pub lambda1: f64,
    #[serde(default)]
    pub lambda2: f64,
    #[serde(default = "default_strategy")]
    pub mc_strategy: McStrategy,
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default = "default_user_fraction")]
    pub user_top_fraction: f64,
    #[serde(default = "default_item_fraction")]
    pub item_top_fraction: f64,
    #[serde(default = "yes")]
    pub exclude_seen: bool,
    #[serde(default)]
    pub absolute_mcpf: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(dataset_path: impl Into<PathBuf>, baseline: BaselineKind, mode: Mode) -> Self {
        ExperimentConfig {
            dataset_path: dataset_path.into(),
            dataset_format: default_format(),
            kcore: default_kcore(),
            split_seed: 0,
            split_proportions: Proportions::default(),
            baseline,
            baseline_path: None,
            baseline_seed: 0,
            mf: MfSettings::default(),
            n: default_n(),
            k: default_k(),
            mode,
            lambda1: 0.0,
            lambda2: 0.0,
            mc_strategy: default_strategy(),
            w: default_w(),
            user_top_fraction: default_user_fraction(),
            item_top_fraction: default_item_fraction(),
            exclude_seen: true,
            absolute_mcpf: false,
            output_dir: None,
        }
    }

    /// Same experiment under another mode.
    pub fn with_mode(&self, mode: Mode) -> Self {
        ExperimentConfig { mode, ..self.clone() }
    }

    pub fn with_lambdas(&self, lambda1: f64, lambda2: f64) -> Self {
        ExperimentConfig {
            lambda1,
            lambda2,
            ..self.clone()
        }
    }

    /// Re-ranking parameters with the unused weights masked out by the mode.
    pub fn fairness_params(&self) -> Result<FairnessParams, RunError> {
        let (l1, l2) = self.mode.mask(self.lambda1, self.lambda2);
        FairnessParams::new(self.mode, l1, l2, self.k, self.n, self.mc_strategy)
            .map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if !self.dataset_path.is_file() {
            return bad(format!("dataset {} does not exist", self.dataset_path.display()));
        }
        match (&self.baseline, &self.baseline_path) {
            (BaselineKind::External, None) => {
                return bad("baseline \"external\" needs baselinePath".into())
            }
            (BaselineKind::External, Some(p)) if !p.is_file() => {
                return bad(format!("score file {} does not exist", p.display()))
            }
            (BaselineKind::External, Some(_)) => {}
            (kind, Some(_)) => {
                return bad(format!("baselinePath is only used by \"external\", not {:?}", kind.name()))
            }
            _ => {}
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("w", self.w)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        for (name, f) in [
            ("userTopFraction", self.user_top_fraction),
            ("itemTopFraction", self.item_top_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {f}"));
            }
        }
        if self.mc_strategy == McStrategy::TrainDcg && self.exclude_seen {
            return bad("mcStrategy train-dcg needs excludeSeen = false".into());
        }
        self.fairness_params()?;
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::ConfigIo {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|source| RunError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    resolve(&mut config.dataset_path);
    if let Some(p) = config.baseline_path.as_mut() {
        resolve(p);
    }
    if let Some(p) = config.output_dir.as_mut() {
        resolve(p);
    }
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Lambda1,
    Lambda2,
    BothGrid,
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambda1" => Ok(SweepAxis::Lambda1),
            "lambda2" => Ok(SweepAxis::Lambda2),
            "both-grid" | "both" => Ok(SweepAxis::BothGrid),
            other => Err(format!("unknown sweep axis {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// The weight held fixed on a one-axis sweep.
    #[serde(default)]
    pub fixed_other: f64,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>, fixed_other: f64) -> Result<Self, RunError> {
        let spec = SweepSpec {
            axis,
            values,
            fixed_other,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.values.is_empty() {
            return Err(RunError::Config("sweep needs at least one value".into()));
        }
        if let Some(v) = self
            .values
            .iter()
            .chain([&self.fixed_other])
            .find(|v| !(0.0..=1.0).contains(*v))
        {
            return Err(RunError::Config(format!("sweep value {v} is outside [0, 1]")));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RunError::Config("sweep values must be strictly increasing".into()));
        }
        Ok(())
    }

    /// `(lambda1, lambda2)` grid points, row-major over `lambda1` for a grid.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self.axis {
            SweepAxis::Lambda1 => self.values.iter().map(|&v| (v, self.fixed_other)).collect(),
            SweepAxis::Lambda2 => self.values.iter().map(|&v| (self.fixed_other, v)).collect(),
            SweepAxis::BothGrid => self
                .values
                .iter()
                .flat_map(|&a| self.values.iter().map(move |&b| (a, b)))
                .collect(),
        }
    }
}

/// Default per-axis grid for weight selection.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0];
