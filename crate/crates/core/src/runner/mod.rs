//! Config-driven orchestration: one experiment, λ sweeps, mode comparisons
//! and weight selection, with content-addressed caching of splits and
//! candidate lists so that a sweep trains its baseline once.

mod config;
mod pipeline;
mod table;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::baselines::BaselineError;
use crate::corpus::CorpusError;
use crate::rerank::RerankError;

pub use config::{
    load_config, BaselineKind, ExperimentConfig, MfSettings, SweepAxis, SweepSpec,
    DEFAULT_LAMBDA_GRID,
};
pub use pipeline::{
    LambdaSelection, PreparedData, RunEvent, RunManifest, RunOutput, Runner, SweepOutput,
};
pub use table::{ComparisonRow, ComparisonTable, OutputFormat};

/// A pipeline failure, tagged with the stage that produced it.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: cannot read {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("config: {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("corpus stage: {0}")]
    Corpus(#[from] CorpusError),
    #[error("baseline stage: {0}")]
    Baseline(#[from] BaselineError),
    #[error("rerank stage: {0}")]
    Rerank(#[from] RerankError),
    #[error("output stage: cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    pub fn stage(&self) -> &'static str {
        match self {
            RunError::Config(_) | RunError::ConfigIo { .. } | RunError::ConfigParse { .. } => {
                "config"
            }
            RunError::Corpus(_) => "corpus",
            RunError::Baseline(_) => "baseline",
            RunError::Rerank(_) => "rerank",
            RunError::Output { .. } => "output",
        }
    }
}

/// Writes through a temporary sibling and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let fail = |source| RunError::Output {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, path).map_err(fail)
}
