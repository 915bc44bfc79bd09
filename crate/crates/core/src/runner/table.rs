use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::Runner;
use super::RunError;
use crate::metrics::{derived_columns, FairnessReport};
use crate::rerank::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Md,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "md" | "markdown" => Ok(OutputFormat::Md),
            other => Err(format!("unknown output format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ComparisonRow {
    pub label: String,
    pub report: FairnessReport,
}

/// Results-table rows for several modes over the same data and baseline,
/// with Δ% measured against the N row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.rows).expect("reports serialize");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut s = format!("Mode,{}\n", FairnessReport::csv_header());
                for row in &self.rows {
                    let _ = writeln!(s, "{},{}", row.label, row.report.csv_row());
                }
                s
            }
            OutputFormat::Md => {
                let cols = FairnessReport::COLUMNS;
                let mut s = format!("| Mode | {} |\n", cols.join(" | "));
                let _ = writeln!(s, "|---|{}", "---|".repeat(cols.len()));
                for row in &self.rows {
                    let _ = writeln!(s, "{}", row.report.markdown_row(&row.label));
                }
                s
            }
        }
    }

    pub fn row(&self, label: &str) -> Option<&FairnessReport> {
        self.rows.iter().find(|r| r.label == label).map(|r| &r.report)
    }
}

impl Runner {
    /// Runs each config and tabulates them. The configs must share data,
    /// baseline, `K` and `w`, and exactly one must be mode N.
    pub fn compare_modes(&self, configs: &[ExperimentConfig]) -> Result<ComparisonTable, RunError> {
        let reference_count = configs.iter().filter(|c| c.mode == Mode::N).count();
        if reference_count != 1 {
            return Err(RunError::Config(format!(
                "a comparison needs exactly one mode N config, got {reference_count}"
            )));
        }
        let outputs = configs
            .iter()
            .map(|c| self.run_experiment(c))
            .collect::<Result<Vec<_>, _>>()?;
        let first = &outputs[0].manifest;
        for out in &outputs[1..] {
            let m = &out.manifest;
            if m.data_key != first.data_key || m.candidates_key != first.candidates_key {
                return Err(RunError::Config(
                    "compared configs must share dataset, split and baseline".into(),
                ));
            }
            if m.config.k != first.config.k || m.config.w != first.config.w {
                return Err(RunError::Config("compared configs must share K and w".into()));
            }
        }
        let reference = outputs
            .iter()
            .find(|o| o.manifest.config.mode == Mode::N)
            .map(|o| o.report.clone())
            .expect("checked above");
        let rows = outputs
            .into_iter()
            .map(|o| {
                let mut report = o.report;
                let (over_all, delta) = derived_columns(&report, Some(&reference));
                report.mcpf_over_all = over_all;
                report.delta_percent = delta;
                ComparisonRow {
                    label: o.manifest.config.mode.to_string(),
                    report,
                }
            })
            .collect();
        Ok(ComparisonTable { rows })
    }

    /// The four modes of `base`, sharing its weights.
    pub fn compare_all_modes(&self, base: &ExperimentConfig) -> Result<ComparisonTable, RunError> {
        let configs: Vec<ExperimentConfig> = Mode::ALL
            .iter()
            .map(|&m| ExperimentConfig {
                output_dir: base.output_dir.as_ref().map(|d| d.join(m.to_string())),
                ..base.with_mode(m)
            })
            .collect();
        self.compare_modes(&configs)
    }
}
