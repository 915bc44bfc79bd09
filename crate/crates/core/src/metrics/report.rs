use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    coverage, dcf_reported, delta_percent, exposure_and_dpf, group_relevance, mcpf, mcpf_abs,
    novelty, per_user_ndcg,
};
use crate::baselines::RankedLists;
use crate::corpus::{GroupAssignment, InteractionLog};
use crate::rerank::{McStrategy, Mode};

/// Where a report came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Provenance {
    pub mode: Option<Mode>,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mc_strategy: Option<McStrategy>,
    pub baseline: String,
    pub dataset: String,
    pub split_seed: u64,
    pub baseline_seed: u64,
    pub kcore: usize,
    pub objective_value: Option<f64>,
}

/// Every evaluation quantity for one set of fair lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FairnessReport {
    pub ndcg_all: f64,
    pub ndcg_active: Option<f64>,
    pub ndcg_inactive: Option<f64>,
    /// `M_active - M_inactive`.
    pub dcf_raw: f64,
    /// `(M_active - M_inactive) / (M_active + M_inactive)`.
    pub dcf_reported: f64,
    pub exposure_short: f64,
    pub exposure_long: f64,
    pub dpf: f64,
    pub novelty: f64,
    pub coverage: f64,
    pub mcpf: f64,
    pub mcpf_over_all: Option<f64>,
    pub delta_percent: Option<f64>,
    pub w: f64,
    pub absolute_mcpf: bool,
    pub evaluated_users: usize,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

pub struct ReportInputs<'a> {
    pub fair_lists: &'a RankedLists,
    pub train: &'a InteractionLog,
    pub test: &'a InteractionLog,
    pub groups: &'a GroupAssignment,
    /// Catalog size for coverage.
    pub m: usize,
    pub w: f64,
    pub absolute_mcpf: bool,
    pub reference: Option<&'a FairnessReport>,
    pub provenance: Provenance,
}

pub fn assemble_report(inputs: ReportInputs<'_>) -> FairnessReport {
    let k = inputs.fair_lists.list_len();
    let per_user = per_user_ndcg(inputs.fair_lists, inputs.test, k);
    let relevance = group_relevance(&per_user, inputs.groups);
    let mut warnings = Vec::new();
    let (dcf_raw, dcf_norm) = match (relevance.active, relevance.inactive) {
        (Some(a), Some(i)) => (a - i, dcf_reported(a, i)),
        _ => {
            let msg = "a user group has no evaluable users; consumer fairness terms dropped";
            log::warn!("{msg}");
            warnings.push(msg.to_string());
            (0.0, 0.0)
        }
    };
    if per_user.is_empty() {
        let msg = "no user has test items; nDCG is reported as 0";
        log::warn!("{msg}");
        warnings.push(msg.to_string());
    }
    let exposure = exposure_and_dpf(inputs.fair_lists, inputs.groups);
    let mcpf_value = if inputs.absolute_mcpf {
        mcpf_abs(dcf_norm, exposure.dpf, inputs.w)
    } else {
        mcpf(dcf_norm, exposure.dpf, inputs.w)
    };
    let mut report = FairnessReport {
        ndcg_all: relevance.all,
        ndcg_active: relevance.active,
        ndcg_inactive: relevance.inactive,
        dcf_raw,
        dcf_reported: dcf_norm,
        exposure_short: exposure.short,
        exposure_long: exposure.long,
        dpf: exposure.dpf,
        novelty: novelty(inputs.fair_lists, inputs.train),
        coverage: coverage(inputs.fair_lists, inputs.m),
        mcpf: mcpf_value,
        mcpf_over_all: None,
        delta_percent: None,
        w: inputs.w,
        absolute_mcpf: inputs.absolute_mcpf,
        evaluated_users: per_user.len(),
        warnings,
        provenance: inputs.provenance,
    };
    let (over_all, delta) = derived_columns(&report, inputs.reference);
    report.mcpf_over_all = over_all;
    report.delta_percent = delta;
    report
}

/// `mCPF / nDCG_all` and the relative mCPF improvement over `reference`.
pub fn derived_columns(
    report: &FairnessReport,
    reference: Option<&FairnessReport>,
) -> (Option<f64>, Option<f64>) {
    let over_all = (report.ndcg_all != 0.0).then(|| report.mcpf / report.ndcg_all);
    let delta = reference
        .filter(|r| r.mcpf != 0.0)
        .map(|r| delta_percent(r.mcpf, report.mcpf));
    (over_all, delta)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.4}"))
}

impl FairnessReport {
    pub const COLUMNS: [&'static str; 12] = [
        "All", "Active", "Inactive", "DCF", "Nov.", "Cov.", "Short.", "Long.", "DPF", "mCPF",
        "mCPF/All", "Delta%",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            format!("{:.4}", self.ndcg_all),
            opt(self.ndcg_active),
            opt(self.ndcg_inactive),
            format!("{:.4}", self.dcf_reported),
            format!("{:.4}", self.novelty),
            format!("{:.4}", self.coverage),
            format!("{:.4}", self.exposure_short),
            format!("{:.4}", self.exposure_long),
            format!("{:.4}", self.dpf),
            format!("{:.4}", self.mcpf),
            opt(self.mcpf_over_all),
            self.delta_percent.map_or_else(String::new, |v| format!("{v:.2}")),
        ]
    }

    pub fn csv_header() -> String {
        Self::COLUMNS.join(",")
    }

    /// The results-table columns, in order, as one CSV line.
    pub fn csv_row(&self) -> String {
        self.cells().join(",")
    }

    pub fn markdown_row(&self, label: &str) -> String {
        let mut s = String::new();
        let _ = write!(s, "| {label} | {} |", self.cells().join(" | "));
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Interaction;
    use crate::ids::Id;
    use std::collections::BTreeSet;

    fn sample() -> FairnessReport {
        let train = InteractionLog::from_interactions(vec![
            Interaction::new("u1", "a", 1.0),
            Interaction::new("u1", "b", 1.0),
            Interaction::new("u2", "a", 1.0),
            Interaction::new("u2", "c", 1.0),
        ])
        .unwrap();
        let test = InteractionLog::from_interactions(vec![
            Interaction::new("u1", "c", 1.0),
            Interaction::new("u2", "b", 1.0),
        ])
        .unwrap();
        let groups = GroupAssignment::from_sets(
            [Id::new("u1")].into_iter().collect(),
            [Id::new("u2")].into_iter().collect(),
            [Id::new("a")].into_iter().collect(),
            ["b", "c"].iter().map(|s| Id::new(s)).collect::<BTreeSet<_>>(),
        );
        let lists = RankedLists::from_rows(
            vec![
                (Id::new("u1"), vec![(Id::new("c"), 1.0), (Id::new("a"), 0.0)]),
                (Id::new("u2"), vec![(Id::new("a"), 1.0), (Id::new("b"), 0.0)]),
            ],
            2,
        )
        .unwrap();
        assemble_report(ReportInputs {
            fair_lists: &lists,
            train: &train,
            test: &test,
            groups: &groups,
            m: 3,
            w: 0.5,
            absolute_mcpf: false,
            reference: None,
            provenance: Provenance::default(),
        })
    }

    #[test]
    fn report_fields() {
        let r = sample();
        assert_eq!(r.ndcg_active, Some(1.0));
        let inactive = 1.0 / 3f64.log2();
        assert!((r.ndcg_inactive.unwrap() - inactive).abs() < 1e-15);
        assert_eq!(r.exposure_short, 0.5);
        assert_eq!(r.exposure_short + r.exposure_long, 1.0);
        assert_eq!(r.dpf, 0.0);
        assert_eq!(r.coverage, 1.0);
        assert!(r.delta_percent.is_none());
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: FairnessReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn self_reference_delta_is_zero() {
        let r = sample();
        let (_, delta) = derived_columns(&r, Some(&r));
        if r.mcpf != 0.0 {
            assert_eq!(delta, Some(0.0));
        }
    }

    #[test]
    fn csv_has_twelve_columns() {
        let r = sample();
        assert_eq!(r.csv_row().split(',').count(), 12);
        assert_eq!(FairnessReport::csv_header().split(',').count(), 12);
    }
}
