use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{BaselineKind, ExperimentConfig, SweepSpec};
use super::{write_atomic, RunError};
use crate::baselines::{
    load_external_scores, recommend_mf, recommend_mostpop, recommend_random, train_mf,
    write_score_jsonl, CandidateLists, IdUniverse, RankedLists, SeenItems,
};
use crate::corpus::{
    kcore_filter, load_interactions, segment_groups, split, GroupAssignment, InteractionLog,
    SplitBundle, SplitManifest,
};
use crate::metrics::{assemble_report, derived_columns, FairnessReport, Provenance, ReportInputs};
use crate::rerank::{
    par_greedy_rerank, BenefitTables, FairnessParams, McInputs, McStrategy, Mode, RerankSidecar,
};

/// Filtered corpus, its split and the group segmentation of its training part.
#[derive(Debug)]
pub struct PreparedData {
    pub key: String,
    pub dataset_sha256: String,
    pub filtered: InteractionLog,
    pub split: SplitBundle,
    pub groups: GroupAssignment,
}

#[derive(Debug)]
struct Candidates {
    key: String,
    lists: CandidateLists,
    warnings: Vec<String>,
}

/// One cache decision, in the order it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunEvent {
    pub stage: &'static str,
    /// `computed` or `reused`.
    pub action: &'static str,
    pub key: String,
}

/// Everything recorded next to a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub dataset_sha256: String,
    pub data_key: String,
    pub candidates_key: String,
    pub split: SplitManifest,
    pub baseline_warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: FairnessReport,
    pub fair_lists: RankedLists,
    pub sidecar: RerankSidecar,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    /// One entry per grid point, in grid order.
    pub points: Vec<((f64, f64), FairnessReport)>,
    /// Long-form `lambda1,lambda2,metric,value` rows with a header.
    pub csv: String,
}

#[derive(Debug, Clone)]
pub struct LambdaSelection {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `nDCG_all - mCPF` at the chosen point.
    pub score: f64,
    pub report: FairnessReport,
    /// Every evaluated point.
    pub candidates: Vec<((f64, f64), FairnessReport)>,
}

/// Runs experiments and remembers splits and candidate lists by content hash.
#[derive(Debug, Default)]
pub struct Runner {
    data: Mutex<HashMap<String, Arc<PreparedData>>>,
    candidates: Mutex<HashMap<String, Arc<Candidates>>>,
    events: Mutex<Vec<RunEvent>>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn record_key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("config values serialize")
}

impl Runner {
    pub fn new() -> Self {
        Runner::default()
    }

    pub fn events(&self) -> Vec<RunEvent> {
        self.events.lock().unwrap().clone()
    }

    /// How many times a baseline was actually computed.
    pub fn baseline_trainings(&self) -> usize {
        self.events
            .lock()
            .unwrap()
            .iter()
            .filter(|e| e.stage == "baseline" && e.action == "computed")
            .count()
    }

    fn record(&self, stage: &'static str, action: &'static str, key: &str) {
        log::info!("{stage}: {action} {}", &key[..12]);
        self.events.lock().unwrap().push(RunEvent {
            stage,
            action,
            key: key.to_string(),
        });
    }

    /// Loads, filters, splits and segments the dataset, or returns the cached result.
    pub fn prepare_data(&self, config: &ExperimentConfig) -> Result<Arc<PreparedData>, RunError> {
        let bytes = fs::read(&config.dataset_path).map_err(|source| {
            RunError::Corpus(crate::corpus::CorpusError::Io {
                path: config.dataset_path.clone(),
                source,
            })
        })?;
        let digest = sha256_hex(&bytes);
        drop(bytes);
        let key = record_key(&[
            "data",
            &digest,
            &json(&config.dataset_format),
            &config.kcore.to_string(),
            &config.split_seed.to_string(),
            &json(&config.split_proportions),
            &json(&config.user_top_fraction),
            &json(&config.item_top_fraction),
        ]);
        let mut cache = self.data.lock().unwrap();
        if let Some(hit) = cache.get(&key) {
            self.record("data", "reused", &key);
            return Ok(Arc::clone(hit));
        }
        let raw = load_interactions(&config.dataset_path, config.dataset_format)?;
        let filtered = kcore_filter(&raw, config.kcore)?;
        let bundle = split(&filtered, config.split_proportions, config.split_seed)?;
        let groups = segment_groups(
            &bundle.train,
            config.user_top_fraction,
            config.item_top_fraction,
        )?;
        let prepared = Arc::new(PreparedData {
            key: key.clone(),
            dataset_sha256: digest,
            filtered,
            split: bundle,
            groups,
        });
        cache.insert(key.clone(), Arc::clone(&prepared));
        self.record("data", "computed", &key);
        Ok(prepared)
    }

    fn prepare_candidates(
        &self,
        config: &ExperimentConfig,
        data: &PreparedData,
    ) -> Result<Arc<Candidates>, RunError> {
        let source = match config.baseline {
            BaselineKind::External => {
                let path = config.baseline_path.as_ref().expect("validated config");
                let bytes = fs::read(path).map_err(|source| {
                    RunError::Baseline(crate::baselines::BaselineError::Io {
                        path: path.clone(),
                        source,
                    })
                })?;
                sha256_hex(&bytes)
            }
            BaselineKind::Mf => json(&config.mf),
            BaselineKind::Mostpop | BaselineKind::Random => String::new(),
        };
        let key = record_key(&[
            "candidates",
            &data.key,
            config.baseline.name(),
            &source,
            &config.baseline_seed.to_string(),
            &config.n.to_string(),
            &config.exclude_seen.to_string(),
        ]);
        let mut cache = self.candidates.lock().unwrap();
        if let Some(hit) = cache.get(&key) {
            self.record("baseline", "reused", &key);
            return Ok(Arc::clone(hit));
        }
        let train = &data.split.train;
        // validation items stay eligible so validation-dcg has something to measure
        let seen = if config.exclude_seen {
            SeenItems::from_logs(&[train])
        } else {
            SeenItems::none()
        };
        let mut warnings = Vec::new();
        let lists = match config.baseline {
            BaselineKind::Mostpop => recommend_mostpop(train, config.n, &seen)?,
            BaselineKind::Random => recommend_random(train, config.n, config.baseline_seed, &seen)?,
            BaselineKind::Mf => {
                let model = train_mf(train, &config.mf.to_config(config.baseline_seed))?;
                recommend_mf(&model, config.n, &seen)?
            }
            BaselineKind::External => {
                let path = config.baseline_path.as_ref().expect("validated config");
                let universe = IdUniverse::from_log(&data.filtered);
                let file = load_external_scores(path, config.n, Some(&universe))?;
                warnings = file.warnings;
                file.lists
            }
        };
        let entry = Arc::new(Candidates {
            key: key.clone(),
            lists,
            warnings,
        });
        cache.insert(key.clone(), Arc::clone(&entry));
        self.record("baseline", "computed", &key);
        Ok(entry)
    }

    fn benefits(
        config: &ExperimentConfig,
        data: &PreparedData,
        candidates: &Candidates,
    ) -> Result<BenefitTables, RunError> {
        let ground_truth = match config.mc_strategy {
            McStrategy::ScoreProxy => None,
            McStrategy::ValidationDcg => Some(&data.split.validation),
            McStrategy::TrainDcg => Some(&data.split.train),
        };
        Ok(BenefitTables::build(
            &candidates.lists,
            &data.groups,
            config.mc_strategy,
            McInputs {
                ground_truth,
                train_items_excluded: config.exclude_seen,
            },
        )?)
    }

    fn provenance(config: &ExperimentConfig, params: &FairnessParams, objective: Option<f64>) -> Provenance {
        Provenance {
            mode: Some(params.mode),
            lambda1: params.lambda1,
            lambda2: params.lambda2,
            k: params.k,
            n: params.n,
            mc_strategy: Some(params.mc_strategy),
            baseline: config.baseline.name().to_string(),
            dataset: config.dataset_path.display().to_string(),
            split_seed: config.split_seed,
            baseline_seed: config.baseline_seed,
            kcore: config.kcore,
            objective_value: objective,
        }
    }

    fn report(
        config: &ExperimentConfig,
        data: &PreparedData,
        fair_lists: &RankedLists,
        reference: Option<&FairnessReport>,
        provenance: Provenance,
    ) -> FairnessReport {
        assemble_report(ReportInputs {
            fair_lists,
            train: &data.split.train,
            test: &data.split.test,
            groups: &data.groups,
            m: data.filtered.m(),
            w: config.w,
            absolute_mcpf: config.absolute_mcpf,
            reference,
            provenance,
        })
    }

    /// The unadjusted top-K report that Δ% is measured against.
    fn reference_report(
        config: &ExperimentConfig,
        data: &PreparedData,
        candidates: &Candidates,
    ) -> Result<FairnessReport, RunError> {
        let params = config.with_mode(Mode::N).fairness_params()?;
        let lists = candidates.lists.truncate(config.k);
        let mut report = Self::report(config, data, &lists, None, Self::provenance(config, &params, None));
        let (_, delta) = derived_columns(&report, Some(&report));
        report.delta_percent = delta;
        Ok(report)
    }

    fn evaluate(
        config: &ExperimentConfig,
        data: &PreparedData,
        candidates: &Candidates,
        benefits: &BenefitTables,
        reference: &FairnessReport,
    ) -> Result<RunOutput, RunError> {
        let params = config.fairness_params()?;
        let selection = par_greedy_rerank(&candidates.lists, &data.groups, benefits, &params)?;
        let applied = params.effective_lambdas(&data.groups);
        let fair_lists = selection.fair_lists(&candidates.lists);
        let provenance = Self::provenance(config, &params, Some(selection.objective_value()));
        let report = Self::report(config, data, &fair_lists, Some(reference), provenance);
        let sidecar = RerankSidecar::new(params, selection.objective(), applied);
        let manifest = RunManifest {
            config: config.clone(),
            dataset_sha256: data.dataset_sha256.clone(),
            data_key: data.key.clone(),
            candidates_key: candidates.key.clone(),
            split: data.split.manifest(config.kcore),
            baseline_warnings: candidates.warnings.clone(),
        };
        Ok(RunOutput {
            report,
            fair_lists,
            sidecar,
            manifest,
        })
    }

    /// Full pipeline for one config. Writes outputs when `outputDir` is set.
    pub fn run_experiment(&self, config: &ExperimentConfig) -> Result<RunOutput, RunError> {
        config.validate()?;
        let data = self.prepare_data(config)?;
        let candidates = self.prepare_candidates(config, &data)?;
        let benefits = Self::benefits(config, &data, &candidates)?;
        let reference = Self::reference_report(config, &data, &candidates)?;
        let out = Self::evaluate(config, &data, &candidates, &benefits, &reference)?;
        if let Some(dir) = &config.output_dir {
            write_outputs(dir, &out)?;
        }
        Ok(out)
    }

    /// Evaluates `points` as CP configs derived from `config`, in parallel,
    /// over one shared split, candidate set and benefit table.
    fn run_points(
        &self,
        config: &ExperimentConfig,
        points: &[(f64, f64)],
        mode: Mode,
    ) -> Result<Vec<RunOutput>, RunError> {
        let base = config.with_mode(mode);
        base.validate()?;
        let data = self.prepare_data(&base)?;
        let candidates = self.prepare_candidates(&base, &data)?;
        let benefits = Self::benefits(&base, &data, &candidates)?;
        let reference = Self::reference_report(&base, &data, &candidates)?;
        points
            .par_iter()
            .map(|&(l1, l2)| {
                let point = base.with_lambdas(l1, l2);
                point.validate()?;
                Self::evaluate(&point, &data, &candidates, &benefits, &reference)
            })
            .collect()
    }

    /// One CP experiment per grid point. With `outputDir` set, each point's
    /// files go to `points/<label>/` and the long-form table to `sweep.csv`.
    pub fn run_sweep(&self, config: &ExperimentConfig, sweep: &SweepSpec) -> Result<SweepOutput, RunError> {
        sweep.validate()?;
        let points = sweep.points();
        let outputs = self.run_points(config, &points, Mode::CP)?;
        let csv = sweep_csv(&outputs);
        if let Some(dir) = &config.output_dir {
            outputs
                .par_iter()
                .map(|out| {
                    let p = &out.report.provenance;
                    write_outputs(&dir.join("points").join(point_label(p.lambda1, p.lambda2)), out)
                })
                .collect::<Result<Vec<()>, RunError>>()?;
            write_atomic(&dir.join("sweep.csv"), csv.as_bytes())?;
        }
        Ok(SweepOutput {
            points: points.into_iter().zip(outputs.into_iter().map(|o| o.report)).collect(),
            csv,
        })
    }

    /// Picks the weights maximising `nDCG_all - mCPF` over `grid`, searching
    /// only the axes the config's mode uses. Ties go to the smaller weights.
    pub fn select_lambdas(
        &self,
        config: &ExperimentConfig,
        grid: &[f64],
    ) -> Result<LambdaSelection, RunError> {
        let points: Vec<(f64, f64)> = match config.mode {
            Mode::N => vec![(0.0, 0.0)],
            Mode::C => grid.iter().map(|&v| (v, 0.0)).collect(),
            Mode::P => grid.iter().map(|&v| (0.0, v)).collect(),
            Mode::CP => grid
                .iter()
                .flat_map(|&a| grid.iter().map(move |&b| (a, b)))
                .collect(),
        };
        let outputs = self.run_points(config, &points, config.mode)?;
        let scored: Vec<((f64, f64), FairnessReport)> = points
            .into_iter()
            .zip(outputs.into_iter().map(|o| o.report))
            .collect();
        let score = |r: &FairnessReport| r.ndcg_all - r.mcpf;
        let mut best = 0;
        for (i, ((l1, l2), r)) in scored.iter().enumerate() {
            let ((b1, b2), br) = &scored[best];
            let (s, bs) = (score(r), score(br));
            let smaller = (l1 + l2, *l1) < (b1 + b2, *b1);
            if s > bs + 1e-12 || ((s - bs).abs() <= 1e-12 && smaller) {
                best = i;
            }
        }
        let ((lambda1, lambda2), report) = scored[best].clone();
        Ok(LambdaSelection {
            lambda1,
            lambda2,
            score: score(&report),
            report,
            candidates: scored,
        })
    }
}

fn point_label(l1: f64, l2: f64) -> String {
    format!("lambda1={l1}_lambda2={l2}")
}

fn sweep_csv(outputs: &[RunOutput]) -> String {
    let mut s = String::from("lambda1,lambda2,metric,value\n");
    for out in outputs {
        let r = &out.report;
        let p = &r.provenance;
        let metrics = [
            ("ndcgAll", Some(r.ndcg_all)),
            ("ndcgActive", r.ndcg_active),
            ("ndcgInactive", r.ndcg_inactive),
            ("dcf", Some(r.dcf_reported)),
            ("exposureShort", Some(r.exposure_short)),
            ("exposureLong", Some(r.exposure_long)),
            ("dpf", Some(r.dpf)),
            ("novelty", Some(r.novelty)),
            ("coverage", Some(r.coverage)),
            ("mcpf", Some(r.mcpf)),
            ("mcpfOverAll", r.mcpf_over_all),
        ];
        for (name, value) in metrics {
            if let Some(v) = value {
                let _ = writeln!(s, "{},{},{name},{v}", p.lambda1, p.lambda2);
            }
        }
    }
    s
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

/// Report JSON, a one-row results CSV, the fair lists, the re-ranking
/// sidecar and the provenance manifest.
fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), RunError> {
    write_atomic(&dir.join("report.json"), pretty(&out.report).as_bytes())?;
    let csv = format!("{}\n{}\n", FairnessReport::csv_header(), out.report.csv_row());
    write_atomic(&dir.join("report.csv"), csv.as_bytes())?;
    write_atomic(&dir.join("fair_lists.jsonl"), write_score_jsonl(&out.fair_lists).as_bytes())?;
    write_atomic(&dir.join("rerank.json"), pretty(&out.sidecar).as_bytes())?;
    write_atomic(&dir.join("manifest.json"), pretty(&out.manifest).as_bytes())?;
    Ok(())
}
