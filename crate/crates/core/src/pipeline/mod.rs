//! The train → diagnose → adjust → fuse → fine-tune loop.
//!
//! - [`run_cycle1`] maps the first dataset, cleans it, adds non-hate
//!   records, holds out a share and trains from scratch.
//! - [`diagnose_cross`] scores the mapped second dataset with a cycle's
//!   model and reports outlier classes, where their records get mislabelled,
//!   and classes the second schema never annotates.
//! - [`run_cycle1a`] applies taxonomy edits, re-maps and retrains from
//!   scratch with the same random streams as cycle 1.
//! - [`run_cycle2`] fuses the second dataset's human labels with the
//!   cycle-1-A predictions and fine-tunes the cycle-1-A model on them.
//! - [`compare`] lines the cycles up side by side.
//!
//! Every artifact carries a [`Stamp`]: the SHA-256 of the configuration and
//! the fingerprint of the taxonomy it was produced under.

pub mod synthetic;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{self, load_model, save_model, ClassifierModel, TrainConfig};
use crate::dataset::{
    clean, fuse_annotations, inject_nonhate, load_ets, load_jsonl, save_jsonl, split_holdout, Dataset, EtsRecord,
};
use crate::encoding::LabelVector;
use crate::error::{Error, Result};
use crate::evaluation::{
    binary_hate_eval, classwise, mislabel_distribution, outlier_classes, subset_accuracy, BinaryScores,
    ClasswiseReport, EvalSummary, MislabelDistribution,
};
use crate::mapping::{LabelMapping, MappingReport};
use crate::rng::Rng;
use crate::taxonomy::{parse_directives, EditDirective, Taxonomy};

pub use synthetic::{generate_synthetic, Manifest, SyntheticCorpus, SyntheticSpec};

fn default_inject() -> f64 {
    0.3
}
fn default_holdout() -> f64 {
    0.1
}
fn default_margin() -> f64 {
    0.3
}
fn default_threshold() -> f64 {
    0.5
}

/// Inputs and settings of a full run. Relative paths are resolved against
/// the directory of the file the config was loaded from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    pub taxonomy_path: PathBuf,
    pub dataset1_path: PathBuf,
    pub dataset2_path: PathBuf,
    pub nonhate_pool_path: PathBuf,
    /// External binary evaluation set.
    pub ets_path: PathBuf,
    pub mapping1_path: PathBuf,
    pub mapping2_path: PathBuf,
    #[serde(default)]
    pub directives_path: Option<PathBuf>,
    #[serde(default)]
    pub train1: TrainConfig,
    #[serde(default = "TrainConfig::fine_tune")]
    pub train2: TrainConfig,
    #[serde(default = "default_inject")]
    pub inject_fraction: f64,
    #[serde(default = "default_holdout")]
    pub holdout_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_margin")]
    pub outlier_margin: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl CycleConfig {
    /// A config with default settings for the given input files.
    pub fn with_paths(
        taxonomy: impl Into<PathBuf>,
        dataset1: impl Into<PathBuf>,
        dataset2: impl Into<PathBuf>,
        pool: impl Into<PathBuf>,
        ets: impl Into<PathBuf>,
        mapping1: impl Into<PathBuf>,
        mapping2: impl Into<PathBuf>,
    ) -> Self {
        CycleConfig {
            taxonomy_path: taxonomy.into(),
            dataset1_path: dataset1.into(),
            dataset2_path: dataset2.into(),
            nonhate_pool_path: pool.into(),
            ets_path: ets.into(),
            mapping1_path: mapping1.into(),
            mapping2_path: mapping2.into(),
            directives_path: None,
            train1: TrainConfig::default(),
            train2: TrainConfig::fine_tune(),
            inject_fraction: default_inject(),
            holdout_fraction: default_holdout(),
            seed: 0,
            outlier_margin: default_margin(),
            threshold: default_threshold(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CycleConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = CycleConfig::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, what: &str| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} {v} must lie in (0, 1)")))
            }
        };
        unit(self.inject_fraction, "inject_fraction")?;
        unit(self.holdout_fraction, "holdout_fraction")?;
        unit(self.outlier_margin, "outlier_margin")?;
        unit(self.threshold, "threshold")?;
        self.train1.validate()?;
        self.train2.validate()
    }

    /// `p` resolved against the config's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// Hex SHA-256 of the config's JSON form. File locations enter as written.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configs always serialize");
        hex(&Sha256::digest(bytes))
    }

    pub fn load_directives(&self) -> Result<Vec<EditDirective>> {
        match &self.directives_path {
            None => Ok(Vec::new()),
            Some(p) => {
                let p = self.resolve(p);
                parse_directives(&fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?)
            }
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance carried by every artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub config_hash: String,
    pub taxonomy_fingerprint: String,
}

impl Stamp {
    fn new(cfg: &CycleConfig, t: &Taxonomy) -> Self {
        Stamp { config_hash: cfg.hash(), taxonomy_fingerprint: t.fingerprint().to_hex() }
    }

    /// One-line comment header for text reports.
    pub fn header(&self, cycle: &str) -> String {
        format!("# cycle={cycle} config={} taxonomy={}\n", self.config_hash, self.taxonomy_fingerprint)
    }
}

struct Inputs {
    taxonomy: Taxonomy,
    dataset1: Dataset,
    dataset2: Dataset,
    pool: Dataset,
    ets: Vec<EtsRecord>,
    mapping1: LabelMapping,
    mapping2: LabelMapping,
}

fn read(cfg: &CycleConfig, p: &Path) -> Result<String> {
    let p = cfg.resolve(p);
    fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
}

fn load_inputs(cfg: &CycleConfig) -> Result<Inputs> {
    cfg.validate()?;
    Ok(Inputs {
        taxonomy: Taxonomy::parse(&read(cfg, &cfg.taxonomy_path)?)?,
        dataset1: load_jsonl(&cfg.resolve(&cfg.dataset1_path), None)?,
        dataset2: load_jsonl(&cfg.resolve(&cfg.dataset2_path), None)?,
        pool: load_jsonl(&cfg.resolve(&cfg.nonhate_pool_path), None)?,
        ets: load_ets(&cfg.resolve(&cfg.ets_path))?,
        mapping1: LabelMapping::parse(&read(cfg, &cfg.mapping1_path)?)?,
        mapping2: LabelMapping::parse(&read(cfg, &cfg.mapping2_path)?)?,
    })
}

/// Training settings for one stage: `base` with its seed mixed into the run seed.
fn stage_train_config(base: &TrainConfig, seed: u64, stage: &str, threshold: f64) -> TrainConfig {
    TrainConfig {
        seed: Rng::derive(seed, &format!("{stage}/train/{}", base.seed)).next_u64(),
        threshold,
        ..base.clone()
    }
}

/// Maps, cleans, injects and splits. Returns `(train, holdout, report)`.
fn prepare(
    cfg: &CycleConfig,
    t: &Taxonomy,
    mapping: &LabelMapping,
    raw: &Dataset,
    pool: &Dataset,
    stage: &str,
) -> Result<(Dataset, Dataset, MappingReport)> {
    let (mapped, report) = mapping.apply(t, raw)?;
    let cleaned = clean(&mapped);
    if cleaned.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (train, holdout) = inject_and_split(cfg, t, &cleaned, pool, stage)?;
    Ok((train, holdout, report))
}

fn inject_and_split(
    cfg: &CycleConfig,
    t: &Taxonomy,
    d: &Dataset,
    pool: &Dataset,
    stage: &str,
) -> Result<(Dataset, Dataset)> {
    let pool = pool.clone().bind(t)?;
    let injected = inject_nonhate(d, &pool, cfg.inject_fraction, &mut Rng::derive(cfg.seed, &format!("{stage}/inject")))?;
    split_holdout(&injected, cfg.holdout_fraction, &mut Rng::derive(cfg.seed, &format!("{stage}/split")))
}

fn predict_texts<'a>(
    m: &ClassifierModel,
    t: &Taxonomy,
    texts: impl Iterator<Item = &'a str>,
) -> Result<Vec<LabelVector>> {
    texts.map(|s| m.predict(t, s)).collect()
}

/// Headline numbers of one cycle, as stored in `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub cycle: String,
    pub stamp: Stamp,
    /// Holdout weighted F1 and subset accuracy, ETS binary F1.
    pub summary: EvalSummary,
    pub ets: BinaryScores,
    pub mapping_report: MappingReport,
    pub n_train: usize,
    pub n_holdout: usize,
    /// Hex SHA-256 of the serialized model.
    pub model_sha256: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleArtifacts {
    pub cycle: String,
    pub stamp: Stamp,
    pub taxonomy: Taxonomy,
    /// Mappings as bound to `taxonomy`.
    pub mapping1: LabelMapping,
    pub mapping2: LabelMapping,
    pub model: ClassifierModel,
    pub n_train: usize,
    pub holdout: Dataset,
    pub holdout_report: ClasswiseReport,
    pub summary: EvalSummary,
    pub ets: BinaryScores,
    pub mapping_report: MappingReport,
    /// The first dataset's holdout, re-scored by this cycle's model.
    pub dataset1_holdout: Dataset,
    pub dataset1_report: ClasswiseReport,
    /// Cycle 2 only: the second dataset with fused soft targets.
    pub fused: Option<Dataset>,
}

fn evaluate(
    cfg: &CycleConfig,
    t: &Taxonomy,
    m: &ClassifierModel,
    holdout: &Dataset,
    ets: &[EtsRecord],
) -> Result<(ClasswiseReport, EvalSummary, BinaryScores)> {
    let gold = holdout.target_vectors(t)?;
    let pred = m.predict_dataset(t, holdout)?;
    let report = classwise(t, &gold, &pred, cfg.threshold)?;
    let acc = subset_accuracy(t, &gold, &pred, cfg.threshold)?;
    let ets_pred = predict_texts(m, t, ets.iter().map(|r| r.text.as_str()))?;
    let flags: Vec<bool> = ets.iter().map(|r| r.hate).collect();
    let bin = binary_hate_eval(t, &flags, &ets_pred, cfg.threshold)?;
    let summary = EvalSummary { weighted_f1: report.weighted_f1, subset_accuracy: acc, binary_f1: Some(bin.f1) };
    Ok((report, summary, bin))
}

fn train_first(
    cfg: &CycleConfig,
    inputs: &Inputs,
    t: Taxonomy,
    mapping1: LabelMapping,
    mapping2: LabelMapping,
    cycle: &str,
) -> Result<CycleArtifacts> {
    let (train, holdout, mapping_report) = prepare(cfg, &t, &mapping1, &inputs.dataset1, &inputs.pool, "cycle1")?;
    log::info!("{cycle}: {} training and {} holdout records", train.len(), holdout.len());
    let tc = stage_train_config(&cfg.train1, cfg.seed, "cycle1", cfg.threshold);
    let model = classifier::train(&t, &train, &tc, None)?;
    let (report, summary, ets) = evaluate(cfg, &t, &model, &holdout, &inputs.ets)?;
    Ok(CycleArtifacts {
        cycle: cycle.to_string(),
        stamp: Stamp::new(cfg, &t),
        taxonomy: t,
        mapping1,
        mapping2,
        model,
        n_train: train.len(),
        dataset1_holdout: holdout.clone(),
        dataset1_report: report.clone(),
        holdout,
        holdout_report: report,
        summary,
        ets,
        mapping_report,
        fused: None,
    })
}

/// Cycle 1: train from scratch on the mapped first dataset.
pub fn run_cycle1(cfg: &CycleConfig) -> Result<CycleArtifacts> {
    let inputs = load_inputs(cfg)?;
    let t = inputs.taxonomy.clone();
    inputs.mapping1.validate(&t)?;
    inputs.mapping2.validate(&t)?;
    let (m1, m2) = (inputs.mapping1.clone(), inputs.mapping2.clone());
    train_first(cfg, &inputs, t, m1, m2, "cycle1")
}

/// Cycle 1-A: edit the taxonomy, carry both mappings over and retrain from
/// scratch. With no directives the result equals [`run_cycle1`]'s apart
/// from the cycle name.
pub fn run_cycle1a(cfg: &CycleConfig, directives: &[EditDirective]) -> Result<CycleArtifacts> {
    let inputs = load_inputs(cfg)?;
    inputs.mapping1.validate(&inputs.taxonomy)?;
    inputs.mapping2.validate(&inputs.taxonomy)?;
    let (t, tr) = inputs.taxonomy.apply_directives_traced(directives)?;
    let m1 = inputs.mapping1.rebind(&tr);
    let m2 = inputs.mapping2.rebind(&tr);
    train_first(cfg, &inputs, t, m1, m2, "cycle1a")
}

/// Cycle 2: fuse, then fine-tune the cycle-1-A model.
pub fn run_cycle2(cfg: &CycleConfig, prev: &CycleArtifacts) -> Result<CycleArtifacts> {
    let inputs = load_inputs(cfg)?;
    let t = prev.taxonomy.clone();
    if prev.stamp.config_hash != cfg.hash() {
        return Err(Error::StampMismatch(prev.stamp.config_hash.clone(), cfg.hash()));
    }
    let (mapped, mapping_report) = prev.mapping2.apply(&t, &inputs.dataset2)?;
    let cleaned = clean(&mapped);
    if cleaned.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let preds = prev.model.predict_dataset(&t, &cleaned)?;
    let fused = fuse_annotations(&t, &cleaned, &preds)?;
    let (train, holdout) = inject_and_split(cfg, &t, &fused, &inputs.pool, "cycle2")?;
    log::info!("cycle2: {} training and {} holdout records", train.len(), holdout.len());
    let tc = stage_train_config(&cfg.train2, cfg.seed, "cycle2", cfg.threshold);
    let model = classifier::train(&t, &train, &tc, Some(&prev.model))?;
    let (report, summary, ets) = evaluate(cfg, &t, &model, &holdout, &inputs.ets)?;
    let d1_gold = prev.dataset1_holdout.target_vectors(&t)?;
    let d1_pred = model.predict_dataset(&t, &prev.dataset1_holdout)?;
    let dataset1_report = classwise(&t, &d1_gold, &d1_pred, cfg.threshold)?;
    Ok(CycleArtifacts {
        cycle: "cycle2".to_string(),
        stamp: Stamp::new(cfg, &t),
        mapping1: prev.mapping1.clone(),
        mapping2: prev.mapping2.clone(),
        taxonomy: t,
        model,
        n_train: train.len(),
        holdout,
        holdout_report: report,
        summary,
        ets,
        mapping_report,
        dataset1_holdout: prev.dataset1_holdout.clone(),
        dataset1_report,
        fused: Some(fused),
    })
}

/// A node the second dataset never marks but the model predicts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingLabel {
    pub path: String,
    /// Records predicted positive.
    pub predicted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub cycle: String,
    pub stamp: Stamp,
    pub mapping_report: MappingReport,
    pub n_records: usize,
    /// Absent when the mapped dataset is empty.
    pub report: Option<ClasswiseReport>,
    /// Worst first.
    pub outliers: Vec<String>,
    /// One per outlier, same order.
    pub mislabels: Vec<MislabelDistribution>,
    pub missing: Vec<MissingLabel>,
    /// Topmost missing nodes: those whose parent is not missing itself.
    pub missing_families: Vec<String>,
}

/// Scores the mapped second dataset with `artifacts.model` against its
/// human labels.
pub fn diagnose_cross(cfg: &CycleConfig, artifacts: &CycleArtifacts) -> Result<Diagnostics> {
    let p = cfg.resolve(&cfg.dataset2_path);
    diagnose_dataset(cfg, artifacts, &load_jsonl(&p, None)?)
}

/// [`diagnose_cross`] on an already loaded dataset in the second schema.
pub fn diagnose_dataset(cfg: &CycleConfig, artifacts: &CycleArtifacts, raw: &Dataset) -> Result<Diagnostics> {
    let t = &artifacts.taxonomy;
    let (mapped, mapping_report) = artifacts.mapping2.apply(t, raw)?;
    let d = clean(&mapped);
    let mut out = Diagnostics {
        cycle: artifacts.cycle.clone(),
        stamp: artifacts.stamp.clone(),
        mapping_report,
        n_records: d.len(),
        report: None,
        outliers: Vec::new(),
        mislabels: Vec::new(),
        missing: Vec::new(),
        missing_families: Vec::new(),
    };
    if d.is_empty() {
        return Ok(out);
    }
    let gold = d.gold_vectors(t)?;
    let pred = artifacts.model.predict_dataset(t, &d)?;
    let report = classwise(t, &gold, &pred, cfg.threshold)?;
    let outliers = outlier_classes(&report, cfg.outlier_margin);
    for o in &outliers {
        out.mislabels.push(mislabel_distribution(t, &gold, &pred, cfg.threshold, o)?);
    }
    out.outliers = outliers.iter().map(|p| p.to_string()).collect();
    let mut flagged = vec![false; t.len()];
    for (i, n) in report.nodes.iter().enumerate() {
        let predicted = n.tp + n.fp;
        if n.support == 0 && predicted > 0 {
            flagged[i] = true;
            out.missing.push(MissingLabel { path: n.path.clone(), predicted });
        }
    }
    out.missing_families = (0..t.len())
        .filter(|&i| flagged[i] && t.parent(i).is_none_or(|p| !flagged[p]))
        .map(|i| t.path(i).to_string())
        .collect();
    out.report = Some(report);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRow {
    pub cycle: String,
    pub taxonomy_fingerprint: String,
    pub ets_f1: f64,
    pub holdout_weighted_f1: f64,
    pub subset_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleDelta {
    pub from: String,
    pub to: String,
    pub ets_f1: f64,
    pub holdout_weighted_f1: f64,
    pub subset_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config_hash: String,
    /// In the order given.
    pub rows: Vec<CycleRow>,
    /// Between consecutive rows.
    pub deltas: Vec<CycleDelta>,
}

impl ComparisonReport {
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# config={}\ncycle\tets_f1\tweighted_f1\tsubset_accuracy\n", self.config_hash);
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{:.4}\t{:.4}\t{:.4}\n",
                r.cycle, r.ets_f1, r.holdout_weighted_f1, r.subset_accuracy
            ));
        }
        for d in &self.deltas {
            out.push_str(&format!(
                "{}->{}\t{:+.4}\t{:+.4}\t{:+.4}\n",
                d.from, d.to, d.ets_f1, d.holdout_weighted_f1, d.subset_accuracy
            ));
        }
        out
    }
}

/// Tabulates cycles in execution order. All must share one config hash.
pub fn compare(cycles: &[CycleSummary]) -> Result<ComparisonReport> {
    let first = cycles.first().ok_or_else(|| Error::Config("nothing to compare".into()))?;
    for c in cycles {
        if c.stamp.config_hash != first.stamp.config_hash {
            return Err(Error::StampMismatch(first.stamp.config_hash.clone(), c.stamp.config_hash.clone()));
        }
    }
    let rows: Vec<CycleRow> = cycles
        .iter()
        .map(|c| CycleRow {
            cycle: c.cycle.clone(),
            taxonomy_fingerprint: c.stamp.taxonomy_fingerprint.clone(),
            ets_f1: c.ets.f1,
            holdout_weighted_f1: c.summary.weighted_f1,
            subset_accuracy: c.summary.subset_accuracy,
        })
        .collect();
    let deltas = rows
        .windows(2)
        .map(|w| CycleDelta {
            from: w[0].cycle.clone(),
            to: w[1].cycle.clone(),
            ets_f1: w[1].ets_f1 - w[0].ets_f1,
            holdout_weighted_f1: w[1].holdout_weighted_f1 - w[0].holdout_weighted_f1,
            subset_accuracy: w[1].subset_accuracy - w[0].subset_accuracy,
        })
        .collect();
    Ok(ComparisonReport { config_hash: first.stamp.config_hash.clone(), rows, deltas })
}

/// Everything one end-to-end run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    pub cycle1: CycleArtifacts,
    pub diagnostics1: Diagnostics,
    pub cycle1a: CycleArtifacts,
    pub diagnostics1a: Diagnostics,
    pub cycle2: CycleArtifacts,
    pub comparison: ComparisonReport,
}

/// Cycle 1, its diagnosis, cycle 1-A with the configured directives, its
/// diagnosis, cycle 2 and the comparison.
pub fn run_all(cfg: &CycleConfig) -> Result<PipelineRun> {
    let cycle1 = run_cycle1(cfg)?;
    let diagnostics1 = diagnose_cross(cfg, &cycle1)?;
    let cycle1a = run_cycle1a(cfg, &cfg.load_directives()?)?;
    let diagnostics1a = diagnose_cross(cfg, &cycle1a)?;
    let cycle2 = run_cycle2(cfg, &cycle1a)?;
    let comparison = compare(&[cycle1.summary_record(), cycle1a.summary_record(), cycle2.summary_record()])?;
    Ok(PipelineRun { cycle1, diagnostics1, cycle1a, diagnostics1a, cycle2, comparison })
}

const SUMMARY_FILE: &str = "summary.json";

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_path(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports always serialize") + "\n"
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_path(path)?).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), msg: e.to_string() })
}

#[derive(Serialize, Deserialize)]
struct StoredReports {
    stamp: Stamp,
    holdout_report: ClasswiseReport,
    dataset1_report: ClasswiseReport,
}

impl CycleArtifacts {
    pub fn summary_record(&self) -> CycleSummary {
        CycleSummary {
            cycle: self.cycle.clone(),
            stamp: self.stamp.clone(),
            summary: self.summary,
            ets: self.ets,
            mapping_report: self.mapping_report.clone(),
            n_train: self.n_train,
            n_holdout: self.holdout.len(),
            model_sha256: hex(&Sha256::digest(self.model.to_bytes())),
        }
    }

    /// Writes the model, taxonomy, mappings, holdouts and reports into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_model(&self.model, &dir.join("model.bin"))?;
        write(&dir.join("taxonomy.tax"), self.taxonomy.serialize())?;
        write(&dir.join("mapping1.map"), self.mapping1.serialize())?;
        write(&dir.join("mapping2.map"), self.mapping2.serialize())?;
        save_jsonl(&self.holdout, &dir.join("holdout.jsonl"))?;
        save_jsonl(&self.dataset1_holdout, &dir.join("dataset1_holdout.jsonl"))?;
        if let Some(f) = &self.fused {
            save_jsonl(f, &dir.join("fused.jsonl"))?;
        }
        let header = self.stamp.header(&self.cycle);
        write(&dir.join("holdout_report.tsv"), header.clone() + &self.holdout_report.to_tsv())?;
        write(&dir.join("dataset1_report.tsv"), header + &self.dataset1_report.to_tsv())?;
        write(
            &dir.join("reports.json"),
            json(&StoredReports {
                stamp: self.stamp.clone(),
                holdout_report: self.holdout_report.clone(),
                dataset1_report: self.dataset1_report.clone(),
            }),
        )?;
        write(&dir.join(SUMMARY_FILE), json(&self.summary_record()))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let s: CycleSummary = parse_json(&dir.join(SUMMARY_FILE))?;
        let reports: StoredReports = parse_json(&dir.join("reports.json"))?;
        if reports.stamp != s.stamp {
            return Err(Error::StampMismatch(s.stamp.config_hash, reports.stamp.config_hash));
        }
        let taxonomy = Taxonomy::parse(&read_path(&dir.join("taxonomy.tax"))?)?;
        if taxonomy.fingerprint().to_hex() != s.stamp.taxonomy_fingerprint {
            return Err(Error::FingerprintMismatch);
        }
        let model = load_model(&dir.join("model.bin"))?;
        model.check_taxonomy(&taxonomy)?;
        let fused_path = dir.join("fused.jsonl");
        let fused = if fused_path.exists() { Some(load_jsonl(&fused_path, Some(&taxonomy))?) } else { None };
        Ok(CycleArtifacts {
            cycle: s.cycle,
            stamp: s.stamp,
            mapping1: LabelMapping::parse(&read_path(&dir.join("mapping1.map"))?)?,
            mapping2: LabelMapping::parse(&read_path(&dir.join("mapping2.map"))?)?,
            model,
            n_train: s.n_train,
            holdout: load_jsonl(&dir.join("holdout.jsonl"), Some(&taxonomy))?,
            holdout_report: reports.holdout_report,
            summary: s.summary,
            ets: s.ets,
            mapping_report: s.mapping_report,
            dataset1_holdout: load_jsonl(&dir.join("dataset1_holdout.jsonl"), Some(&taxonomy))?,
            dataset1_report: reports.dataset1_report,
            fused,
            taxonomy,
        })
    }
}

impl CycleSummary {
    /// Reads `summary.json` from an artifact directory.
    pub fn load(dir: &Path) -> Result<Self> {
        parse_json(&dir.join(SUMMARY_FILE))
    }
}

impl Diagnostics {
    /// Writes `diagnostics.json` and, when there is one, `classwise.tsv`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write(&dir.join("diagnostics.json"), json(self))?;
        if let Some(r) = &self.report {
            write(&dir.join("classwise.tsv"), self.stamp.header(&self.cycle) + &r.to_tsv())?;
        }
        Ok(())
    }
}
