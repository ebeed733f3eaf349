//! Records, JSON-Lines persistence, and the data-preparation steps: cleaning,
//! non-hate injection, holdout splitting and annotation fusion.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoding::{encode, LabelVector};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::taxonomy::{Fingerprint, NodePath, Taxonomy};

/// Path of the level-0 non-hate node.
pub const NO_HATE: &str = "/No-hate";
/// Path of the level-0 hate node.
pub const HATE: &str = "/Hate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    /// Raw text; never preprocessed.
    pub text: String,
    /// Taxonomy paths, or source-schema strings before mapping.
    #[serde(default)]
    pub labels: Vec<String>,
    /// Per-node training targets in `[0, 1]`, keyed by path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soft: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub source: String,
}

impl Record {
    pub fn new(id: impl Into<String>, text: impl Into<String>, labels: Vec<String>, source: impl Into<String>) -> Self {
        Record { id: id.into(), text: text.into(), labels, soft: None, source: source.into() }
    }

    pub fn label_paths(&self) -> Result<Vec<NodePath>> {
        self.labels.iter().map(|l| l.parse()).collect()
    }

    /// Binary, ancestor-closed encoding of the human labels.
    pub fn human_vector(&self, t: &Taxonomy) -> Result<LabelVector> {
        encode(t, &self.label_paths()?)
    }

    /// What training should fit: the soft targets where present (never below
    /// the human labels), otherwise the human labels.
    pub fn target_vector(&self, t: &Taxonomy) -> Result<LabelVector> {
        let human = self.human_vector(t)?;
        let Some(soft) = &self.soft else { return Ok(human) };
        let mut v = human.into_scores();
        for (key, &score) in soft {
            let i = t.index_of_str(key)?;
            v[i] = v[i].max(score);
        }
        LabelVector::from_scores(v)
    }
}

/// One line of an external binary evaluation set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtsRecord {
    pub id: String,
    pub text: String,
    pub hate: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<Record>,
    /// Set once the labels have been checked against a taxonomy.
    pub taxonomy_fingerprint: Option<Fingerprint>,
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Self {
        Dataset { records, taxonomy_fingerprint: None }
    }

    pub(crate) fn bound(records: Vec<Record>, t: &Taxonomy) -> Self {
        Dataset { records, taxonomy_fingerprint: Some(t.fingerprint()) }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks every label and soft key against `t` and stamps the dataset.
    pub fn bind(mut self, t: &Taxonomy) -> Result<Self> {
        for rec in &self.records {
            for l in &rec.labels {
                t.index_of_str(l)?;
            }
            if let Some(soft) = &rec.soft {
                for k in soft.keys() {
                    t.index_of_str(k)?;
                }
            }
        }
        self.taxonomy_fingerprint = Some(t.fingerprint());
        Ok(self)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    /// Encoded human labels, one vector per record.
    pub fn gold_vectors(&self, t: &Taxonomy) -> Result<Vec<LabelVector>> {
        self.records.iter().map(|r| r.human_vector(t)).collect()
    }

    pub fn target_vectors(&self, t: &Taxonomy) -> Result<Vec<LabelVector>> {
        self.records.iter().map(|r| r.target_vector(t)).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("records always serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses JSON-Lines text; `origin` only labels error messages.
    pub fn from_jsonl(text: &str, origin: &Path) -> Result<Self> {
        let mut records = Vec::new();
        let mut ids = HashSet::new();
        for (i, line) in text.split('\n').enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { path: origin.to_path_buf(), line: line_no, msg };
            let rec: Record = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            if !ids.insert(rec.id.clone()) {
                return Err(bad(format!("duplicate id {:?}", rec.id)));
            }
            if let Some(soft) = &rec.soft {
                if let Some((k, v)) = soft.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                    return Err(bad(format!("soft score {v} for {k} outside [0, 1]")));
                }
            }
            records.push(rec);
        }
        Ok(Dataset::new(records))
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a JSON-Lines dataset, binding it to `taxonomy` when given.
pub fn load_jsonl(path: &Path, taxonomy: Option<&Taxonomy>) -> Result<Dataset> {
    let d = Dataset::from_jsonl(&read_text(path)?, path)?;
    match taxonomy {
        Some(t) => d.bind(t),
        None => Ok(d),
    }
}

pub fn save_jsonl(d: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, d.to_jsonl()).map_err(|e| Error::io(path, e))
}

pub fn load_ets(path: &Path) -> Result<Vec<EtsRecord>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn save_ets(records: &[EtsRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("ETS records always serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Drops blank texts, exact duplicates (after trimming; first kept) and
/// records without any label.
///
/// Non-hate records always carry `/No-hate`, so an empty label set only
/// occurs on hate-dataset records whose annotations did not survive mapping.
pub fn clean(d: &Dataset) -> Dataset {
    let mut seen = HashSet::new();
    let records = d
        .records
        .iter()
        .filter(|r| {
            let text = r.text.trim();
            !text.is_empty() && !r.labels.is_empty() && seen.insert(text.to_string())
        })
        .cloned()
        .collect();
    Dataset { records, taxonomy_fingerprint: d.taxonomy_fingerprint }
}

/// Number of pool records to add so that they make up `fraction` of the result.
pub fn injection_count(n: usize, fraction: f64) -> usize {
    (fraction / (1.0 - fraction) * n as f64).round() as usize
}

fn check_fraction(fraction: f64, what: &str) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("{what} fraction {fraction} must lie in (0, 1)")));
    }
    Ok(())
}

/// Adds non-hate records from `pool` until they form `fraction` of the
/// result, then shuffles.
pub fn inject_nonhate(d: &Dataset, pool: &Dataset, fraction: f64, rng: &mut Rng) -> Result<Dataset> {
    check_fraction(fraction, "injection")?;
    let n_add = injection_count(d.len(), fraction);
    if n_add > pool.len() {
        return Err(Error::PoolTooSmall { needed: n_add, available: pool.len() });
    }
    if let Some(r) = pool.records.iter().find(|r| r.labels.iter().any(|l| l != NO_HATE)) {
        return Err(Error::Config(format!("pool record {} carries labels other than {NO_HATE}", r.id)));
    }
    let ids: HashSet<&str> = d.records.iter().map(|r| r.id.as_str()).collect();
    let mut records = d.records.clone();
    for i in rng.sample_indices(pool.len(), n_add) {
        let mut r = pool.records[i].clone();
        if ids.contains(r.id.as_str()) {
            return Err(Error::Config(format!("pool id {} already used by the dataset", r.id)));
        }
        if r.labels.is_empty() {
            r.labels.push(NO_HATE.to_string());
        }
        records.push(r);
    }
    rng.shuffle(&mut records);
    Ok(Dataset { records, taxonomy_fingerprint: d.taxonomy_fingerprint })
}

/// Number of holdout records for `n` records: `⌈fraction·n⌉`.
pub fn holdout_count(n: usize, fraction: f64) -> usize {
    // Guard against 0.1 * 30 = 3.0000000000000004.
    ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Shuffles and reserves the last `⌈fraction·n⌉` records as holdout.
pub fn split_holdout(d: &Dataset, fraction: f64, rng: &mut Rng) -> Result<(Dataset, Dataset)> {
    check_fraction(fraction, "holdout")?;
    let mut records = d.records.clone();
    rng.shuffle(&mut records);
    let cut = records.len() - holdout_count(records.len(), fraction).min(records.len());
    let holdout = records.split_off(cut);
    let fp = d.taxonomy_fingerprint;
    Ok((
        Dataset { records, taxonomy_fingerprint: fp },
        Dataset { records: holdout, taxonomy_fingerprint: fp },
    ))
}

/// Merges human labels with model predictions: per node, the soft target is
/// `max(human indicator, prediction)`. Human positives therefore always win
/// and model scores fill every node the human annotation left at zero.
pub fn fuse_annotations(t: &Taxonomy, d: &Dataset, predictions: &[LabelVector]) -> Result<Dataset> {
    if predictions.len() != d.len() {
        return Err(Error::LengthMismatch { expected: d.len(), found: predictions.len() });
    }
    let paths: Vec<String> = t.paths().iter().map(NodePath::to_string).collect();
    let mut records = Vec::with_capacity(d.len());
    for (rec, pred) in d.records.iter().zip(predictions) {
        let fused = rec.human_vector(t)?.max_with(pred)?;
        let mut out = rec.clone();
        out.soft = Some(paths.iter().cloned().zip(fused.into_scores()).collect());
        records.push(out);
    }
    Ok(Dataset { records, taxonomy_fingerprint: Some(t.fingerprint()) })
}
