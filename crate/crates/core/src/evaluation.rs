//! Metrics and the diagnostic tables that drive taxonomy repair.
//!
//! Predictions are closed upward and binarized at the threshold before any
//! counting, so ancestors fired only through closure count as predicted.
//! Gold vectors are binary; a node is gold-positive when its value is
//! at least 0.5.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::encoding::{close_upward, LabelVector};
use crate::error::{Error, Result};
use crate::taxonomy::{NodePath, Taxonomy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub path: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub f1: f64,
    /// Gold-positive records.
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClasswiseReport {
    pub n_records: usize,
    /// One entry per taxonomy node, in index order.
    pub nodes: Vec<NodeStats>,
    /// Support-weighted mean F1 over nodes with support > 0.
    pub weighted_f1: f64,
    pub total_support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MislabelDistribution {
    pub gold_node: String,
    pub support: usize,
    /// `(other node, share of gold records predicted positive on it)`, in
    /// index order. Shares are independent and need not sum to one.
    pub fractions: Vec<(String, f64)>,
}

impl MislabelDistribution {
    pub fn fraction(&self, path: &str) -> Option<f64> {
        self.fractions.iter().find(|(p, _)| p == path).map(|&(_, f)| f)
    }

    /// Non-zero shares on nodes that are neither ancestors nor descendants
    /// of the gold node, largest first: where its records actually go.
    pub fn confusions(&self) -> Vec<(String, f64)> {
        let on_path = |p: &str| {
            let gold = self.gold_node.as_str();
            gold.strip_prefix(p).is_some_and(|rest| rest.starts_with('/'))
                || p.strip_prefix(gold).is_some_and(|rest| rest.starts_with('/'))
        };
        self.ranked().into_iter().filter(|(p, _)| !on_path(p)).collect()
    }

    /// Non-zero shares, largest first.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = self.fractions.iter().filter(|(_, f)| *f > 0.0).cloned().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryScores {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub weighted_f1: f64,
    pub subset_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binary_f1: Option<f64>,
}

/// `2tp / (2tp + fp + fn)`, or 0 when nothing was positive on either side.
pub fn f1_score(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_pair(t: &Taxonomy, gold: &[LabelVector], pred: &[LabelVector]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch { expected: gold.len(), found: pred.len() });
    }
    for v in gold.iter().chain(pred) {
        if v.len() != t.len() {
            return Err(Error::LengthMismatch { expected: t.len(), found: v.len() });
        }
    }
    Ok(())
}

/// Closes and thresholds every prediction into 0/1 flags.
fn binarize_all(t: &Taxonomy, pred: &[LabelVector], threshold: f64) -> Result<Vec<Vec<bool>>> {
    pred.iter()
        .map(|p| Ok(close_upward(t, p)?.scores().iter().map(|&s| s >= threshold).collect()))
        .collect()
}

fn gold_flags(gold: &[LabelVector]) -> Vec<Vec<bool>> {
    gold.iter().map(|g| g.scores().iter().map(|&s| s >= 0.5).collect()).collect()
}

pub fn classwise(t: &Taxonomy, gold: &[LabelVector], pred: &[LabelVector], threshold: f64) -> Result<ClasswiseReport> {
    check_pair(t, gold, pred)?;
    let g = gold_flags(gold);
    let p = binarize_all(t, pred, threshold)?;
    let mut counts = vec![[0usize; 4]; t.len()]; // tp fp fn tn
    for (gr, pr) in g.iter().zip(&p) {
        for j in 0..t.len() {
            let slot = match (gr[j], pr[j]) {
                (true, true) => 0,
                (false, true) => 1,
                (true, false) => 2,
                (false, false) => 3,
            };
            counts[j][slot] += 1;
        }
    }
    let nodes: Vec<NodeStats> = counts
        .iter()
        .enumerate()
        .map(|(j, &[tp, fp, fn_, tn])| NodeStats {
            path: t.path(j).to_string(),
            tp,
            fp,
            fn_,
            tn,
            f1: f1_score(tp, fp, fn_),
            support: tp + fn_,
        })
        .collect();
    let total_support: usize = nodes.iter().map(|n| n.support).sum();
    let weighted = nodes.iter().map(|n| n.support as f64 * n.f1).sum::<f64>();
    Ok(ClasswiseReport {
        n_records: gold.len(),
        weighted_f1: if total_support == 0 { 0.0 } else { weighted / total_support as f64 },
        total_support,
        nodes,
    })
}

/// Share of records whose whole binarized vector equals gold.
pub fn subset_accuracy(t: &Taxonomy, gold: &[LabelVector], pred: &[LabelVector], threshold: f64) -> Result<f64> {
    check_pair(t, gold, pred)?;
    let g = gold_flags(gold);
    let p = binarize_all(t, pred, threshold)?;
    let exact = g.iter().zip(&p).filter(|(a, b)| a == b).count();
    Ok(ratio(exact, gold.len()))
}

/// Hate-vs-no-hate scores, reading the `/Hate` node of each prediction.
pub fn binary_hate_eval(t: &Taxonomy, gold_hate: &[bool], pred: &[LabelVector], threshold: f64) -> Result<BinaryScores> {
    if gold_hate.len() != pred.len() {
        return Err(Error::LengthMismatch { expected: gold_hate.len(), found: pred.len() });
    }
    let hate = t.index_of(&NodePath::root("Hate"))?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&g, p) in gold_hate.iter().zip(pred) {
        if p.len() != t.len() {
            return Err(Error::LengthMismatch { expected: t.len(), found: p.len() });
        }
        match (g, close_upward(t, p)?.get(hate) >= threshold) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(BinaryScores {
        tp,
        fp,
        fn_,
        tn,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: f1_score(tp, fp, fn_),
    })
}

/// Among records gold-positive on `gold_node`, the share predicted positive
/// on every other node.
pub fn mislabel_distribution(
    t: &Taxonomy,
    gold: &[LabelVector],
    pred: &[LabelVector],
    threshold: f64,
    gold_node: &NodePath,
) -> Result<MislabelDistribution> {
    check_pair(t, gold, pred)?;
    let target = t.index_of(gold_node)?;
    let g = gold_flags(gold);
    let p = binarize_all(t, pred, threshold)?;
    let mut hits = vec![0usize; t.len()];
    let mut support = 0;
    for (gr, pr) in g.iter().zip(&p) {
        if !gr[target] {
            continue;
        }
        support += 1;
        for (h, &on) in hits.iter_mut().zip(pr) {
            *h += on as usize;
        }
    }
    if support == 0 {
        return Err(Error::EmptySupport(gold_node.to_string()));
    }
    let fractions = (0..t.len())
        .filter(|&j| j != target)
        .map(|j| (t.path(j).to_string(), hits[j] as f64 / support as f64))
        .collect();
    Ok(MislabelDistribution { gold_node: gold_node.to_string(), support, fractions })
}

/// Nodes with support whose F1 falls more than `margin` below the weighted
/// average, worst first.
pub fn outlier_classes(report: &ClasswiseReport, margin: f64) -> Vec<NodePath> {
    let cutoff = report.weighted_f1 - margin;
    let mut flagged: Vec<&NodeStats> = report.nodes.iter().filter(|n| n.support > 0 && n.f1 < cutoff).collect();
    flagged.sort_by(|a, b| a.f1.total_cmp(&b.f1));
    flagged
        .into_iter()
        .map(|n| n.path.parse().expect("report paths come from a taxonomy"))
        .collect()
}

pub fn summarize(t: &Taxonomy, gold: &[LabelVector], pred: &[LabelVector], threshold: f64) -> Result<EvalSummary> {
    Ok(EvalSummary {
        weighted_f1: classwise(t, gold, pred, threshold)?.weighted_f1,
        subset_accuracy: subset_accuracy(t, gold, pred, threshold)?,
        binary_f1: None,
    })
}

impl ClasswiseReport {
    pub fn node(&self, path: &str) -> Option<&NodeStats> {
        self.nodes.iter().find(|n| n.path == path)
    }

    /// Tab-separated table: `node f1 support tp fp fn tn`, weighted average
    /// as the last row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("node\tf1\tsupport\ttp\tfp\tfn\ttn\n");
        for n in &self.nodes {
            writeln!(out, "{}\t{:.4}\t{}\t{}\t{}\t{}\t{}", n.path, n.f1, n.support, n.tp, n.fp, n.fn_, n.tn)
                .expect("write to String");
        }
        writeln!(out, "weighted_avg\t{:.4}\t{}\t\t\t\t", self.weighted_f1, self.total_support).expect("write to String");
        out
    }
}
