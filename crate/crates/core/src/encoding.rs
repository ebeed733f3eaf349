//! Ancestor-closed label vectors.
//!
//! Position `i` of a [`LabelVector`] holds the score of the taxonomy node
//! with pre-order index `i`; both level-0 nodes are included. A binary vector
//! is *closed* when every positive node's parent is positive too, and
//! [`close_upward`] extends that property to real-valued scores: after
//! closure, `score[child] >= θ` implies `score[parent] >= θ` for every
//! threshold `θ`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::taxonomy::{NodePath, Taxonomy};

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<f64>);

impl LabelVector {
    pub fn zeros(len: usize) -> Self {
        LabelVector(vec![0.0; len])
    }

    /// Wraps raw scores, rejecting anything outside `[0, 1]` (NaN included).
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Internal(format!("score {bad} outside [0, 1]")));
        }
        Ok(LabelVector(scores))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn into_scores(self) -> Vec<f64> {
        self.0
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&s| s == 0.0 || s == 1.0)
    }

    /// Number of non-zero positions.
    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0.0).count()
    }

    /// Whether `score[child] >= θ ⇒ score[parent] >= θ` holds for every θ,
    /// i.e. no child outscores its parent.
    pub fn is_closed(&self, t: &Taxonomy) -> bool {
        self.0.len() == t.len()
            && (0..t.len()).all(|i| t.parent(i).is_none_or(|p| self.0[p] >= self.0[i]))
    }

    /// Indices whose score is at least `threshold`.
    pub fn positives(&self, threshold: f64) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s >= threshold)
            .map(|(i, _)| i)
    }

    /// 0/1 vector marking scores `>= threshold`.
    pub fn binarize(&self, threshold: f64) -> LabelVector {
        LabelVector(self.0.iter().map(|&s| if s >= threshold { 1.0 } else { 0.0 }).collect())
    }

    /// Element-wise maximum.
    pub fn max_with(&self, other: &LabelVector) -> Result<LabelVector> {
        check_len(self.len(), other.len())?;
        Ok(LabelVector(self.0.iter().zip(&other.0).map(|(a, b)| a.max(*b)).collect()))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Binary vector with ones on `labels` and all their ancestors.
pub fn encode<'a>(t: &Taxonomy, labels: impl IntoIterator<Item = &'a NodePath>) -> Result<LabelVector> {
    let mut v = vec![0.0; t.len()];
    for path in labels {
        let i = t.index_of(path)?;
        v[i] = 1.0;
        for a in t.ancestor_indices(i) {
            if v[a] == 1.0 {
                break;
            }
            v[a] = 1.0;
        }
    }
    Ok(LabelVector(v))
}

/// Max-propagates scores from children to parents.
pub fn close_upward(t: &Taxonomy, v: &LabelVector) -> Result<LabelVector> {
    check_len(t.len(), v.len())?;
    let mut s = v.0.clone();
    // Pre-order puts every child after its parent.
    for i in (0..s.len()).rev() {
        if let Some(p) = t.parent(i) {
            if s[i] > s[p] {
                s[p] = s[i];
            }
        }
    }
    Ok(LabelVector(s))
}

/// Paths whose closed score reaches `threshold`; always ancestor-closed.
pub fn decode(t: &Taxonomy, v: &LabelVector, threshold: f64) -> Result<BTreeSet<NodePath>> {
    let closed = close_upward(t, v)?;
    Ok(closed.positives(threshold).map(|i| t.path(i)).collect())
}

/// `labels` plus all their ancestors.
pub fn ancestor_closure<'a>(
    t: &Taxonomy,
    labels: impl IntoIterator<Item = &'a NodePath>,
) -> Result<BTreeSet<NodePath>> {
    let mut out = BTreeSet::new();
    for path in labels {
        out.extend(t.ancestors(path)?);
        out.insert(path.clone());
    }
    Ok(out)
}
