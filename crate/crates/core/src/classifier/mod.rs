//! Multi-label scorer: one logistic unit per taxonomy node over hashed
//! bag-of-words features.
//!
//! Training minimizes, per mini-batch `B`,
//!
//! ```text
//! L = 1/|B| Σ_{r∈B} Σ_j BCE(y_rj, σ(w_j·x_r + b_j)) + l2·‖W‖²
//! ```
//!
//! with plain SGD and a `lr/√k` step size at batch `k`. Targets may be soft
//! (fused annotations). Biases are not regularized. Predictions are closed
//! upward so a child never outscores its parent.

mod features;
mod io;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::encoding::{close_upward, LabelVector};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::taxonomy::{Fingerprint, Taxonomy};

pub use features::{feature_index, featurize, tokenize, FeatureVector, FEATURE_DIM};
pub use io::{load_model, load_model_with_dim, save_model, MODEL_MAGIC, MODEL_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    /// Telemetry cadence in batches.
    pub eval_every: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 4,
            batch_size: 6,
            learning_rate: 100.0,
            l2: 1e-7,
            eval_every: 500,
            seed: 0,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    /// Settings for warm-started fine-tuning: the default schedule with a
    /// hundredfold L2 penalty.
    pub fn fine_tune() -> Self {
        TrainConfig { l2: 1e-5, ..TrainConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return fail("l2 must be non-negative");
        }
        if 2.0 * self.learning_rate * self.l2 >= 1.0 {
            return fail("2·learning_rate·l2 must stay below 1");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return fail("threshold must lie in (0, 1)");
        }
        if self.eval_every < 1 {
            return fail("eval_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    /// Row-major `[node_count × feature_dim]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    feature_dim: usize,
    node_count: usize,
    fingerprint: Fingerprint,
}

/// Numerically safe logistic function, kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    const EPS: f64 = 1e-12;
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(EPS, 1.0 - EPS)
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Binary cross-entropy of target `y` against logit `z`.
fn bce_logit(y: f64, z: f64) -> f64 {
    softplus(z) - y * z
}

impl ClassifierModel {
    pub fn zeros(t: &Taxonomy) -> Self {
        ClassifierModel::zeros_with_dim(t.len(), FEATURE_DIM, t.fingerprint())
    }

    pub fn zeros_with_dim(node_count: usize, feature_dim: usize, fingerprint: Fingerprint) -> Self {
        ClassifierModel {
            weights: vec![0.0; node_count * feature_dim],
            bias: vec![0.0; node_count],
            feature_dim,
            node_count,
            fingerprint,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight(&self, node: usize, feature: usize) -> f64 {
        self.weights[node * self.feature_dim + feature]
    }

    pub fn set_weight(&mut self, node: usize, feature: usize, w: f64) {
        self.weights[node * self.feature_dim + feature] = w;
    }

    pub fn set_bias(&mut self, node: usize, b: f64) {
        self.bias[node] = b;
    }

    pub fn check_taxonomy(&self, t: &Taxonomy) -> Result<()> {
        if self.fingerprint != t.fingerprint() || self.node_count != t.len() {
            return Err(Error::FingerprintMismatch);
        }
        Ok(())
    }

    /// `w_j·x + b_j` for every node.
    pub fn logits(&self, x: &FeatureVector) -> Vec<f64> {
        logits_scaled(&self.weights, 1.0, &self.bias, self.feature_dim, x)
    }

    /// Sigmoid scores before closure.
    pub fn raw_scores(&self, x: &FeatureVector) -> Vec<f64> {
        self.logits(x).into_iter().map(sigmoid).collect()
    }

    pub fn predict_features(&self, t: &Taxonomy, x: &FeatureVector) -> Result<LabelVector> {
        self.check_taxonomy(t)?;
        close_upward(t, &LabelVector::from_scores(self.raw_scores(x))?)
    }

    /// Closed scores for `text`, each strictly inside (0, 1).
    pub fn predict(&self, t: &Taxonomy, text: &str) -> Result<LabelVector> {
        self.predict_features(t, &featurize(text))
    }

    pub fn predict_dataset(&self, t: &Taxonomy, d: &Dataset) -> Result<Vec<LabelVector>> {
        d.records.iter().map(|r| self.predict(t, &r.text)).collect()
    }

    /// Sum of squared weights.
    pub fn weight_norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

fn logits_scaled(weights: &[f64], scale: f64, bias: &[f64], dim: usize, x: &FeatureVector) -> Vec<f64> {
    bias.iter()
        .enumerate()
        .map(|(j, b)| {
            let row = &weights[j * dim..(j + 1) * dim];
            let dot: f64 = x.entries().iter().map(|&(f, v)| row[f as usize] * v).sum();
            scale * dot + b
        })
        .collect()
}

/// One training pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: FeatureVector,
    pub target: Vec<f64>,
}

impl Example {
    pub fn from_dataset(t: &Taxonomy, d: &Dataset) -> Result<Vec<Example>> {
        d.records
            .iter()
            .map(|r| {
                Ok(Example { features: featurize(&r.text), target: r.target_vector(t)?.into_scores() })
            })
            .collect()
    }
}

/// Data-term gradient of a batch: dense bias part, sparse weight part keyed
/// by flat weight index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradient {
    pub bias: Vec<f64>,
    pub weights: BTreeMap<usize, f64>,
}

/// Mean BCE over the batch (summed over nodes) and its gradient, for
/// weights `scale·weights`.
fn data_gradient(
    weights: &[f64],
    scale: f64,
    bias: &[f64],
    dim: usize,
    batch: &[&Example],
) -> (f64, Gradient) {
    let nodes = bias.len();
    let inv_b = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    let mut g = Gradient { bias: vec![0.0; nodes], weights: BTreeMap::new() };
    for ex in batch {
        let z = logits_scaled(weights, scale, bias, dim, &ex.features);
        for j in 0..nodes {
            let y = ex.target[j];
            loss += bce_logit(y, z[j]) * inv_b;
            // d/dz BCE = σ(z) − y; unclamped σ keeps the gradient exact
            let p = 1.0 / (1.0 + (-z[j]).exp());
            let err = (p - y) * inv_b;
            g.bias[j] += err;
            for &(f, v) in ex.features.entries() {
                *g.weights.entry(j * dim + f as usize).or_insert(0.0) += err * v;
            }
        }
    }
    (loss, g)
}

/// Batch objective including the L2 term.
pub fn objective(model: &ClassifierModel, batch: &[&Example], l2: f64) -> f64 {
    let (data, _) = data_gradient(&model.weights, 1.0, &model.bias, model.feature_dim, batch);
    data + l2 * model.weight_norm_sq()
}

/// Full analytic gradient of [`objective`]: `(weights row-major, bias)`.
pub fn objective_gradient(model: &ClassifierModel, batch: &[&Example], l2: f64) -> (Vec<f64>, Vec<f64>) {
    let (_, g) = data_gradient(&model.weights, 1.0, &model.bias, model.feature_dim, batch);
    let mut gw: Vec<f64> = model.weights.iter().map(|w| 2.0 * l2 * w).collect();
    for (i, v) in g.weights {
        gw[i] += v;
    }
    (gw, g.bias)
}

/// Mean per-record loss over a whole example set, L2 term included.
pub fn mean_loss(model: &ClassifierModel, examples: &[Example], l2: f64) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let refs: Vec<&Example> = examples.iter().collect();
    objective(model, &refs, l2)
}

/// Progress report emitted every `eval_every` batches.
#[derive(Clone, Debug, PartialEq)]
pub struct Telemetry {
    pub epoch: usize,
    /// 1-based global batch index.
    pub batch: usize,
    /// Mean data loss over the batches since the previous report.
    pub train_loss: f64,
}

/// Trains from scratch (`init = None`) or warm-starts from `init`.
pub fn train(t: &Taxonomy, d: &Dataset, cfg: &TrainConfig, init: Option<&ClassifierModel>) -> Result<ClassifierModel> {
    train_with_telemetry(t, d, cfg, init, &mut |_| {})
}

pub fn train_with_telemetry(
    t: &Taxonomy,
    d: &Dataset,
    cfg: &TrainConfig,
    init: Option<&ClassifierModel>,
    telemetry: &mut dyn FnMut(&Telemetry),
) -> Result<ClassifierModel> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let start = match init {
        Some(m) => {
            m.check_taxonomy(t)?;
            m.clone()
        }
        None => ClassifierModel::zeros(t),
    };
    let examples = Example::from_dataset(t, d)?;
    Ok(fit(start, &examples, cfg, telemetry))
}

/// The SGD loop over prepared examples. Deterministic for a fixed config.
///
/// The L2 shrinkage is applied lazily: weights are held as `scale·v`, so the
/// per-step decay `(1 − 2·lr·l2)` touches one scalar instead of every weight.
pub fn fit(
    mut model: ClassifierModel,
    examples: &[Example],
    cfg: &TrainConfig,
    telemetry: &mut dyn FnMut(&Telemetry),
) -> ClassifierModel {
    let dim = model.feature_dim;
    let mut rng = Rng::new(cfg.seed);
    let mut scale = 1.0f64;
    let mut k = 0usize;
    let mut window = (0.0f64, 0usize);
    for epoch in 0..cfg.epochs {
        let order = rng.permutation(examples.len());
        for chunk in order.chunks(cfg.batch_size) {
            k += 1;
            let batch: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
            let (loss, g) = data_gradient(&model.weights, scale, &model.bias, dim, &batch);
            let lr = cfg.learning_rate / (k as f64).sqrt();
            scale *= 1.0 - 2.0 * lr * cfg.l2;
            for (i, gv) in g.weights {
                model.weights[i] -= lr * gv / scale;
            }
            for (b, gb) in model.bias.iter_mut().zip(&g.bias) {
                *b -= lr * gb;
            }
            if scale < 1e-3 {
                fold_scale(&mut model.weights, &mut scale);
            }
            window.0 += loss;
            window.1 += 1;
            if k.is_multiple_of(cfg.eval_every) {
                let report = Telemetry { epoch, batch: k, train_loss: window.0 / window.1 as f64 };
                log::info!("epoch {} batch {}: train loss {:.5}", epoch + 1, k, report.train_loss);
                telemetry(&report);
                window = (0.0, 0);
            }
        }
    }
    fold_scale(&mut model.weights, &mut scale);
    model
}

fn fold_scale(weights: &mut [f64], scale: &mut f64) {
    if *scale != 1.0 {
        for w in weights.iter_mut() {
            *w *= *scale;
        }
        *scale = 1.0;
    }
}
