//! A small fully-connected classifier trained with manual backpropagation.
//!
//! The analytic elementwise kernels in [`crate::activations`] are the thing
//! under test here, so no autodiff framework sits between them and the loss:
//! gradients flow through `backward_x` / `param_deriv` explicitly. Training
//! is single-threaded and bit-deterministic for fixed seeds.
//!
//! Hidden layers share one activation kind; the output layer emits raw
//! logits. Learnable gate sharpness is updated jointly with the weights,
//! either one value per hidden layer or one global value.

use crate::activations::{Activation, ActivationError};
use crate::gates::Sharpness;
use crate::longtail::{self, Dataset, LongTailConfig, LongTailError};
use crate::math;
use crate::rng;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SigmaSharing {
    /// One sharpness parameter per hidden layer (default).
    PerLayer,
    /// A single sharpness parameter shared by every hidden layer.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InitScheme {
    /// Weights ~ N(0, 2/fan_in), zero biases.
    FanInScaled,
    /// Tiny weights (N(0, 1e-4)) and hidden biases pinned at -10: an
    /// adversarial start that drives every hidden pre-activation negative
    /// on bounded data, for the dead-unit experiments.
    ConstantNegativeBias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Optimizer {
    Sgd,
    AdamW,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LrSchedule {
    Constant,
    /// Cosine annealing from the base rate toward zero across epochs.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LossKind {
    CrossEntropy,
    /// Cross-entropy with inverse-frequency class weights computed from the
    /// training histogram (see [`longtail::class_weights`]).
    WeightedCrossEntropy,
}

/// Network architecture and initialization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpConfig {
    /// `input -> hidden... -> classes`; at least one hidden layer.
    pub layer_sizes: Vec<usize>,
    /// Activation applied to every hidden layer.
    pub activation: Activation,
    pub sigma_sharing: SigmaSharing,
    pub init: InitScheme,
    pub seed: u64,
}

/// Optimization hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub optimizer: Optimizer,
    pub lr_schedule: LrSchedule,
    pub loss: LossKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            weight_decay: 1e-2,
            optimizer: Optimizer::AdamW,
            lr_schedule: LrSchedule::Cosine,
            loss: LossKind::CrossEntropy,
            seed: 0,
        }
    }
}

/// Telemetry for one epoch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub dead_unit_fraction: f64,
    /// Effective sigma per learnable parameter; `None` for fixed sigma.
    pub sigma_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub per_epoch: Vec<EpochStats>,
    #[cfg_attr(feature = "serde", serde(rename = "final"))]
    pub final_epoch: EpochStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    Config(String),
    /// Loss went non-finite; carries the failing epoch (0-based) and the
    /// stats of the epochs that completed before it.
    Diverged { epoch: usize, completed: Vec<EpochStats> },
    Activation(ActivationError),
    Data(LongTailError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Config(msg) => write!(f, "invalid training config: {msg}"),
            TrainError::Diverged { epoch, .. } => {
                write!(f, "training diverged (non-finite loss) at epoch {epoch}")
            }
            TrainError::Activation(e) => write!(f, "activation error: {e}"),
            TrainError::Data(e) => write!(f, "data error: {e}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<ActivationError> for TrainError {
    fn from(e: ActivationError) -> Self {
        TrainError::Activation(e)
    }
}

impl From<LongTailError> for TrainError {
    fn from(e: LongTailError) -> Self {
        TrainError::Data(e)
    }
}

/// Parameter gradients, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub sigma_raw: Option<Vec<f64>>,
}

impl Gradients {
    /// Flatten in the model's parameter order (per layer: weights row-major,
    /// then bias; sigma raws last).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        if let Some(s) = &self.sigma_raw {
            out.extend_from_slice(s);
        }
        out
    }
}

/// Fully-connected network with dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    /// `weights[l]` has shape `sizes[l+1] x sizes[l]`, row-major.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activation: Activation,
    sharing: SigmaSharing,
    /// Raw (pre-softplus) sharpness values when learnable: one per hidden
    /// layer, or one total under global sharing.
    sigma_raw: Option<Vec<f64>>,
}

struct ForwardCache {
    /// Pre-activations per weight layer, `n x sizes[l+1]`.
    pre: Vec<Vec<f64>>,
    /// Post-activations per hidden layer, `n x sizes[l+1]`.
    post: Vec<Vec<f64>>,
}

impl Mlp {
    pub fn new(cfg: &MlpConfig) -> Result<Self, TrainError> {
        if cfg.layer_sizes.len() < 3 {
            return Err(TrainError::Config(
                "layer_sizes needs input, at least one hidden layer, and output".to_string(),
            ));
        }
        if cfg.layer_sizes.iter().any(|&s| s == 0) {
            return Err(TrainError::Config("layer sizes must be positive".to_string()));
        }
        cfg.activation.validate()?;

        let mut rng = rng::seeded(cfg.seed);
        let layers = cfg.layer_sizes.len() - 1;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let fan_in = cfg.layer_sizes[l];
            let fan_out = cfg.layer_sizes[l + 1];
            let scale = match cfg.init {
                InitScheme::FanInScaled => math::sqrt(2.0 / fan_in as f64),
                InitScheme::ConstantNegativeBias => 1e-2,
            };
            let w: Vec<f64> =
                (0..fan_in * fan_out).map(|_| scale * rng::standard_normal(&mut rng)).collect();
            let hidden = l + 1 < layers;
            let bias_value = match cfg.init {
                InitScheme::FanInScaled => 0.0,
                InitScheme::ConstantNegativeBias if hidden => -10.0,
                InitScheme::ConstantNegativeBias => 0.0,
            };
            weights.push(w);
            biases.push(vec![bias_value; fan_out]);
        }

        let learnable = match cfg.activation {
            Activation::Iglu { sigma } | Activation::IgluApprox { sigma } => sigma.raw(),
            _ => None,
        };
        let sigma_raw = learnable.map(|raw| {
            let n = match cfg.sigma_sharing {
                SigmaSharing::PerLayer => layers - 1,
                SigmaSharing::Global => 1,
            };
            vec![raw; n]
        });

        Ok(Mlp {
            sizes: cfg.layer_sizes.clone(),
            weights,
            biases,
            activation: cfg.activation,
            sharing: cfg.sigma_sharing,
            sigma_raw,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_classes(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn num_weight_layers(&self) -> usize {
        self.weights.len()
    }

    fn hidden_layers(&self) -> usize {
        self.num_weight_layers() - 1
    }

    /// Effective activation of hidden layer `l` (sigma substituted when
    /// learnable).
    pub fn layer_activation(&self, l: usize) -> Activation {
        match (&self.sigma_raw, self.activation) {
            (Some(raws), Activation::Iglu { .. }) => {
                let raw = raws[self.sigma_index(l)];
                Activation::Iglu { sigma: Sharpness::from_raw(raw) }
            }
            (Some(raws), Activation::IgluApprox { .. }) => {
                let raw = raws[self.sigma_index(l)];
                Activation::IgluApprox { sigma: Sharpness::from_raw(raw) }
            }
            _ => self.activation,
        }
    }

    fn sigma_index(&self, layer: usize) -> usize {
        match self.sharing {
            SigmaSharing::PerLayer => layer,
            SigmaSharing::Global => 0,
        }
    }

    /// Effective sigma values in parameter order, when learnable.
    pub fn sigma_values(&self) -> Option<Vec<f64>> {
        self.sigma_raw
            .as_ref()
            .map(|raws| raws.iter().map(|&r| Sharpness::from_raw(r).value()).collect())
    }

    fn forward_cache(&self, features: &[f64], n: usize) -> ForwardCache {
        let layers = self.num_weight_layers();
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(layers);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(layers - 1);
        for l in 0..layers {
            let in_dim = self.sizes[l];
            let out_dim = self.sizes[l + 1];
            let mut z = vec![0.0; n * out_dim];
            let input: &[f64] = if l == 0 { features } else { &post[l - 1] };
            for s in 0..n {
                let row = &input[s * in_dim..(s + 1) * in_dim];
                let zs = &mut z[s * out_dim..(s + 1) * out_dim];
                for (j, zj) in zs.iter_mut().enumerate() {
                    let wrow = &self.weights[l][j * in_dim..(j + 1) * in_dim];
                    let mut acc = self.biases[l][j];
                    for (wi, xi) in wrow.iter().zip(row) {
                        acc += wi * xi;
                    }
                    *zj = acc;
                }
            }
            pre.push(z);
            if l + 1 < layers {
                let act = self.layer_activation(l);
                let h: Vec<f64> = pre[l].iter().map(|&v| act.eval(v)).collect();
                post.push(h);
            }
        }
        ForwardCache { pre, post }
    }

    /// Logits for a batch (row-major `n x classes`).
    pub fn logits(&self, features: &[f64], n: usize) -> Vec<f64> {
        let cache = self.forward_cache(features, n);
        cache.pre.into_iter().last().unwrap()
    }

    /// Argmax predictions (ties resolve to the lowest class index).
    pub fn predict(&self, features: &[f64], n: usize) -> Vec<usize> {
        let k = self.num_classes();
        let logits = self.logits(features, n);
        (0..n)
            .map(|s| {
                let row = &logits[s * k..(s + 1) * k];
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    /// Mean cross-entropy and accuracy on a dataset (optionally
    /// class-weighted for the loss).
    pub fn evaluate(&self, data: &Dataset, class_weights: Option<&[f64]>) -> (f64, f64) {
        let n = data.len();
        let k = self.num_classes();
        let logits = self.logits(&data.features, n);
        let mut loss_sum = 0.0;
        let mut weight_sum = 0.0;
        let mut correct = 0usize;
        for s in 0..n {
            let row = &logits[s * k..(s + 1) * k];
            let y = data.labels[s];
            let (nll, pred) = nll_and_argmax(row, y);
            let w = class_weights.map_or(1.0, |cw| cw[y]);
            loss_sum += w * nll;
            weight_sum += w;
            if pred == y {
                correct += 1;
            }
        }
        (loss_sum / weight_sum, correct as f64 / n as f64)
    }

    /// Weighted-mean cross-entropy loss and its gradients for one batch.
    /// This is the exact quantity the optimizer steps on, exposed so the
    /// end-to-end finite-difference check can drive it.
    pub fn loss_and_grads(
        &self,
        features: &[f64],
        labels: &[usize],
        class_weights: Option<&[f64]>,
    ) -> (f64, Gradients) {
        let n = labels.len();
        let k = self.num_classes();
        let layers = self.num_weight_layers();
        let cache = self.forward_cache(features, n);

        // softmax cross-entropy on the logits
        let logits = &cache.pre[layers - 1];
        let weight_total: f64 =
            labels.iter().map(|&y| class_weights.map_or(1.0, |cw| cw[y])).sum();
        let mut loss = 0.0;
        let mut delta = vec![0.0; n * k]; // dL/dlogits
        for s in 0..n {
            let row = &logits[s * k..(s + 1) * k];
            let y = labels[s];
            let w = class_weights.map_or(1.0, |cw| cw[y]);
            let mut maxv = row[0];
            for &v in row {
                maxv = maxv.max(v);
            }
            let mut denom = 0.0;
            for &v in row {
                denom += math::exp(v - maxv);
            }
            loss += w * (math::log(denom) + maxv - row[y]);
            let scale = w / weight_total;
            let drow = &mut delta[s * k..(s + 1) * k];
            for (j, d) in drow.iter_mut().enumerate() {
                let p = math::exp(row[j] - maxv) / denom;
                *d = scale * (p - if j == y { 1.0 } else { 0.0 });
            }
        }
        loss /= weight_total;

        let mut grads = Gradients {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            sigma_raw: self.sigma_raw.as_ref().map(|s| vec![0.0; s.len()]),
        };

        // walk the layers backwards; `delta` is dL/d(pre-activation of l)
        for l in (0..layers).rev() {
            let in_dim = self.sizes[l];
            let out_dim = self.sizes[l + 1];
            let input: &[f64] = if l == 0 { features } else { &cache.post[l - 1] };
            for s in 0..n {
                let drow = &delta[s * out_dim..(s + 1) * out_dim];
                let xrow = &input[s * in_dim..(s + 1) * in_dim];
                for j in 0..out_dim {
                    let d = drow[j];
                    if d == 0.0 {
                        continue;
                    }
                    let wg = &mut grads.weights[l][j * in_dim..(j + 1) * in_dim];
                    for (g, &x) in wg.iter_mut().zip(xrow) {
                        *g += d * x;
                    }
                    grads.biases[l][j] += d;
                }
            }
            if l == 0 {
                break;
            }

            // dL/d(post of l-1) = W^T delta, then through the activation
            let act = self.layer_activation(l - 1);
            let prev_dim = in_dim;
            let mut new_delta = vec![0.0; n * prev_dim];
            for s in 0..n {
                let drow = &delta[s * out_dim..(s + 1) * out_dim];
                let nd = &mut new_delta[s * prev_dim..(s + 1) * prev_dim];
                for j in 0..out_dim {
                    let d = drow[j];
                    if d == 0.0 {
                        continue;
                    }
                    let wrow = &self.weights[l][j * prev_dim..(j + 1) * prev_dim];
                    for (g, &w) in nd.iter_mut().zip(wrow) {
                        *g += d * w;
                    }
                }
            }
            let z = &cache.pre[l - 1];
            if let Some(sg) = grads.sigma_raw.as_mut() {
                let idx = self.sigma_index(l - 1);
                let mut acc = 0.0;
                for (d, &zv) in new_delta.iter().zip(z) {
                    if *d != 0.0 {
                        acc += *d * act.param_deriv(zv).expect("learnable sigma");
                    }
                }
                sg[idx] += acc;
            }
            for (d, &zv) in new_delta.iter_mut().zip(z) {
                *d *= act.deriv(zv);
            }
            delta = new_delta;
        }

        (loss, grads)
    }

    /// Total number of scalar parameters (flat order documented on
    /// [`Gradients::flatten`]).
    pub fn param_count(&self) -> usize {
        let wb: usize =
            self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>();
        wb + self.sigma_raw.as_ref().map_or(0, |s| s.len())
    }

    pub fn param(&self, mut idx: usize) -> f64 {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if idx < w.len() {
                return w[idx];
            }
            idx -= w.len();
            if idx < b.len() {
                return b[idx];
            }
            idx -= b.len();
        }
        self.sigma_raw.as_ref().expect("param index out of range")[idx]
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            if idx < w.len() {
                w[idx] = value;
                return;
            }
            idx -= w.len();
            if idx < b.len() {
                b[idx] = value;
                return;
            }
            idx -= b.len();
        }
        self.sigma_raw.as_mut().expect("param index out of range")[idx] = value;
    }

    fn param_class(&self, mut idx: usize) -> ParamClass {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if idx < w.len() {
                return ParamClass::Weight;
            }
            idx -= w.len();
            if idx < b.len() {
                return ParamClass::Bias;
            }
            idx -= b.len();
        }
        ParamClass::Sigma
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ParamClass {
    Weight,
    Bias,
    Sigma,
}

fn nll_and_argmax(row: &[f64], y: usize) -> (f64, usize) {
    let mut maxv = row[0];
    let mut arg = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > maxv {
            maxv = v;
            arg = j;
        }
    }
    let mut denom = 0.0;
    for &v in row {
        denom += math::exp(v - maxv);
    }
    (math::log(denom) + maxv - row[y], arg)
}

/// Fraction of hidden units whose input gradient is exactly zero on every
/// probe sample. For ReLU a unit is dead iff its pre-activation is negative
/// everywhere; for the arctangent gates with `sigma > 0` the derivative is
/// strictly positive for all finite inputs, so the fraction is 0 by
/// construction. The Gaussian gate only reaches an exact zero once
/// `exp(-x^2/2)` and the CDF both underflow, around `x < -38.6`.
pub fn dead_unit_fraction(mlp: &Mlp, probe: &Dataset) -> f64 {
    let n = probe.len();
    let cache = mlp.forward_cache(&probe.features, n);
    let mut dead = 0usize;
    let mut total = 0usize;
    for l in 0..mlp.hidden_layers() {
        let act = mlp.layer_activation(l);
        let dim = mlp.sizes[l + 1];
        let z = &cache.pre[l];
        for j in 0..dim {
            total += 1;
            let alive = (0..n).any(|s| act.deriv(z[s * dim + j]) != 0.0);
            if !alive {
                dead += 1;
            }
        }
    }
    dead as f64 / total as f64
}

/// Train an MLP; returns the trained model and per-epoch telemetry.
pub fn train(
    mlp_cfg: &MlpConfig,
    train_data: &Dataset,
    test_data: &Dataset,
    tc: &TrainConfig,
) -> Result<(Mlp, TrainReport), TrainError> {
    validate_train_config(tc)?;
    if train_data.feature_dim != mlp_cfg.layer_sizes[0] {
        return Err(TrainError::Config("feature_dim does not match the input layer".to_string()));
    }
    if train_data.num_classes != *mlp_cfg.layer_sizes.last().unwrap() {
        return Err(TrainError::Config("num_classes does not match the output layer".to_string()));
    }

    let mut mlp = Mlp::new(mlp_cfg)?;
    let class_weights = match tc.loss {
        LossKind::CrossEntropy => None,
        LossKind::WeightedCrossEntropy => {
            Some(longtail::class_weights(&train_data.class_histogram())?)
        }
    };

    let pc = mlp.param_count();
    let mut adam_m = vec![0.0; pc];
    let mut adam_v = vec![0.0; pc];
    let mut adam_t = 0u32;

    let mut shuffle_rng = rng::seeded(tc.seed);
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let dim = train_data.feature_dim;
    let mut batch_features = vec![0.0; tc.batch_size * dim];
    let mut batch_labels = vec![0usize; tc.batch_size];

    let mut per_epoch: Vec<EpochStats> = Vec::with_capacity(tc.epochs);
    for epoch in 0..tc.epochs {
        let lr = match tc.lr_schedule {
            LrSchedule::Constant => tc.learning_rate,
            LrSchedule::Cosine => {
                tc.learning_rate * 0.5 * (1.0 + math::cos(PI * epoch as f64 / tc.epochs as f64))
            }
        };
        rng::shuffle(&mut shuffle_rng, &mut order);

        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(tc.batch_size) {
            let bn = chunk.len();
            for (bi, &s) in chunk.iter().enumerate() {
                batch_features[bi * dim..(bi + 1) * dim].copy_from_slice(train_data.sample(s));
                batch_labels[bi] = train_data.labels[s];
            }
            let (loss, grads) = mlp.loss_and_grads(
                &batch_features[..bn * dim],
                &batch_labels[..bn],
                class_weights.as_deref(),
            );
            if !loss.is_finite() {
                return Err(TrainError::Diverged { epoch, completed: per_epoch });
            }
            loss_sum += loss * bn as f64;
            seen += bn;

            let flat = grads.flatten();
            adam_t += 1;
            for (idx, &g) in flat.iter().enumerate() {
                let decay = mlp.param_class(idx) == ParamClass::Weight;
                let p = mlp.param(idx);
                let mut new_p = match tc.optimizer {
                    Optimizer::Sgd => p - lr * g,
                    Optimizer::AdamW => {
                        adam_m[idx] = ADAM_BETA1 * adam_m[idx] + (1.0 - ADAM_BETA1) * g;
                        adam_v[idx] = ADAM_BETA2 * adam_v[idx] + (1.0 - ADAM_BETA2) * g * g;
                        let mhat = adam_m[idx] / (1.0 - libm::pow(ADAM_BETA1, adam_t as f64));
                        let vhat = adam_v[idx] / (1.0 - libm::pow(ADAM_BETA2, adam_t as f64));
                        p - lr * mhat / (math::sqrt(vhat) + ADAM_EPS)
                    }
                };
                if decay {
                    new_p -= lr * tc.weight_decay * new_p;
                }
                mlp.set_param(idx, new_p);
            }
        }

        let train_loss = loss_sum / seen as f64;
        let (test_loss, test_accuracy) = mlp.evaluate(test_data, None);
        if !test_loss.is_finite() {
            return Err(TrainError::Diverged { epoch, completed: per_epoch });
        }
        per_epoch.push(EpochStats {
            epoch,
            train_loss,
            test_loss,
            test_accuracy,
            dead_unit_fraction: dead_unit_fraction(&mlp, test_data),
            sigma_values: mlp.sigma_values(),
        });
    }

    let final_epoch = per_epoch.last().expect("epochs >= 1").clone();
    Ok((mlp, TrainReport { per_epoch, final_epoch }))
}

fn validate_train_config(tc: &TrainConfig) -> Result<(), TrainError> {
    if tc.epochs == 0 {
        return Err(TrainError::Config("epochs must be >= 1".to_string()));
    }
    if tc.batch_size == 0 {
        return Err(TrainError::Config("batch_size must be >= 1".to_string()));
    }
    if !(tc.learning_rate.is_finite() && tc.learning_rate > 0.0) {
        return Err(TrainError::Config("learning_rate must be finite and > 0".to_string()));
    }
    if !(tc.weight_decay.is_finite() && tc.weight_decay >= 0.0) {
        return Err(TrainError::Config("weight_decay must be finite and >= 0".to_string()));
    }
    Ok(())
}

/// One `(ratio, activation)` cell of the imbalance study.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteCell {
    pub ratio: f64,
    /// Unweighted cross-entropy on the balanced test split.
    pub test_loss: f64,
    /// Mean of per-class recalls on the balanced test split.
    pub balanced_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteRow {
    pub activation: String,
    pub cells: Vec<SuiteCell>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteTable {
    pub ratios: Vec<f64>,
    pub rows: Vec<SuiteRow>,
}

/// Shared setup for [`run_imbalance_suite`].
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Base dataset shape; `imbalance_ratio` is overridden per column.
    pub data: LongTailConfig,
    pub hidden_sizes: Vec<usize>,
    /// Optimization settings; the loss is forced to weighted cross-entropy
    /// (training) while evaluation uses the unweighted loss.
    pub train: TrainConfig,
    pub init: InitScheme,
    pub sigma_sharing: SigmaSharing,
    pub model_seed: u64,
}

/// Train every activation at every imbalance ratio on freshly generated
/// long-tailed data and report balanced-test metrics. Rows follow the input
/// activation order, cells the input ratio order.
pub fn run_imbalance_suite(
    ratios: &[f64],
    activations: &[Activation],
    cfg: &SuiteConfig,
) -> Result<SuiteTable, TrainError> {
    if ratios.iter().any(|&r| !(r.is_finite() && r >= 1.0)) {
        return Err(TrainError::Config("ratios must be finite and >= 1".to_string()));
    }

    // same data for every activation at a given ratio
    let mut datasets = Vec::with_capacity(ratios.len());
    for &rho in ratios {
        let data_cfg = LongTailConfig { imbalance_ratio: rho, ..cfg.data.clone() };
        datasets.push(longtail::generate(&data_cfg)?);
    }

    let mut rows = Vec::with_capacity(activations.len());
    for act in activations {
        let mut cells = Vec::with_capacity(ratios.len());
        for (ri, &rho) in ratios.iter().enumerate() {
            let (train_data, test_data) = &datasets[ri];
            let mut layer_sizes = vec![cfg.data.feature_dim];
            layer_sizes.extend_from_slice(&cfg.hidden_sizes);
            layer_sizes.push(cfg.data.num_classes);
            let mlp_cfg = MlpConfig {
                layer_sizes,
                activation: *act,
                sigma_sharing: cfg.sigma_sharing,
                init: cfg.init,
                seed: cfg.model_seed,
            };
            let tc = TrainConfig { loss: LossKind::WeightedCrossEntropy, ..cfg.train.clone() };
            let (mlp, _report) = train(&mlp_cfg, train_data, test_data, &tc)?;
            let (test_loss, _acc) = mlp.evaluate(test_data, None);
            cells.push(SuiteCell {
                ratio: rho,
                test_loss,
                balanced_accuracy: balanced_accuracy(&mlp, test_data),
            });
        }
        rows.push(SuiteRow { activation: act.to_string(), cells });
    }
    Ok(SuiteTable { ratios: ratios.to_vec(), rows })
}

/// Mean of per-class recalls.
pub fn balanced_accuracy(mlp: &Mlp, data: &Dataset) -> f64 {
    let preds = mlp.predict(&data.features, data.len());
    let k = data.num_classes;
    let mut hits = vec![0usize; k];
    let mut totals = vec![0usize; k];
    for (&p, &y) in preds.iter().zip(&data.labels) {
        totals[y] += 1;
        if p == y {
            hits[y] += 1;
        }
    }
    let mut sum = 0.0;
    let mut classes = 0usize;
    for (h, t) in hits.iter().zip(&totals) {
        if *t > 0 {
            sum += *h as f64 / *t as f64;
            classes += 1;
        }
    }
    sum / classes as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_config(seed: u64) -> LongTailConfig {
        LongTailConfig {
            num_classes: 2,
            max_count: 60,
            imbalance_ratio: 1.0,
            feature_dim: 4,
            seed,
            class_separation: 6.0,
            test_per_class: 30,
        }
    }

    fn mlp_cfg(act: Activation) -> MlpConfig {
        MlpConfig {
            layer_sizes: vec![4, 12, 2],
            activation: act,
            sigma_sharing: SigmaSharing::PerLayer,
            init: InitScheme::FanInScaled,
            seed: 5,
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = MlpConfig { layer_sizes: vec![4, 2], ..mlp_cfg(Activation::Relu) };
        assert!(Mlp::new(&bad).is_err());
        let (tr, te) = longtail::generate(&blob_config(1)).unwrap();
        let tc = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(train(&mlp_cfg(Activation::Relu), &tr, &te, &tc).is_err());
        let mismatched = MlpConfig { layer_sizes: vec![3, 8, 2], ..mlp_cfg(Activation::Relu) };
        assert!(train(&mismatched, &tr, &te, &TrainConfig::default()).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let (tr, te) = longtail::generate(&blob_config(2)).unwrap();
        let cfg = mlp_cfg(Activation::Iglu { sigma: Sharpness::fixed(1.0) });
        let tc = TrainConfig { epochs: 5, ..TrainConfig::default() };
        let (_m1, r1) = train(&cfg, &tr, &te, &tc).unwrap();
        let (_m2, r2) = train(&cfg, &tr, &te, &tc).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn learnable_sigma_is_tracked_and_positive() {
        let (tr, te) = longtail::generate(&blob_config(3)).unwrap();
        let cfg = mlp_cfg(Activation::Iglu { sigma: Sharpness::learnable(1.0) });
        let tc = TrainConfig { epochs: 4, ..TrainConfig::default() };
        let (_mlp, report) = train(&cfg, &tr, &te, &tc).unwrap();
        for stats in &report.per_epoch {
            let sig = stats.sigma_values.as_ref().expect("learnable sigma recorded");
            assert_eq!(sig.len(), 1);
            assert!(sig.iter().all(|&s| s > 0.0));
        }
    }

    #[test]
    fn fixed_sigma_reports_no_sigma_values() {
        let (tr, te) = longtail::generate(&blob_config(3)).unwrap();
        let cfg = mlp_cfg(Activation::Iglu { sigma: Sharpness::fixed(1.0) });
        let tc = TrainConfig { epochs: 2, ..TrainConfig::default() };
        let (_mlp, report) = train(&cfg, &tr, &te, &tc).unwrap();
        assert!(report.per_epoch.iter().all(|s| s.sigma_values.is_none()));
    }

    #[test]
    fn sigma_sharing_equivalent_for_single_hidden_layer() {
        let (tr, te) = longtail::generate(&blob_config(4)).unwrap();
        let base = mlp_cfg(Activation::IgluApprox { sigma: Sharpness::learnable(0.8) });
        let tc = TrainConfig { epochs: 3, ..TrainConfig::default() };
        let per_layer = train(&base, &tr, &te, &tc).unwrap().1;
        let global_cfg = MlpConfig { sigma_sharing: SigmaSharing::Global, ..base };
        let global = train(&global_cfg, &tr, &te, &tc).unwrap().1;
        assert_eq!(per_layer, global);
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let (tr, te) = longtail::generate(&blob_config(5)).unwrap();
        let cfg = mlp_cfg(Activation::Relu);
        let tc = TrainConfig {
            epochs: 10,
            learning_rate: 1e12,
            optimizer: Optimizer::Sgd,
            ..TrainConfig::default()
        };
        match train(&cfg, &tr, &te, &tc) {
            Err(TrainError::Diverged { epoch, completed }) => {
                assert!(epoch < 10);
                assert!(completed.len() <= epoch);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn weighted_loss_equals_unweighted_when_balanced() {
        let (tr, te) = longtail::generate(&blob_config(6)).unwrap();
        let cfg = mlp_cfg(Activation::Silu);
        let tc = TrainConfig { epochs: 3, ..TrainConfig::default() };
        let plain = train(&cfg, &tr, &te, &tc).unwrap().1;
        let weighted =
            train(&cfg, &tr, &te, &TrainConfig { loss: LossKind::WeightedCrossEntropy, ..tc })
                .unwrap()
                .1;
        // balanced data => weights identically 1 => identical runs
        assert_eq!(plain, weighted);
    }

    #[test]
    fn suite_ordering_matches_inputs() {
        let cfg = SuiteConfig {
            data: LongTailConfig {
                num_classes: 3,
                max_count: 30,
                feature_dim: 4,
                seed: 9,
                class_separation: 6.0,
                test_per_class: 10,
                imbalance_ratio: 1.0,
            },
            hidden_sizes: vec![8],
            train: TrainConfig { epochs: 3, ..TrainConfig::default() },
            init: InitScheme::FanInScaled,
            sigma_sharing: SigmaSharing::PerLayer,
            model_seed: 1,
        };
        let acts =
            [Activation::Relu, Activation::Iglu { sigma: Sharpness::fixed(0.5) }];
        let table = run_imbalance_suite(&[1.0, 4.0], &acts, &cfg).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].activation, "ReLU");
        assert_eq!(table.rows[1].activation, "IGLU(sigma=0.5)");
        for row in &table.rows {
            assert_eq!(row.cells[0].ratio, 1.0);
            assert_eq!(row.cells[1].ratio, 4.0);
        }
        assert!(run_imbalance_suite(&[0.5], &acts, &cfg).is_err());
    }
}
