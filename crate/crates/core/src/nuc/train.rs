use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::dataset::NucExample;
use super::estimate::{pjsd_estimate, PROB_CLAMP};
use super::features::Featurizer;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            learning_rate: 0.1,
            epochs: 20,
            batch_size: 256,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub hyper: TrainHyper,
    pub n_examples: usize,
    pub n_positive: usize,
}

/// Logistic model over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams<T> {
    pub feature_schema_id: String,
    pub feature_names: Vec<String>,
    pub weights: Vec<T>,
    pub bias: T,
    pub mean: Vec<T>,
    pub scale: Vec<T>,
    pub metadata: TrainingMetadata,
}

impl<T: Scalar> ClassifierParams<T> {
    /// Raw logit for an unstandardized feature vector.
    pub fn logit(&self, x: &[T]) -> T {
        self.weights
            .iter()
            .zip(x)
            .zip(self.mean.iter().zip(&self.scale))
            .fold(self.bias, |acc, ((&w, &v), (&m, &s))| acc + w * (v - m) / s)
    }

    /// Clamped probability that `x` describes a true reply.
    pub fn probability(&self, x: &[T]) -> T {
        clamp(sigmoid(self.logit(x)))
    }
}

impl<T: Scalar + Serialize + DeserializeOwned> ClassifierParams<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::parse("classifier params", e.line(), e))?;
        let d = p.feature_names.len();
        if p.weights.len() != d || p.mean.len() != d || p.scale.len() != d {
            return Err(Error::Invalid(
                "classifier params: vector lengths disagree with feature names".into(),
            ));
        }
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Per-epoch training record. `loss` is the class-balanced cross-entropy over
/// the full training set with clamped probabilities; `objective` adds the L2 term.
/// `mean_pjsd` averages the pair-level estimates when every pair id has one
/// positive and the same number of negatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub objective: f64,
    pub mean_pjsd: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: ClassifierParams<T>,
    pub history: Vec<EpochStats>,
}

pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

pub(crate) fn clamp<T: Scalar>(p: T) -> T {
    let eps = T::of(PROB_CLAMP);
    p.max(eps).min(T::one() - eps)
}

/// ln(1 + e^z) without overflow.
fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// Per-example weights `N / N_class`, so the weighted mean loss equals
/// `mean over positives + mean over negatives`.
fn class_weights<T: Scalar>(y: &[bool]) -> Result<Vec<T>> {
    let n_pos = y.iter().filter(|&&z| z).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let n = T::count(y.len());
    let (wp, wn) = (n / T::count(n_pos), n / T::count(n_neg));
    Ok(y.iter().map(|&z| if z { wp } else { wn }).collect())
}

/// Class-balanced logistic objective and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective<T> {
    pub value: T,
    pub grad_weights: Vec<T>,
    pub grad_bias: T,
}

/// `mean_pos(-ln σ(w·x + b)) + mean_neg(-ln(1 - σ(w·x + b))) + l2/2 |w|^2`
/// over the given rows, with its analytic gradient. No clamping is applied.
pub fn objective_and_gradient<T: Scalar>(
    x: &[Vec<T>],
    y: &[bool],
    weights: &[T],
    bias: T,
    l2: T,
) -> Result<Objective<T>> {
    let cw = class_weights::<T>(y)?;
    let n = T::count(y.len());
    let mut value = T::zero();
    let mut grad_weights = vec![T::zero(); weights.len()];
    let mut grad_bias = T::zero();
    for ((row, &z), &c) in x.iter().zip(y).zip(&cw) {
        let logit = dot_bias(weights, bias, row);
        value = value + c * if z { softplus(-logit) } else { softplus(logit) };
        let r = c * (sigmoid(logit) - if z { T::one() } else { T::zero() }) / n;
        for (g, &v) in grad_weights.iter_mut().zip(row) {
            *g = *g + r * v;
        }
        grad_bias = grad_bias + r;
    }
    let sq: T = weights.iter().map(|&w| w * w).sum();
    for (g, &w) in grad_weights.iter_mut().zip(weights) {
        *g = *g + l2 * w;
    }
    Ok(Objective {
        value: value / n + l2 * sq / T::of(2.0),
        grad_weights,
        grad_bias,
    })
}

fn dot_bias<T: Scalar>(w: &[T], b: T, x: &[T]) -> T {
    w.iter().zip(x).fold(b, |acc, (&w, &v)| acc + w * v)
}

/// Feature matrix, labels and pair ids for training.
#[derive(Debug, Clone)]
pub struct TrainingSet<T> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<bool>,
    pub groups: Vec<String>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn from_examples(examples: &[NucExample], featurizer: &Featurizer<'_, T>) -> Self {
        let x = examples
            .par_iter()
            .map(|e| featurizer.values(&e.pair_id, &e.s, &e.t))
            .collect();
        TrainingSet {
            x,
            y: examples.iter().map(|e| e.z).collect(),
            groups: examples.iter().map(|e| e.pair_id.clone()).collect(),
        }
    }
}

fn standardization<T: Scalar>(x: &[Vec<T>], d: usize) -> (Vec<T>, Vec<T>) {
    let n = T::count(x.len());
    let mut mean = vec![T::zero(); d];
    for row in x {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / n);
    let mut var = vec![T::zero(); d];
    for row in x {
        for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
            *s = *s + (v - m) * (v - m);
        }
    }
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > T::zero() && sd.is_finite() {
                sd
            } else {
                T::one()
            }
        })
        .collect();
    (mean, scale)
}

/// Class-balanced loss with clamped probabilities, and the mean pair-level
/// pJSD estimate when the pair groups are complete and equally sized.
fn epoch_summary<T: Scalar>(probs: &[T], y: &[bool], groups: &[String]) -> Result<(T, Option<T>)> {
    let (mut pos, mut n_pos, mut neg, mut n_neg) = (T::zero(), 0usize, T::zero(), 0usize);
    for (&p, &z) in probs.iter().zip(y) {
        if z {
            pos = pos - p.ln();
            n_pos += 1;
        } else {
            neg = neg - (T::one() - p).ln();
            n_neg += 1;
        }
    }
    let loss = pos / T::count(n_pos) + neg / T::count(n_neg);

    let mut by_group: BTreeMap<&str, (Vec<T>, Vec<T>)> = BTreeMap::new();
    for ((&p, &z), g) in probs.iter().zip(y).zip(groups) {
        let e = by_group.entry(g).or_default();
        if z { &mut e.0 } else { &mut e.1 }.push(p);
    }
    let k = by_group.values().next().map_or(0, |g| g.1.len());
    let complete = k > 0 && by_group.values().all(|(p, n)| p.len() == 1 && n.len() == k);
    let mean_pjsd = if complete {
        let mut total = T::zero();
        for (p, n) in by_group.values() {
            total = total + pjsd_estimate(p[0], n)?.value;
        }
        Some(total / T::count(by_group.len()))
    } else {
        None
    };
    Ok((loss, mean_pjsd))
}

/// Trains on a prepared feature matrix. Mini-batch gradient descent over a
/// per-epoch seeded permutation; weights start at zero.
pub fn fit<T: Scalar>(
    set: &TrainingSet<T>,
    schema_id: &str,
    names: &[String],
    hyper: &TrainHyper,
) -> Result<TrainOutcome<T>> {
    if set.x.is_empty() {
        return Err(Error::Invalid("no training examples".into()));
    }
    let d = names.len();
    if let Some(row) = set.x.iter().find(|r| r.len() != d) {
        return Err(Error::SchemaMismatch {
            expected: format!("{d} features"),
            found: format!("{} features", row.len()),
        });
    }
    if hyper.batch_size == 0 || !(hyper.learning_rate > 0.0) || !(hyper.l2 >= 0.0) {
        return Err(Error::Invalid(
            "learning_rate must be > 0, batch_size >= 1 and l2 >= 0".into(),
        ));
    }
    let cw = class_weights::<T>(&set.y)?;
    let (mean, scale) = standardization(&set.x, d);
    let xs: Vec<Vec<T>> = set
        .x
        .iter()
        .map(|r| {
            r.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((&v, &m), &s)| (v - m) / s)
                .collect()
        })
        .collect();

    let lr = T::of(hyper.learning_rate);
    let l2 = T::of(hyper.l2);
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut history = Vec::with_capacity(hyper.epochs);

    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut seeds::rng(seeds::derive(hyper.seed, epoch as u64)));
        for batch in order.chunks(hyper.batch_size) {
            let m = T::count(batch.len());
            let mut gw = vec![T::zero(); d];
            let mut gb = T::zero();
            for &i in batch {
                let r = cw[i] * (sigmoid(dot_bias(&w, b, &xs[i])) - if set.y[i] { T::one() } else { T::zero() }) / m;
                for (g, &v) in gw.iter_mut().zip(&xs[i]) {
                    *g = *g + r * v;
                }
                gb = gb + r;
            }
            for (wj, g) in w.iter_mut().zip(gw) {
                *wj = *wj - lr * (g + l2 * *wj);
            }
            b = b - lr * gb;
            if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
        }
        let probs: Vec<T> = xs.iter().map(|r| clamp(sigmoid(dot_bias(&w, b, r)))).collect();
        let (loss, mean_pjsd) = epoch_summary(&probs, &set.y, &set.groups)?;
        let penalty = l2 * w.iter().map(|&v| v * v).sum::<T>() / T::of(2.0);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(EpochStats {
            epoch,
            loss: loss.as_f64(),
            objective: (loss + penalty).as_f64(),
            mean_pjsd: mean_pjsd.map(Scalar::as_f64),
        });
        log::debug!("epoch {epoch}: loss {:.6}", loss.as_f64());
    }

    Ok(TrainOutcome {
        params: ClassifierParams {
            feature_schema_id: schema_id.to_string(),
            feature_names: names.to_vec(),
            weights: w,
            bias: b,
            mean,
            scale,
            metadata: TrainingMetadata {
                hyper: hyper.clone(),
                n_examples: set.y.len(),
                n_positive: set.y.iter().filter(|&&z| z).count(),
            },
        },
        history,
    })
}

pub fn train_reference_classifier<T: Scalar>(
    examples: &[NucExample],
    featurizer: &Featurizer<'_, T>,
    hyper: &TrainHyper,
) -> Result<TrainOutcome<T>> {
    let set = TrainingSet::from_examples(examples, featurizer);
    let schema = featurizer.schema();
    fit(&set, &schema.id, &schema.names, hyper)
}

/// Half the class-balanced cross-entropy: ln 2 for a classifier at chance.
pub fn balanced_cross_entropy<T: Scalar>(
    params: &ClassifierParams<T>,
    featurizer: &Featurizer<'_, T>,
    examples: &[NucExample],
) -> Result<T> {
    super::score::check_schema(params, featurizer)?;
    let set = TrainingSet::from_examples(examples, featurizer);
    class_weights::<T>(&set.y)?;
    let probs: Vec<T> = set.x.iter().map(|r| params.probability(r)).collect();
    let (loss, _) = epoch_summary(&probs, &set.y, &set.groups)?;
    Ok(loss / T::of(2.0))
}

/// Fraction of examples on the right side of 0.5.
pub fn accuracy<T: Scalar>(params: &ClassifierParams<T>, set: &TrainingSet<T>) -> f64 {
    let half = T::of(0.5);
    let hits = set
        .x
        .iter()
        .zip(&set.y)
        .filter(|(r, &z)| (params.probability(r) > half) == z)
        .count();
    hits as f64 / set.y.len().max(1) as f64
}
