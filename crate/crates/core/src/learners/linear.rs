//! Linear models: multinomial logistic regression trained by full-batch
//! gradient descent, and one-vs-rest linear SVMs trained with Pegasos.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, LearnerError, LogregParams, SvmParams};
use crate::features::{DesignMatrix, SparseVector};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// Scores are logits of a single softmax.
    Softmax,
    /// Scores are one-vs-rest margins; softmax of margins is the
    /// probability surrogate.
    Margin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// K rows of V weights.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    link: Link,
}

impl LinearModel {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>, link: Link) -> Self {
        assert_eq!(weights.len(), biases.len());
        Self {
            weights,
            biases,
            link,
        }
    }

    /// Zero weights and biases.
    pub fn zeros(n_classes: usize, n_features: usize, link: Link) -> Self {
        Self::new(
            vec![vec![0.0; n_features]; n_classes],
            vec![0.0; n_classes],
            link,
        )
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn link(&self) -> Link {
        self.link
    }

    /// Logits or margins, one per class.
    pub fn scores(&self, x: &SparseVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| x.dot_dense(w) + b)
            .collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .map(|w| w * w)
            .sum::<f64>()
            .sqrt()
    }

    fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .flatten()
            .chain(&self.biases)
            .all(|w| w.is_finite())
    }
}

impl Classifier for LinearModel {
    fn n_classes(&self) -> usize {
        self.biases.len()
    }

    fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        crate::softmax(&self.scores(x))
    }
}

/// Mean softmax cross-entropy plus `l2 / 2 * ||W||^2` (biases unpenalized),
/// with its gradient.
pub struct Objective {
    pub loss: f64,
    pub grad_weights: Vec<Vec<f64>>,
    pub grad_biases: Vec<f64>,
}

pub fn logreg_objective(data: &DesignMatrix, model: &LinearModel, l2: f64) -> Objective {
    let (k, v) = (model.n_classes(), model.n_features());
    let n = data.len() as f64;
    let mut grad_weights = vec![vec![0.0; v]; k];
    let mut grad_biases = vec![0.0; k];
    let mut loss = 0.0;
    for (x, &y) in data.rows().iter().zip(data.labels()) {
        let logits = model.scores(x);
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        loss += lse - logits[y];
        for c in 0..k {
            let residual = ((logits[c] - lse).exp() - if c == y { 1.0 } else { 0.0 }) / n;
            grad_biases[c] += residual;
            for &(col, w) in x.entries() {
                grad_weights[c][col] += residual * w;
            }
        }
    }
    loss /= n;
    let mut penalty = 0.0;
    for (g, w) in grad_weights.iter_mut().zip(&model.weights) {
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi += l2 * wi;
            penalty += wi * wi;
        }
    }
    Objective {
        loss: loss + 0.5 * l2 * penalty,
        grad_weights,
        grad_biases,
    }
}

pub fn train_logreg(
    data: &DesignMatrix,
    params: &LogregParams,
) -> Result<LinearModel, LearnerError> {
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    let mut model = LinearModel::zeros(data.n_classes(), data.n_features(), Link::Softmax);
    for epoch in 1..=params.epochs {
        let obj = logreg_objective(data, &model, params.l2);
        if !obj.loss.is_finite() {
            return Err(LearnerError::NonFinite {
                learner: "logreg",
                epoch,
            });
        }
        for (w, g) in model.weights.iter_mut().zip(&obj.grad_weights) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= params.step * gi;
            }
        }
        for (b, g) in model.biases.iter_mut().zip(&obj.grad_biases) {
            *b -= params.step * g;
        }
    }
    if !model.is_finite() {
        return Err(LearnerError::NonFinite {
            learner: "logreg",
            epoch: params.epochs,
        });
    }
    Ok(model)
}

/// One-vs-rest Pegasos. Runs `epochs * N` steps; step `t` samples a row
/// uniformly and, for every class, shrinks by `1 - 1/t` and adds
/// `y x / (lambda t)` when the margin is below 1. The bias is treated as the
/// weight of a constant feature.
pub fn train_svm(
    data: &DesignMatrix,
    params: &SvmParams,
    seed: u64,
) -> Result<LinearModel, LearnerError> {
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    let (k, v, n) = (data.n_classes(), data.n_features(), data.len());
    // w_c = scale[c] * dir[c]; keeps the per-step shrink O(1)
    let mut dir = vec![vec![0.0; v]; k];
    let mut scale = vec![1.0; k];
    let mut bias = vec![0.0; k];
    let mut rng = rng_from_seed(seed);
    let total = params.epochs * n;
    for t in 1..=total {
        let i = rng.random_range(0..n);
        let (x, label) = (&data.rows()[i], data.labels()[i]);
        let eta = 1.0 / (params.lambda * t as f64);
        let decay = 1.0 - 1.0 / t as f64;
        for c in 0..k {
            let y = if label == c { 1.0 } else { -1.0 };
            let margin = y * (scale[c] * x.dot_dense(&dir[c]) + bias[c]);
            if decay == 0.0 {
                dir[c].iter_mut().for_each(|d| *d = 0.0);
                scale[c] = 1.0;
            } else {
                scale[c] *= decay;
            }
            bias[c] *= decay;
            if margin < 1.0 {
                let step = eta * y / scale[c];
                for &(col, w) in x.entries() {
                    dir[c][col] += step * w;
                }
                bias[c] += eta * y;
            }
            if scale[c] < 1e-9 {
                dir[c].iter_mut().for_each(|d| *d *= scale[c]);
                scale[c] = 1.0;
            }
        }
        if t % n == 0 && !bias.iter().all(|b| b.is_finite()) {
            return Err(LearnerError::NonFinite {
                learner: "svm",
                epoch: t / n,
            });
        }
    }
    let weights = dir
        .into_iter()
        .zip(&scale)
        .map(|(d, &s)| d.into_iter().map(|w| w * s).collect())
        .collect();
    let model = LinearModel::new(weights, bias, Link::Margin);
    if !model.is_finite() {
        return Err(LearnerError::NonFinite {
            learner: "svm",
            epoch: params.epochs,
        });
    }
    Ok(model)
}
