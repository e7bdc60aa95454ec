//! Multiclass AdaBoost (SAMME) over weighted decision stumps.

use serde::{Deserialize, Serialize};

use crate::features::{DesignMatrix, SparseVector};
use crate::learners::{train_tree, Classifier, LearnerError, TreeModel, TreeParams};
use crate::rng::derive_seed;

/// Lower clamp on the weighted error of a perfect stump.
pub const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    members: Vec<TreeModel>,
    alphas: Vec<f64>,
    n_classes: usize,
    n_features: usize,
}

/// Per-round diagnostics from [`train_adaboost_traced`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoostTrace {
    /// Weighted training error of each accepted stump (before clamping).
    pub errors: Vec<f64>,
    /// Sum of instance weights after each accepted round's renormalization.
    pub weight_sums: Vec<f64>,
    /// Error of the stump that triggered the stop rule, if any.
    pub rejected_error: Option<f64>,
}

/// SAMME stage weight: ln((1 - err) / err) + ln(K - 1).
pub fn samme_alpha(err: f64, n_classes: usize) -> f64 {
    ((1.0 - err) / err).ln() + ((n_classes - 1) as f64).ln()
}

pub fn train_adaboost(
    data: &DesignMatrix,
    n_rounds: usize,
    seed: u64,
) -> Result<AdaBoostModel, LearnerError> {
    train_adaboost_traced(data, n_rounds, seed).map(|(m, _)| m)
}

pub fn train_adaboost_traced(
    data: &DesignMatrix,
    n_rounds: usize,
    seed: u64,
) -> Result<(AdaBoostModel, BoostTrace), LearnerError> {
    if n_rounds == 0 {
        return Err(LearnerError::BadParam("n_rounds must be >= 1".into()));
    }
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    let k = data.n_classes();
    let ceiling = 1.0 - 1.0 / k as f64;
    let n = data.len();
    let mut weights = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut alphas = Vec::new();
    let mut trace = BoostTrace::default();
    for round in 0..n_rounds {
        let stump = train_tree(
            data,
            Some(&weights),
            &TreeParams::stump(),
            derive_seed(seed, round as u64),
        )?;
        let wrong: Vec<bool> = data
            .rows()
            .iter()
            .zip(data.labels())
            .map(|(x, &y)| stump.predict(x) != y)
            .collect();
        let err: f64 = weights
            .iter()
            .zip(&wrong)
            .filter(|(_, &w)| w)
            .map(|(wt, _)| wt)
            .sum();
        if err >= ceiling {
            trace.rejected_error = Some(err);
            break;
        }
        let alpha = samme_alpha(err.max(MIN_ERROR), k);
        let boost = alpha.exp();
        for (w, &miss) in weights.iter_mut().zip(&wrong) {
            if miss {
                *w *= boost;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        trace.errors.push(err);
        trace.weight_sums.push(weights.iter().sum());
        members.push(stump);
        alphas.push(alpha);
    }
    if members.is_empty() {
        return Err(LearnerError::WeakLearnerTooWeak {
            error: trace.rejected_error.unwrap_or(f64::NAN),
            ceiling,
        });
    }
    Ok((
        AdaBoostModel {
            members,
            alphas,
            n_classes: k,
            n_features: data.n_features(),
        },
        trace,
    ))
}

impl AdaBoostModel {
    pub fn members(&self) -> &[TreeModel] {
        &self.members
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Stage-weighted votes per class.
    pub fn votes(&self, x: &SparseVector) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for (m, a) in self.members.iter().zip(&self.alphas) {
            votes[m.predict(x)] += a;
        }
        votes
    }
}

impl Classifier for AdaBoostModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Votes normalized by the total stage weight.
    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        let total: f64 = self.alphas.iter().sum();
        self.votes(x).into_iter().map(|v| v / total).collect()
    }
}
