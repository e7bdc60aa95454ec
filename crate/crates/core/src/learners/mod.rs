//! Base learners: multinomial naive Bayes, logistic regression, linear SVM,
//! k-nearest neighbours, CART trees and decision stumps.
//!
//! All of them implement [`Classifier`], which fixes the shared prediction
//! contract: a probability vector over the K classes, with `predict` equal to
//! its argmax (ties to the lower class index).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{DesignMatrix, SparseVector};
use crate::model::TrainedModel;

pub mod knn;
pub mod linear;
pub mod mnb;
pub mod tree;

pub use knn::{train_knn, KnnModel};
pub use linear::{logreg_objective, train_logreg, train_svm, LinearModel, Link};
pub use mnb::{train_mnb, MnbModel};
pub use tree::{train_tree, Node, TreeModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("invalid hyperparameter: {0}")]
    BadParam(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("{learner}: non-finite loss at epoch {epoch}")]
    NonFinite { learner: &'static str, epoch: usize },
    #[error("query has column {column} but the model expects {expected} features")]
    DimensionMismatch { expected: usize, column: usize },
    #[error("instance weights: {0}")]
    BadWeights(String),
    #[error("weak learner no better than chance (weighted error {error:.6} >= {ceiling:.6})")]
    WeakLearnerTooWeak { error: f64, ceiling: f64 },
    #[error("voting needs at least 2 members, got {0}")]
    TooFewMembers(usize),
}

/// Uniform prediction contract shared by every learner and ensemble.
pub trait Classifier {
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;

    /// Nonnegative, sums to one. Callers guarantee the query fits the model
    /// dimension; [`checked_distribution`] does the check.
    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64>;

    fn predict(&self, x: &SparseVector) -> usize {
        crate::argmax(&self.predict_distribution(x))
    }
}

/// [`Classifier::predict_distribution`] with a dimension check.
pub fn checked_distribution<C: Classifier + ?Sized>(
    model: &C,
    x: &SparseVector,
) -> Result<Vec<f64>, LearnerError> {
    if x.dim_hint() > model.n_features() {
        return Err(LearnerError::DimensionMismatch {
            expected: model.n_features(),
            column: x.dim_hint() - 1,
        });
    }
    Ok(model.predict_distribution(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MnbParams {
    pub alpha: f64,
}

impl Default for MnbParams {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogregParams {
    pub step: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        Self {
            step: 0.1,
            epochs: 200,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// CART settings. `None` means unlimited depth / all features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_split: 2,
            max_features: None,
        }
    }
}

impl TreeParams {
    pub fn stump() -> Self {
        Self {
            max_depth: Some(1),
            ..Self::default()
        }
    }
}

/// Which base learner to train and with what hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerSpec {
    Mnb(MnbParams),
    Logreg(LogregParams),
    Svm(SvmParams),
    Knn(KnnParams),
    Dtree(TreeParams),
    Stump,
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mnb(_) => "mnb",
            Self::Logreg(_) => "logreg",
            Self::Svm(_) => "svm",
            Self::Knn(_) => "knn",
            Self::Dtree(_) => "dtree",
            Self::Stump => "stump",
        }
    }

    /// Default spec for a learner name.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "mnb" => Self::Mnb(MnbParams::default()),
            "logreg" => Self::Logreg(LogregParams::default()),
            "svm" => Self::Svm(SvmParams::default()),
            "knn" => Self::Knn(KnnParams::default()),
            "dtree" => Self::Dtree(TreeParams::default()),
            "stump" => Self::Stump,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: String| Err(LearnerError::BadParam(m));
        match *self {
            Self::Mnb(p) if !(p.alpha > 0.0 && p.alpha.is_finite()) => {
                bad(format!("mnb alpha must be > 0, got {}", p.alpha))
            }
            Self::Logreg(p) if !(p.step > 0.0 && p.step.is_finite()) => {
                bad(format!("logreg step must be > 0, got {}", p.step))
            }
            Self::Logreg(p) if p.epochs == 0 => bad("logreg epochs must be >= 1".into()),
            Self::Logreg(p) if !(p.l2 >= 0.0 && p.l2.is_finite()) => {
                bad(format!("logreg l2 must be >= 0, got {}", p.l2))
            }
            Self::Svm(p) if !(p.lambda > 0.0 && p.lambda.is_finite()) => {
                bad(format!("svm lambda must be > 0, got {}", p.lambda))
            }
            Self::Svm(p) if p.epochs == 0 => bad("svm epochs must be >= 1".into()),
            Self::Knn(p) if p.k == 0 => bad("knn k must be >= 1".into()),
            Self::Dtree(p) if p.min_split < 2 => {
                bad(format!("dtree min_split must be >= 2, got {}", p.min_split))
            }
            Self::Dtree(p) if p.max_depth == Some(0) => bad("dtree max_depth must be >= 1".into()),
            Self::Dtree(p) if p.max_features == Some(0) => {
                bad("dtree max_features must be >= 1".into())
            }
            _ => Ok(()),
        }
    }
}

/// Trains one base learner. `weights` is honoured by tree learners only.
pub fn train_learner(
    spec: &LearnerSpec,
    data: &DesignMatrix,
    weights: Option<&[f64]>,
    seed: u64,
) -> Result<TrainedModel, LearnerError> {
    spec.validate()?;
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    Ok(match *spec {
        LearnerSpec::Mnb(p) => TrainedModel::Mnb(train_mnb(data, p.alpha)?),
        LearnerSpec::Logreg(p) => TrainedModel::Logreg(train_logreg(data, &p)?),
        LearnerSpec::Svm(p) => TrainedModel::Svm(train_svm(data, &p, seed)?),
        LearnerSpec::Knn(p) => TrainedModel::Knn(train_knn(data, p.k)?),
        LearnerSpec::Dtree(p) => TrainedModel::Dtree(train_tree(data, weights, &p, seed)?),
        LearnerSpec::Stump => {
            TrainedModel::Stump(train_tree(data, weights, &TreeParams::stump(), seed)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        assert_eq!(MnbParams::default().alpha, 1.0);
        assert_eq!(KnnParams::default().k, 5);
        let lr = LogregParams::default();
        assert_eq!((lr.step, lr.epochs, lr.l2), (0.1, 200, 1e-4));
        let svm = SvmParams::default();
        assert_eq!((svm.lambda, svm.epochs), (1e-4, 20));
        assert_eq!(TreeParams::default().min_split, 2);
        assert_eq!(TreeParams::stump().max_depth, Some(1));
    }

    #[test]
    fn validation_rejects_bad_values() {
        assert!(LearnerSpec::Mnb(MnbParams { alpha: 0.0 })
            .validate()
            .is_err());
        assert!(LearnerSpec::Knn(KnnParams { k: 0 }).validate().is_err());
        assert!(LearnerSpec::Dtree(TreeParams {
            min_split: 1,
            ..Default::default()
        })
        .validate()
        .is_err());
        for name in ["mnb", "logreg", "svm", "knn", "dtree", "stump"] {
            let spec = LearnerSpec::from_name(name).unwrap();
            assert_eq!(spec.name(), name);
            assert!(spec.validate().is_ok());
        }
    }

    #[test]
    fn spec_serializes_with_tag() {
        let s = serde_json::to_string(&LearnerSpec::Knn(KnnParams { k: 3 })).unwrap();
        assert_eq!(s, r#"{"learner":"knn","k":3}"#);
        let back: LearnerSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, LearnerSpec::Knn(KnnParams { k: 3 }));
    }
}
