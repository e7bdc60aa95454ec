use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{VoteMode, DEFAULT_BAGGING_ESTIMATORS};
use crate::features::{DesignMatrix, SparseVector};
use crate::learners::{train_learner, Classifier, LearnerError, LearnerSpec, TreeParams};
use crate::model::TrainedModel;
use crate::rng::{derive_seed, rng_from_seed, splitmix64};

/// Homogeneous members, each trained on its own bootstrap sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    members: Vec<TrainedModel>,
    member_seeds: Vec<u64>,
    vote: VoteMode,
    n_classes: usize,
    n_features: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub n_estimators: usize,
    pub vote: VoteMode,
}

impl Default for BaggingParams {
    fn default() -> Self {
        Self {
            n_estimators: DEFAULT_BAGGING_ESTIMATORS,
            vote: VoteMode::Hard,
        }
    }
}

/// Whether independent members train on the rayon pool or one by one.
/// Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

pub fn train_bagging(
    spec: &LearnerSpec,
    data: &DesignMatrix,
    params: &BaggingParams,
    seed: u64,
) -> Result<BaggingModel, LearnerError> {
    train_bagging_with(spec, data, params, seed, Execution::Parallel)
}

pub fn train_bagging_with(
    spec: &LearnerSpec,
    data: &DesignMatrix,
    params: &BaggingParams,
    seed: u64,
    execution: Execution,
) -> Result<BaggingModel, LearnerError> {
    if params.n_estimators == 0 {
        return Err(LearnerError::BadParam("n_estimators must be >= 1".into()));
    }
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    spec.validate()?;
    let member_seeds: Vec<u64> = (0..params.n_estimators as u64)
        .map(|i| derive_seed(seed, i))
        .collect();
    let train_one = |&member_seed: &u64| {
        let mut rng = rng_from_seed(member_seed);
        let n = data.len();
        let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        train_learner(spec, &data.select(&sample), None, splitmix64(member_seed))
    };
    let members = match execution {
        Execution::Parallel => member_seeds
            .par_iter()
            .map(train_one)
            .collect::<Result<Vec<_>, _>>()?,
        Execution::Sequential => member_seeds
            .iter()
            .map(train_one)
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(BaggingModel {
        members,
        member_seeds,
        vote: params.vote,
        n_classes: data.n_classes(),
        n_features: data.n_features(),
    })
}

/// Features tried per split in a forest: floor(sqrt(V)), at least 1.
pub fn forest_max_features(n_features: usize) -> usize {
    ((n_features as f64).sqrt().floor() as usize).max(1)
}

/// Bagged unlimited-depth trees that sample floor(sqrt(V)) features per split.
pub fn train_random_forest(
    data: &DesignMatrix,
    n_estimators: usize,
    seed: u64,
) -> Result<BaggingModel, LearnerError> {
    let spec = LearnerSpec::Dtree(TreeParams {
        max_features: Some(forest_max_features(data.n_features())),
        ..TreeParams::default()
    });
    train_bagging(
        &spec,
        data,
        &BaggingParams {
            n_estimators,
            vote: VoteMode::Hard,
        },
        seed,
    )
}

impl BaggingModel {
    pub fn members(&self) -> &[TrainedModel] {
        &self.members
    }

    pub fn member_seeds(&self) -> &[u64] {
        &self.member_seeds
    }

    pub fn vote(&self) -> VoteMode {
        self.vote
    }
}

impl Classifier for BaggingModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Hard: share of member predictions per class. Soft: mean distribution.
    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for m in &self.members {
            match self.vote {
                VoteMode::Hard => acc[m.predict(x)] += 1.0,
                VoteMode::Soft => {
                    for (a, p) in acc.iter_mut().zip(m.predict_distribution(x)) {
                        *a += p;
                    }
                }
            }
        }
        let n = self.members.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}
