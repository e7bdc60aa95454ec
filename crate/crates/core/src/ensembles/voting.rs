use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::VoteMode;
use crate::features::{DesignMatrix, SparseVector};
use crate::learners::{train_learner, Classifier, KnnParams, LearnerError, LearnerSpec};
use crate::learners::{LogregParams, MnbParams, SvmParams};
use crate::model::TrainedModel;
use crate::rng::derive_seed;

/// Heterogeneous members trained on the full data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingModel {
    members: Vec<TrainedModel>,
    mode: VoteMode,
    n_classes: usize,
    n_features: usize,
}

/// Logistic regression, 5-NN, multinomial NB and a linear SVM.
pub fn default_members() -> Vec<LearnerSpec> {
    vec![
        LearnerSpec::Logreg(LogregParams::default()),
        LearnerSpec::Knn(KnnParams { k: 5 }),
        LearnerSpec::Mnb(MnbParams::default()),
        LearnerSpec::Svm(SvmParams::default()),
    ]
}

pub fn train_voting(
    specs: &[LearnerSpec],
    data: &DesignMatrix,
    mode: VoteMode,
    seed: u64,
) -> Result<VotingModel, LearnerError> {
    if specs.len() < 2 {
        return Err(LearnerError::TooFewMembers(specs.len()));
    }
    let members = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| train_learner(spec, data, None, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    VotingModel::from_members(members, mode)
}

/// Argmax of the mean distribution.
pub fn soft_vote(distributions: &[Vec<f64>]) -> usize {
    crate::argmax(&mean(distributions))
}

/// Plurality of member argmaxes. Ties go to the tied class with the highest
/// mean probability, then to the lower class index.
pub fn hard_vote(distributions: &[Vec<f64>]) -> usize {
    let k = distributions[0].len();
    let mut counts = vec![0usize; k];
    for d in distributions {
        counts[crate::argmax(d)] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&0);
    let avg = mean(distributions);
    let mut best: Option<usize> = None;
    for c in (0..k).filter(|&c| counts[c] == top) {
        if best.is_none_or(|b| avg[c] > avg[b]) {
            best = Some(c);
        }
    }
    best.unwrap_or(0)
}

fn mean(distributions: &[Vec<f64>]) -> Vec<f64> {
    let k = distributions[0].len();
    let mut acc = vec![0.0; k];
    for d in distributions {
        for (a, p) in acc.iter_mut().zip(d) {
            *a += p;
        }
    }
    let n = distributions.len() as f64;
    acc.into_iter().map(|a| a / n).collect()
}

impl VotingModel {
    pub fn from_members(members: Vec<TrainedModel>, mode: VoteMode) -> Result<Self, LearnerError> {
        if members.len() < 2 {
            return Err(LearnerError::TooFewMembers(members.len()));
        }
        let n_classes = members[0].n_classes();
        let n_features = members[0].n_features();
        if members
            .iter()
            .any(|m| m.n_classes() != n_classes || m.n_features() != n_features)
        {
            return Err(LearnerError::BadParam(
                "voting members disagree on shape".into(),
            ));
        }
        Ok(Self {
            members,
            mode,
            n_classes,
            n_features,
        })
    }

    pub fn members(&self) -> &[TrainedModel] {
        &self.members
    }

    pub fn mode(&self) -> VoteMode {
        self.mode
    }

    pub fn member_distributions(&self, x: &SparseVector) -> Vec<Vec<f64>> {
        self.members
            .iter()
            .map(|m| m.predict_distribution(x))
            .collect()
    }
}

impl Classifier for VotingModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Soft: mean member distribution. Hard: share of member argmaxes.
    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        let dists = self.member_distributions(x);
        match self.mode {
            VoteMode::Soft => mean(&dists),
            VoteMode::Hard => {
                let mut share = vec![0.0; self.n_classes];
                for d in &dists {
                    share[crate::argmax(d)] += 1.0;
                }
                let n = dists.len() as f64;
                share.into_iter().map(|s| s / n).collect()
            }
        }
    }

    fn predict(&self, x: &SparseVector) -> usize {
        let dists = self.member_distributions(x);
        match self.mode {
            VoteMode::Soft => soft_vote(&dists),
            VoteMode::Hard => hard_vote(&dists),
        }
    }
}
