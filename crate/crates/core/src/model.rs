//! The trained-model union and the [`ModelSpec`] that produces it.

use serde::{Deserialize, Serialize};

use crate::ensembles::voting::default_members;
use crate::ensembles::{
    train_adaboost, train_bagging, train_random_forest, train_voting, AdaBoostModel, BaggingModel,
    BaggingParams, VoteMode, VotingModel, DEFAULT_BAGGING_ESTIMATORS, DEFAULT_BOOSTING_ROUNDS,
    DEFAULT_FOREST_ESTIMATORS,
};
use crate::features::{DesignMatrix, SparseVector};
use crate::learners::{
    train_learner, Classifier, KnnModel, LearnerError, LearnerSpec, LinearModel, MnbModel,
    TreeModel,
};

/// Every model the system can train, tagged by `kind` when serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Mnb(MnbModel),
    Logreg(LinearModel),
    Svm(LinearModel),
    Knn(KnnModel),
    Dtree(TreeModel),
    Stump(TreeModel),
    Bagging(BaggingModel),
    RandomForest(BaggingModel),
    Adaboost(AdaBoostModel),
    Voting(VotingModel),
}

/// Tag-only view of [`TrainedModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mnb,
    Logreg,
    Svm,
    Knn,
    Dtree,
    Stump,
    Bagging,
    RandomForest,
    Adaboost,
    Voting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        Self::Mnb,
        Self::Logreg,
        Self::Svm,
        Self::Knn,
        Self::Dtree,
        Self::Stump,
        Self::Bagging,
        Self::RandomForest,
        Self::Adaboost,
        Self::Voting,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Mnb => "mnb",
            Self::Logreg => "logreg",
            Self::Svm => "svm",
            Self::Knn => "knn",
            Self::Dtree => "dtree",
            Self::Stump => "stump",
            Self::Bagging => "bagging",
            Self::RandomForest => "random_forest",
            Self::Adaboost => "adaboost",
            Self::Voting => "voting",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Spec with default hyperparameters for this kind.
    pub fn default_spec(self) -> ModelSpec {
        match self {
            Self::Bagging => ModelSpec::Bagging {
                base: LearnerSpec::from_name("dtree").expect("builtin learner"),
                n_estimators: DEFAULT_BAGGING_ESTIMATORS,
                vote: VoteMode::Hard,
            },
            Self::RandomForest => ModelSpec::RandomForest {
                n_estimators: DEFAULT_FOREST_ESTIMATORS,
            },
            Self::Adaboost => ModelSpec::Adaboost {
                n_rounds: DEFAULT_BOOSTING_ROUNDS,
            },
            Self::Voting => ModelSpec::Voting {
                members: default_members(),
                mode: VoteMode::Soft,
            },
            base => ModelSpec::Base(LearnerSpec::from_name(base.tag()).expect("builtin learner")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// What to train: a single learner or an ensemble over learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Base(LearnerSpec),
    Bagging {
        base: LearnerSpec,
        n_estimators: usize,
        vote: VoteMode,
    },
    RandomForest {
        n_estimators: usize,
    },
    Adaboost {
        n_rounds: usize,
    },
    Voting {
        members: Vec<LearnerSpec>,
        mode: VoteMode,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Base(l) => ModelKind::from_tag(l.name()).expect("learner names are model kinds"),
            Self::Bagging { .. } => ModelKind::Bagging,
            Self::RandomForest { .. } => ModelKind::RandomForest,
            Self::Adaboost { .. } => ModelKind::Adaboost,
            Self::Voting { .. } => ModelKind::Voting,
        }
    }

    /// Checks hyperparameters without touching data.
    pub fn validate(&self) -> Result<(), LearnerError> {
        match self {
            Self::Base(l) => l.validate(),
            Self::Bagging {
                base, n_estimators, ..
            } => {
                if *n_estimators == 0 {
                    return Err(LearnerError::BadParam("n_estimators must be >= 1".into()));
                }
                base.validate()
            }
            Self::RandomForest { n_estimators } if *n_estimators == 0 => {
                Err(LearnerError::BadParam("n_estimators must be >= 1".into()))
            }
            Self::Adaboost { n_rounds } if *n_rounds == 0 => {
                Err(LearnerError::BadParam("n_rounds must be >= 1".into()))
            }
            Self::Voting { members, .. } => {
                if members.len() < 2 {
                    return Err(LearnerError::TooFewMembers(members.len()));
                }
                members.iter().try_for_each(LearnerSpec::validate)
            }
            _ => Ok(()),
        }
    }
}

pub fn train_model(
    spec: &ModelSpec,
    data: &DesignMatrix,
    seed: u64,
) -> Result<TrainedModel, LearnerError> {
    spec.validate()?;
    Ok(match spec {
        ModelSpec::Base(l) => train_learner(l, data, None, seed)?,
        ModelSpec::Bagging {
            base,
            n_estimators,
            vote,
        } => TrainedModel::Bagging(train_bagging(
            base,
            data,
            &BaggingParams {
                n_estimators: *n_estimators,
                vote: *vote,
            },
            seed,
        )?),
        ModelSpec::RandomForest { n_estimators } => {
            TrainedModel::RandomForest(train_random_forest(data, *n_estimators, seed)?)
        }
        ModelSpec::Adaboost { n_rounds } => {
            TrainedModel::Adaboost(train_adaboost(data, *n_rounds, seed)?)
        }
        ModelSpec::Voting { members, mode } => {
            TrainedModel::Voting(train_voting(members, data, *mode, seed)?)
        }
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Mnb(_) => ModelKind::Mnb,
            Self::Logreg(_) => ModelKind::Logreg,
            Self::Svm(_) => ModelKind::Svm,
            Self::Knn(_) => ModelKind::Knn,
            Self::Dtree(_) => ModelKind::Dtree,
            Self::Stump(_) => ModelKind::Stump,
            Self::Bagging(_) => ModelKind::Bagging,
            Self::RandomForest(_) => ModelKind::RandomForest,
            Self::Adaboost(_) => ModelKind::Adaboost,
            Self::Voting(_) => ModelKind::Voting,
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Self::Mnb(m) => m,
            Self::Logreg(m) | Self::Svm(m) => m,
            Self::Knn(m) => m,
            Self::Dtree(m) | Self::Stump(m) => m,
            Self::Bagging(m) | Self::RandomForest(m) => m,
            Self::Adaboost(m) => m,
            Self::Voting(m) => m,
        }
    }
}

impl Classifier for TrainedModel {
    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        self.inner().predict_distribution(x)
    }

    fn predict(&self, x: &SparseVector) -> usize {
        self.inner().predict(x)
    }
}
