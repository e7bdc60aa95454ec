//! Bagging (including random forests), SAMME boosting over decision stumps,
//! and soft/hard voting over heterogeneous learners.

use serde::{Deserialize, Serialize};

pub mod adaboost;
pub mod bagging;
pub mod voting;

pub use adaboost::{samme_alpha, train_adaboost, train_adaboost_traced, AdaBoostModel, BoostTrace};
pub use bagging::{train_bagging, train_random_forest, BaggingModel, BaggingParams, Execution};
pub use voting::{hard_vote, soft_vote, train_voting, VotingModel};

pub const DEFAULT_BAGGING_ESTIMATORS: usize = 25;
pub const DEFAULT_FOREST_ESTIMATORS: usize = 100;
pub const DEFAULT_BOOSTING_ROUNDS: usize = 100;

/// How member outputs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    /// Plurality of member predictions.
    Hard,
    /// Argmax of the mean member distribution.
    Soft,
}

impl std::str::FromStr for VoteMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hard" => Ok(Self::Hard),
            "soft" => Ok(Self::Soft),
            other => Err(format!(
                "unknown vote mode '{other}' (expected hard or soft)"
            )),
        }
    }
}

impl std::fmt::Display for VoteMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Hard => "hard",
            Self::Soft => "soft",
        })
    }
}
