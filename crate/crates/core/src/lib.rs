//! Ticket classification engine.
//!
//! The crate covers the full path from raw helpdesk ticket text to a routed
//! category: ingestion and stratified splitting ([`corpus`]), text cleaning
//! and class rebalancing ([`preprocess`]), TF-IDF features with chi-square
//! selection ([`features`]), six base learners ([`learners`]), bagging,
//! boosting and voting ensembles ([`ensembles`]), metrics ([`evaluate`]) and
//! a versioned model store ([`store`]). [`pipeline`] ties them together.

pub mod corpus;
pub mod ensembles;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod learners;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
pub use model::{ModelKind, ModelSpec, TrainedModel};
pub use pipeline::{Pipeline, Prediction};

/// Index of the largest value; ties go to the lower index.
///
/// Every learner and ensemble uses this rule so predictions are reproducible.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax. Entries equal to `-inf` map to zero.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // all -inf (or empty): fall back to uniform
        let n = scores.len().max(1) as f64;
        return vec![1.0 / n; scores.len()];
    }
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
