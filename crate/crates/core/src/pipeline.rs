//! End-to-end training and inference: split, rebalance, featurize, select,
//! train, and classify raw text with the frozen result.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{stratified_split, LabelMap, LabeledCorpus};
use crate::features::{
    chi2_scores, design_matrix, fit_feature_space, select_top_k, vectorize, FeatureSpace,
};
use crate::learners::Classifier;
use crate::model::{train_model, ModelSpec, TrainedModel};
use crate::preprocess::{resample, CleaningConfig, ResampleMode, ResampleStrategy, TokenDoc};
use crate::rng::derive_seed;
use crate::Result;

/// A frozen text classifier.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cleaning: CleaningConfig,
    space: FeatureSpace,
    model: TrainedModel,
    label_map: LabelMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: usize,
    pub label: String,
    pub distribution: Vec<f64>,
}

impl Prediction {
    pub fn confidence(&self) -> f64 {
        self.distribution[self.class]
    }

    /// `(label, probability)` pairs sorted by descending probability, then
    /// ascending class index, truncated to `n`.
    pub fn top(&self, label_map: &LabelMap, n: usize) -> Vec<(String, f64)> {
        let mut order: Vec<usize> = (0..self.distribution.len()).collect();
        order.sort_by(|&a, &b| {
            self.distribution[b]
                .total_cmp(&self.distribution[a])
                .then(a.cmp(&b))
        });
        order
            .into_iter()
            .take(n)
            .map(|c| {
                (
                    label_map.name(c).unwrap_or_default().to_string(),
                    self.distribution[c],
                )
            })
            .collect()
    }
}

impl Pipeline {
    pub fn new(
        cleaning: CleaningConfig,
        space: FeatureSpace,
        model: TrainedModel,
        label_map: LabelMap,
    ) -> Self {
        Self {
            cleaning,
            space,
            model,
            label_map,
        }
    }

    pub fn cleaning(&self) -> &CleaningConfig {
        &self.cleaning
    }

    pub fn feature_space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn model(&self) -> &TrainedModel {
        &self.model
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    /// Total: text with no known terms goes through the zero vector.
    pub fn classify(&self, text: &str) -> Prediction {
        let x = vectorize(&self.cleaning.process(text), &self.space);
        let distribution = self.model.predict_distribution(&x);
        let class = self.model.predict(&x);
        Prediction {
            class,
            label: self.label_map.name(class).unwrap_or_default().to_string(),
            distribution,
        }
    }
}

/// Everything that determines a training run apart from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub model: ModelSpec,
    pub split_fraction: f64,
    pub seed: u64,
    pub resample: ResampleMode,
    /// Keep the k highest chi-square terms; `None` keeps the whole vocabulary.
    pub feature_k: Option<usize>,
    pub min_df: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            model: ModelSpec::Base(crate::learners::LearnerSpec::Mnb(Default::default())),
            split_fraction: 0.7,
            seed: 0,
            resample: ResampleMode::None,
            feature_k: None,
            min_df: 1,
        }
    }
}

/// Seed streams derived from the master seed.
const SPLIT_STREAM: u64 = 0;
const RESAMPLE_STREAM: u64 = 1;
const MODEL_STREAM: u64 = 2;

/// The two halves of a seeded split.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: LabeledCorpus,
    pub test: LabeledCorpus,
}

impl Split {
    pub fn new(corpus: &LabeledCorpus, fraction: f64, seed: u64) -> Result<Self> {
        let (train, test) = stratified_split(corpus, fraction, derive_seed(seed, SPLIT_STREAM))?;
        Ok(Self { train, test })
    }

    /// SHA-256 over the test ids, so reports can prove they share a split.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for t in self.test.tickets() {
            h.update((t.id.len() as u64).to_le_bytes());
            h.update(t.id.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

pub struct TrainOutcome {
    pub pipeline: Pipeline,
    pub split: Split,
    /// Training rows after rebalancing.
    pub train_rows: usize,
}

/// split, then [`fit_pipeline`] on the training half.
pub fn train_pipeline(
    corpus: &LabeledCorpus,
    settings: &TrainSettings,
    cleaning: CleaningConfig,
) -> Result<TrainOutcome> {
    settings.model.validate()?;
    let split = Split::new(corpus, settings.split_fraction, settings.seed)?;
    let (pipeline, train_rows) = fit_pipeline(&split.train, settings, cleaning)?;
    Ok(TrainOutcome {
        pipeline,
        split,
        train_rows,
    })
}

/// Rebalance, featurize, select and train on an already-split training set.
/// Returns the pipeline and the number of rows the model saw.
pub fn fit_pipeline(
    train: &LabeledCorpus,
    settings: &TrainSettings,
    cleaning: CleaningConfig,
) -> Result<(Pipeline, usize)> {
    settings.model.validate()?;
    let docs: Vec<(TokenDoc, usize)> = train
        .tickets()
        .iter()
        .zip(train.labels())
        .map(|(t, &l)| (cleaning.process(&t.description), l))
        .collect();
    let strategy = ResampleStrategy {
        mode: settings.resample,
        seed: derive_seed(settings.seed, RESAMPLE_STREAM),
    };
    let (docs, labels): (Vec<TokenDoc>, Vec<usize>) =
        resample(&docs, &strategy).into_iter().unzip();
    let n_classes = train.n_classes();
    let mut space = fit_feature_space(&docs, settings.min_df)?;
    if let Some(k) = settings.feature_k {
        let scores = chi2_scores(&docs, &labels, &space, n_classes)?;
        space = select_top_k(&space, &scores, k)?;
    }
    let data = design_matrix(&docs, &labels, &space, n_classes)?;
    let model = train_model(
        &settings.model,
        &data,
        derive_seed(settings.seed, MODEL_STREAM),
    )?;
    let rows = data.len();
    Ok((
        Pipeline::new(cleaning, space, model, train.label_map().clone()),
        rows,
    ))
}
