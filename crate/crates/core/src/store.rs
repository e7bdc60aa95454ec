//! Versioned single-file model store.
//!
//! An artifact is one UTF-8 JSON document with keys sorted at every level,
//! so identical pipelines serialize to identical bytes. Floats use the
//! shortest representation that parses back to the same bits.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::LabelMap;
use crate::features::FeatureSpace;
use crate::learners::Classifier;
use crate::model::{ModelKind, ModelSpec, TrainedModel};
use crate::pipeline::Pipeline;
use crate::preprocess::{CleaningConfig, CleaningSummary, Stopwords};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {error}")]
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
    #[error("corrupt artifact: {0}")]
    Corrupt(String),
    #[error("unknown artifact format version {found} (this build reads version {supported})")]
    UnknownVersion { found: u64, supported: u64 },
    #[error("unknown model kind '{0}'")]
    UnknownModelKind(String),
    #[error("inconsistent artifact: {0}")]
    Invalid(String),
}

/// What produced an artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingFingerprint {
    pub seed: u64,
    pub spec: ModelSpec,
    /// Rows in the ingested corpus.
    pub rows: usize,
    /// Rows the model was fitted on, after splitting and rebalancing.
    pub train_rows: usize,
    pub data_hash: String,
    pub created: String,
}

impl TrainingFingerprint {
    /// Compact canonical rendering, stable across save/load.
    pub fn render(&self) -> String {
        canonical_json(self, false).expect("fingerprint serializes")
    }

    /// SHA-256 of [`render`](Self::render), hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineArtifact {
    pub format_version: u64,
    pub cleaning: CleaningSummary,
    pub feature_space: FeatureSpace,
    pub model: TrainedModel,
    pub label_map: LabelMap,
    pub training_fingerprint: TrainingFingerprint,
}

/// A loaded artifact plus anything the caller should be told about it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub artifact: PipelineArtifact,
    pub warnings: Vec<String>,
}

impl PipelineArtifact {
    pub fn from_pipeline(pipeline: &Pipeline, fingerprint: TrainingFingerprint) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            cleaning: pipeline.cleaning().summary(),
            feature_space: pipeline.feature_space().clone(),
            model: pipeline.model().clone(),
            label_map: pipeline.label_map().clone(),
            training_fingerprint: fingerprint,
        }
    }

    /// Rebuilds the pipeline using `stopwords` for cleaning. Returns a warning
    /// when the list differs from the one used at training time.
    pub fn into_pipeline_with(
        self,
        stopwords: Stopwords,
    ) -> Result<(Pipeline, Option<String>), StoreError> {
        let warning = (stopwords.hash() != self.cleaning.stopwords_hash).then(|| {
            format!(
                "stopword list drift: artifact was trained with {} ({}), cleaning with {} ({})",
                self.cleaning.stopwords_version,
                short(&self.cleaning.stopwords_hash),
                stopwords.version(),
                short(stopwords.hash())
            )
        });
        let cleaning = CleaningConfig::from_summary(&self.cleaning, stopwords)
            .map_err(|e| StoreError::Invalid(format!("cleaning pattern: {e}")))?;
        Ok((
            Pipeline::new(cleaning, self.feature_space, self.model, self.label_map),
            warning,
        ))
    }

    /// [`into_pipeline_with`](Self::into_pipeline_with) using the built-in list.
    pub fn into_pipeline(self) -> Result<(Pipeline, Option<String>), StoreError> {
        self.into_pipeline_with(Stopwords::builtin())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, StoreError> {
        let mut s = canonical_json(self, true).map_err(|e| StoreError::Invalid(e.to_string()))?;
        s.push('\n');
        Ok(s.into_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        let value: Value =
            serde_json::from_slice(bytes).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        let found = value
            .get("format_version")
            .ok_or_else(|| StoreError::Corrupt("missing format_version".into()))?
            .as_u64()
            .ok_or_else(|| {
                StoreError::Corrupt("format_version is not an unsigned integer".into())
            })?;
        if found != FORMAT_VERSION {
            return Err(StoreError::UnknownVersion {
                found,
                supported: FORMAT_VERSION,
            });
        }
        check_kinds(
            value
                .get("model")
                .ok_or_else(|| StoreError::Corrupt("missing model".into()))?,
        )?;
        let mut artifact: Self =
            serde_json::from_value(value).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        artifact.feature_space.reindex();
        artifact.validate()?;
        Ok(artifact)
    }

    fn validate(&self) -> Result<(), StoreError> {
        self.feature_space.validate().map_err(StoreError::Invalid)?;
        if self.model.n_features() != self.feature_space.n_features() {
            return Err(StoreError::Invalid(format!(
                "model expects {} features, feature space provides {}",
                self.model.n_features(),
                self.feature_space.n_features()
            )));
        }
        if self.model.n_classes() != self.label_map.len() {
            return Err(StoreError::Invalid(format!(
                "model has {} classes, label map has {}",
                self.model.n_classes(),
                self.label_map.len()
            )));
        }
        Ok(())
    }
}

fn short(hash: &str) -> &str {
    &hash[..hash.len().min(12)]
}

/// Serializes through `serde_json::Value`, whose maps are ordered by key.
fn canonical_json<T: Serialize>(value: &T, pretty: bool) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    if pretty {
        serde_json::to_string_pretty(&v)
    } else {
        serde_json::to_string(&v)
    }
}

/// Rejects unknown `kind` tags before serde reports a less useful error.
fn check_kinds(model: &Value) -> Result<(), StoreError> {
    let kind = model
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| StoreError::Corrupt("model has no kind tag".into()))?;
    let kind =
        ModelKind::from_tag(kind).ok_or_else(|| StoreError::UnknownModelKind(kind.to_string()))?;
    if matches!(
        kind,
        ModelKind::Bagging | ModelKind::RandomForest | ModelKind::Voting
    ) {
        if let Some(members) = model.get("members").and_then(Value::as_array) {
            members.iter().try_for_each(check_kinds)?;
        }
    }
    Ok(())
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written artifact.
pub fn save(artifact: &PipelineArtifact, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    let io = |source| StoreError::Io {
        path: path.to_path_buf(),
        error: source,
    };
    let bytes = artifact.to_bytes()?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn load(path: impl AsRef<Path>) -> Result<PipelineArtifact, StoreError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        error: source,
    })?;
    PipelineArtifact::from_bytes(&bytes)
}

/// Loads an artifact and rebuilds its pipeline with the built-in stopwords,
/// surfacing a drift warning if the lists differ.
pub fn load_pipeline(path: impl AsRef<Path>) -> Result<(Pipeline, Loaded), StoreError> {
    let artifact = load(path)?;
    let (pipeline, warning) = artifact.clone().into_pipeline()?;
    Ok((
        pipeline,
        Loaded {
            artifact,
            warnings: warning.into_iter().collect(),
        },
    ))
}
