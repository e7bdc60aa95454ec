//! Flat `key = value` run configuration with dotted keys.
//!
//! ```text
//! # comments start with '#'
//! model.kind = bagging
//! model.base = svm
//! model.n_estimators = 25
//! learner.svm.lambda = 0.0001
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use triage_core::corpus::CsvOptions;
use triage_core::ensembles::voting::default_members;
use triage_core::ensembles::{
    VoteMode, DEFAULT_BAGGING_ESTIMATORS, DEFAULT_BOOSTING_ROUNDS, DEFAULT_FOREST_ESTIMATORS,
};
use triage_core::learners::{
    KnnParams, LearnerSpec, LogregParams, MnbParams, SvmParams, TreeParams,
};
use triage_core::pipeline::TrainSettings;
use triage_core::preprocess::{ResampleMode, DEFAULT_MIN_TOKEN_LENGTH};
use triage_core::{ModelKind, ModelSpec};

/// Hyperparameters for every learner, whether or not it ends up used.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearnerParams {
    pub mnb: MnbParams,
    pub logreg: LogregParams,
    pub svm: SvmParams,
    pub knn: KnnParams,
    pub dtree: TreeParams,
}

impl LearnerParams {
    pub fn spec(&self, name: &str) -> Result<LearnerSpec> {
        Ok(match name {
            "mnb" => LearnerSpec::Mnb(self.mnb),
            "logreg" => LearnerSpec::Logreg(self.logreg),
            "svm" => LearnerSpec::Svm(self.svm),
            "knn" => LearnerSpec::Knn(self.knn),
            "dtree" => LearnerSpec::Dtree(self.dtree),
            "stump" => LearnerSpec::Stump,
            other => {
                bail!("unknown learner '{other}' (expected mnb, logreg, svm, knn, dtree or stump)")
            }
        })
    }

    fn set(&mut self, learner: &str, param: &str, value: &str) -> Result<()> {
        match (learner, param) {
            ("mnb", "alpha") => self.mnb.alpha = parse(value)?,
            ("logreg", "step") => self.logreg.step = parse(value)?,
            ("logreg", "epochs") => self.logreg.epochs = parse(value)?,
            ("logreg", "l2") => self.logreg.l2 = parse(value)?,
            ("svm", "lambda") => self.svm.lambda = parse(value)?,
            ("svm", "epochs") => self.svm.epochs = parse(value)?,
            ("knn", "k") => self.knn.k = parse(value)?,
            ("dtree", "max_depth") => self.dtree.max_depth = parse_optional(value)?,
            ("dtree", "min_split") => self.dtree.min_split = parse(value)?,
            ("dtree", "max_features") => self.dtree.max_features = parse_optional(value)?,
            _ => bail!("unknown parameter '{param}' for learner '{learner}'"),
        }
        Ok(())
    }

    fn echo(&self, out: &mut BTreeMap<String, String>) {
        let mut put = |k: &str, v: String| {
            out.insert(format!("learner.{k}"), v);
        };
        put("mnb.alpha", self.mnb.alpha.to_string());
        put("logreg.step", self.logreg.step.to_string());
        put("logreg.epochs", self.logreg.epochs.to_string());
        put("logreg.l2", self.logreg.l2.to_string());
        put("svm.lambda", self.svm.lambda.to_string());
        put("svm.epochs", self.svm.epochs.to_string());
        put("knn.k", self.knn.k.to_string());
        put("dtree.max_depth", show_optional(self.dtree.max_depth));
        put("dtree.min_split", self.dtree.min_split.to_string());
        put("dtree.max_features", show_optional(self.dtree.max_features));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Base learner for bagging.
    pub base: String,
    pub n_estimators: Option<usize>,
    pub vote: VoteMode,
    pub n_rounds: usize,
    pub members: Vec<String>,
    pub mode: VoteMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Mnb,
            base: "dtree".into(),
            n_estimators: None,
            vote: VoteMode::Hard,
            n_rounds: DEFAULT_BOOSTING_ROUNDS,
            members: default_members()
                .iter()
                .map(|m| m.name().to_string())
                .collect(),
            mode: VoteMode::Soft,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub learners: LearnerParams,
    pub seed: u64,
    pub split_fraction: f64,
    pub resample: ResampleMode,
    pub feature_k: Option<usize>,
    pub min_df: usize,
    pub min_token_length: usize,
    pub text_column: String,
    pub label_column: String,
    pub id_column: Option<String>,
    pub delimiter: u8,
    pub created_at: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let csv = CsvOptions::default();
        Self {
            model: ModelConfig::default(),
            learners: LearnerParams::default(),
            seed: 0,
            split_fraction: 0.7,
            resample: ResampleMode::None,
            feature_k: None,
            min_df: 1,
            min_token_length: DEFAULT_MIN_TOKEN_LENGTH,
            text_column: csv.text_column,
            label_column: csv.label_column,
            id_column: csv.id_column,
            delimiter: csv.delimiter,
            created_at: "unspecified".into(),
        }
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow!("invalid value '{value}': {e}"))
}

fn parse_optional<T: FromStr>(value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if value == "none" {
        Ok(None)
    } else {
        parse(value).map(Some)
    }
}

fn show_optional<T: ToString>(value: Option<T>) -> String {
    value.map_or_else(|| "none".into(), |v| v.to_string())
}

fn parse_delimiter(value: &str) -> Result<u8> {
    match value {
        "tab" | "\\t" => Ok(b'\t'),
        v if v.len() == 1 && v.is_ascii() => Ok(v.as_bytes()[0]),
        v => bail!("delimiter must be a single ASCII character or 'tab', got '{v}'"),
    }
}

fn show_delimiter(d: u8) -> String {
    if d == b'\t' {
        "tab".into()
    } else {
        (d as char).to_string()
    }
}

/// Splits `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{line}'", n + 1))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("config: {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("config: {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(&parse_pairs(text)?)?;
        Ok(cfg)
    }

    /// Applies settings in order. A key may appear only once per call.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (k, v) in pairs {
            if !seen.insert(k.as_str()) {
                bail!("key '{k}' given more than once");
            }
            self.set(k, v).with_context(|| format!("key '{k}'"))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model.kind" => {
                self.model.kind = ModelKind::from_tag(value)
                    .ok_or_else(|| anyhow!("unknown model kind '{value}'"))?
            }
            "model.base" => {
                self.learners.spec(value)?;
                self.model.base = value.to_string();
            }
            "model.n_estimators" => self.model.n_estimators = parse_optional(value)?,
            "model.vote" => self.model.vote = value.parse().map_err(|e: String| anyhow!(e))?,
            "model.n_rounds" => self.model.n_rounds = parse(value)?,
            "model.members" => {
                let members: Vec<String> = value
                    .split(',')
                    .map(|m| m.trim().to_string())
                    .filter(|m| !m.is_empty())
                    .collect();
                for m in &members {
                    self.learners.spec(m)?;
                }
                self.model.members = members;
            }
            "model.mode" => self.model.mode = value.parse().map_err(|e: String| anyhow!(e))?,
            "seed" => self.seed = parse(value)?,
            "split.fraction" => self.split_fraction = parse(value)?,
            "resample.mode" => self.resample = value.parse().map_err(|e: String| anyhow!(e))?,
            "features.k" => self.feature_k = parse_optional(value)?,
            "features.min_df" => self.min_df = parse(value)?,
            "preprocess.min_token_length" => self.min_token_length = parse(value)?,
            "columns.text" => self.text_column = value.to_string(),
            "columns.label" => self.label_column = value.to_string(),
            "columns.id" => self.id_column = (value != "none").then(|| value.to_string()),
            "csv.delimiter" => self.delimiter = parse_delimiter(value)?,
            "created_at" => self.created_at = value.to_string(),
            _ => {
                let parts: Vec<&str> = key.split('.').collect();
                match parts.as_slice() {
                    ["learner", learner, param] => self.learners.set(learner, param, value)?,
                    // model.<param> targets the learner the model is built from
                    ["model", param] => {
                        let learner = self.primary_learner();
                        self.learners.set(&learner, param, value)?
                    }
                    _ => bail!("unknown key"),
                }
            }
        }
        Ok(())
    }

    fn primary_learner(&self) -> String {
        match self.model.kind {
            ModelKind::Bagging => self.model.base.clone(),
            ModelKind::RandomForest => "dtree".into(),
            kind => kind.tag().to_string(),
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let m = &self.model;
        Ok(match m.kind {
            ModelKind::Bagging => ModelSpec::Bagging {
                base: self.learners.spec(&m.base)?,
                n_estimators: m.n_estimators.unwrap_or(DEFAULT_BAGGING_ESTIMATORS),
                vote: m.vote,
            },
            ModelKind::RandomForest => ModelSpec::RandomForest {
                n_estimators: m.n_estimators.unwrap_or(DEFAULT_FOREST_ESTIMATORS),
            },
            ModelKind::Adaboost => ModelSpec::Adaboost {
                n_rounds: m.n_rounds,
            },
            ModelKind::Voting => ModelSpec::Voting {
                members: m
                    .members
                    .iter()
                    .map(|n| self.learners.spec(n))
                    .collect::<Result<_>>()?,
                mode: m.mode,
            },
            base => ModelSpec::Base(self.learners.spec(base.tag())?),
        })
    }

    /// Rejects configurations that cannot train, before any data is read.
    pub fn validate(&self) -> Result<()> {
        self.model_spec()?.validate().map_err(|e| anyhow!("{e}"))?;
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            bail!(
                "split.fraction must be in (0, 1), got {}",
                self.split_fraction
            );
        }
        if self.min_df == 0 {
            bail!("features.min_df must be >= 1");
        }
        if self.feature_k == Some(0) {
            bail!("features.k must be >= 1 or none");
        }
        if self.min_token_length == 0 {
            bail!("preprocess.min_token_length must be >= 1");
        }
        Ok(())
    }

    pub fn settings(&self) -> Result<TrainSettings> {
        Ok(TrainSettings {
            model: self.model_spec()?,
            split_fraction: self.split_fraction,
            seed: self.seed,
            resample: self.resample,
            feature_k: self.feature_k,
            min_df: self.min_df,
        })
    }

    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            text_column: self.text_column.clone(),
            label_column: self.label_column.clone(),
            id_column: self.id_column.clone(),
            delimiter: self.delimiter,
        }
    }

    /// Every setting as sorted `key = value` lines; parses back to `self`.
    pub fn echo(&self) -> String {
        let mut out = BTreeMap::new();
        let m = &self.model;
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("model.kind", m.kind.tag().into());
        put("model.base", m.base.clone());
        put("model.n_estimators", show_optional(m.n_estimators));
        put("model.vote", m.vote.to_string());
        put("model.n_rounds", m.n_rounds.to_string());
        put("model.members", m.members.join(","));
        put("model.mode", m.mode.to_string());
        put("seed", self.seed.to_string());
        put("split.fraction", self.split_fraction.to_string());
        put("resample.mode", self.resample.to_string());
        put("features.k", show_optional(self.feature_k));
        put("features.min_df", self.min_df.to_string());
        put(
            "preprocess.min_token_length",
            self.min_token_length.to_string(),
        );
        put("columns.text", self.text_column.clone());
        put("columns.label", self.label_column.clone());
        put(
            "columns.id",
            self.id_column.clone().unwrap_or_else(|| "none".into()),
        );
        put("csv.delimiter", show_delimiter(self.delimiter));
        put("created_at", self.created_at.clone());
        self.learners.echo(&mut out);
        out.into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
