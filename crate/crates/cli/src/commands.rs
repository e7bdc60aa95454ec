use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use triage_core::corpus::{load_csv, LabeledCorpus};
use triage_core::ensembles::{DEFAULT_BAGGING_ESTIMATORS, DEFAULT_FOREST_ESTIMATORS};
use triage_core::evaluate::{comparison_table, evaluate_model, EvaluationReport};
use triage_core::pipeline::{fit_pipeline, train_pipeline, Split};
use triage_core::preprocess::{CleaningConfig, Stopwords};
use triage_core::store::{self, PipelineArtifact, TrainingFingerprint};
use triage_core::{Error, ModelSpec, Pipeline, Prediction};

use crate::config::RunConfig;

/// Row label used in reports and benchmark tables.
pub fn display_name(spec: &ModelSpec) -> String {
    fn learner(name: &str) -> &'static str {
        match name {
            "mnb" => "MNB",
            "logreg" => "Logistic Regression (LR)",
            "svm" => "SVM",
            "knn" => "KNN",
            "dtree" => "DTree",
            _ => "Decision stump tree",
        }
    }
    match spec {
        ModelSpec::Base(l) => learner(l.name()).to_string(),
        ModelSpec::Bagging { base, .. } => match base.name() {
            "dtree" => "Bagging-Dtree".into(),
            "logreg" => "Bagging-LR".into(),
            other => format!("Bagging-{}", learner(other)),
        },
        ModelSpec::RandomForest { .. } => "RandomForest".into(),
        ModelSpec::Adaboost { .. } => "Adaboost classifier".into(),
        ModelSpec::Voting { .. } => "Voting-Classifier".into(),
    }
}

fn cleaning(config: &RunConfig) -> CleaningConfig {
    CleaningConfig::new(Stopwords::builtin(), config.min_token_length)
}

fn load_corpus(data: &Path, config: &RunConfig) -> Result<LabeledCorpus> {
    Ok(load_csv(data, &config.csv_options()).map_err(Error::from)?)
}

pub struct TrainOutput {
    pub report: EvaluationReport,
    pub artifact: PipelineArtifact,
    pub text: String,
}

pub fn train(data: &Path, config: &RunConfig, out: &Path) -> Result<TrainOutput> {
    config.validate().context("config")?;
    let settings = config.settings()?;
    let corpus = load_corpus(data, config)?;
    let outcome = train_pipeline(&corpus, &settings, cleaning(config))?;
    let name = display_name(&settings.model);
    let report =
        evaluate_model(&outcome.pipeline, &outcome.split.test, &name).map_err(Error::from)?;
    let fingerprint = TrainingFingerprint {
        seed: settings.seed,
        spec: settings.model.clone(),
        rows: corpus.len(),
        train_rows: outcome.train_rows,
        data_hash: corpus.content_hash(),
        created: config.created_at.clone(),
    };
    let artifact = PipelineArtifact::from_pipeline(&outcome.pipeline, fingerprint);
    store::save(&artifact, out).map_err(Error::from)?;

    let mut text = String::new();
    for line in config.echo().lines() {
        writeln!(text, "# {line}")?;
    }
    writeln!(
        text,
        "rows {} (skipped {}), train {}, test {}, split {}",
        corpus.len(),
        corpus.skipped(),
        outcome.train_rows,
        outcome.split.test.len(),
        &outcome.split.fingerprint()[..12]
    )?;
    text.push_str(&comparison_table(std::slice::from_ref(&report)));
    writeln!(text, "artifact written to {}", out.display())?;
    Ok(TrainOutput {
        report,
        artifact,
        text,
    })
}

/// Loads an artifact with the built-in stopword list, returning drift warnings.
pub fn load_model(path: &Path) -> Result<(Pipeline, store::Loaded)> {
    Ok(store::load_pipeline(path).map_err(Error::from)?)
}

pub fn evaluate(
    data: &Path,
    model: &Path,
    config: &RunConfig,
) -> Result<(EvaluationReport, Vec<String>)> {
    let (pipeline, loaded) = load_model(model)?;
    let corpus = load_corpus(data, config)?;
    let name = display_name(&loaded.artifact.training_fingerprint.spec);
    let report = evaluate_model(&pipeline, &corpus, &name).map_err(Error::from)?;
    Ok((report, loaded.warnings))
}

/// `category<TAB>confidence` with four decimals.
pub fn format_prediction(p: &Prediction) -> String {
    format!("{}\t{:.4}", p.label, p.confidence())
}

pub fn predict(model: &Path, text: &str) -> Result<(Prediction, Vec<String>)> {
    let (pipeline, loaded) = load_model(model)?;
    Ok((pipeline.classify(text), loaded.warnings))
}

/// One results table of the benchmark.
pub struct BenchTable {
    pub title: &'static str,
    pub reports: Vec<EvaluationReport>,
}

pub struct BenchOutput {
    pub split_fingerprint: String,
    pub tables: Vec<BenchTable>,
    pub text: String,
}

/// The three comparison suites: base vs bagged learners, stump vs boosting,
/// and the voting ensemble against its members.
pub fn bench_suites(config: &RunConfig) -> Result<Vec<(&'static str, Vec<ModelSpec>)>> {
    let l = &config.learners;
    let bag = |name: &str| -> Result<ModelSpec> {
        Ok(ModelSpec::Bagging {
            base: l.spec(name)?,
            n_estimators: config
                .model
                .n_estimators
                .unwrap_or(DEFAULT_BAGGING_ESTIMATORS),
            vote: config.model.vote,
        })
    };
    let base = |name: &str| -> Result<ModelSpec> { Ok(ModelSpec::Base(l.spec(name)?)) };
    let voting = ModelSpec::Voting {
        members: config
            .model
            .members
            .iter()
            .map(|m| l.spec(m))
            .collect::<Result<_>>()?,
        mode: config.model.mode,
    };
    Ok(vec![
        (
            "Bagged classifiers and their base classifiers",
            vec![
                base("dtree")?,
                bag("dtree")?,
                base("mnb")?,
                bag("mnb")?,
                ModelSpec::RandomForest {
                    n_estimators: config
                        .model
                        .n_estimators
                        .unwrap_or(DEFAULT_FOREST_ESTIMATORS),
                },
                base("svm")?,
                bag("svm")?,
            ],
        ),
        (
            "Adaboost and the decision stump",
            vec![
                base("stump")?,
                ModelSpec::Adaboost {
                    n_rounds: config.model.n_rounds,
                },
            ],
        ),
        (
            "Voting classifier and its base classifiers",
            config
                .model
                .members
                .iter()
                .map(|m| base(m))
                .chain(std::iter::once(Ok(voting)))
                .collect::<Result<_>>()?,
        ),
    ])
}

/// Trains every suite model on one shared split and reports on its test half.
pub fn bench_corpus(corpus: &LabeledCorpus, config: &RunConfig) -> Result<BenchOutput> {
    config.validate().context("config")?;
    let suites = bench_suites(config)?;
    for (_, specs) in &suites {
        for s in specs {
            s.validate().with_context(|| display_name(s))?;
        }
    }
    let base_settings = config.settings()?;
    let split = Split::new(corpus, config.split_fraction, config.seed)?;
    let fingerprint = split.fingerprint();
    let mut tables = Vec::new();
    let mut text = String::new();
    for (title, specs) in suites {
        let mut reports = Vec::new();
        for spec in specs {
            let name = display_name(&spec);
            let settings = triage_core::pipeline::TrainSettings {
                model: spec,
                ..base_settings.clone()
            };
            let (pipeline, _) = fit_pipeline(&split.train, &settings, cleaning(config))
                .with_context(|| name.clone())?;
            reports.push(evaluate_model(&pipeline, &split.test, &name).map_err(Error::from)?);
        }
        writeln!(text, "{title} (split {})", &fingerprint[..12])?;
        text.push_str(&comparison_table(&reports));
        text.push('\n');
        tables.push(BenchTable { title, reports });
    }
    Ok(BenchOutput {
        split_fingerprint: fingerprint,
        tables,
        text,
    })
}

pub fn bench(data: &Path, config: &RunConfig) -> Result<BenchOutput> {
    config.validate().context("config")?;
    bench_corpus(&load_corpus(data, config)?, config)
}
