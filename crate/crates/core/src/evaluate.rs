//! Confusion matrices, support-weighted metrics and comparison tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledCorpus;
use crate::pipeline::Pipeline;

/// Version stamped into exported reports.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("y_true has {truth} entries but y_pred has {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("class index {index} out of range for {n_classes} classes")]
    IndexOutOfRange { index: usize, n_classes: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("test label '{0}' is not in the model's label map")]
    UnknownLabel(String),
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|c| self.counts[c][c]).sum()
    }
}

pub fn confusion(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if let Some(&index) = [t, p].iter().find(|&&i| i >= n_classes) {
            return Err(EvalError::IndexOutOfRange { index, n_classes });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Headline numbers derived from a confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::Empty);
    }
    let k = cm.n_classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let support: u64 = cm.counts[c].iter().sum();
            let predicted: u64 = cm.counts.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|m| m.support as f64 * f(m))
            .sum::<f64>()
            / total as f64
    };
    Ok(Metrics {
        accuracy: ratio(cm.trace(), total),
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f1: weighted(|m| m.f1),
        per_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub model_name: String,
    pub class_names: Vec<String>,
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

impl EvaluationReport {
    pub fn from_confusion(
        model_name: impl Into<String>,
        class_names: Vec<String>,
        confusion: ConfusionMatrix,
    ) -> Result<Self, EvalError> {
        let m = metrics(&confusion)?;
        Ok(Self {
            format_version: REPORT_FORMAT_VERSION,
            model_name: model_name.into(),
            class_names,
            accuracy: m.accuracy,
            weighted_precision: m.weighted_precision,
            weighted_recall: m.weighted_recall,
            weighted_f1: m.weighted_f1,
            per_class: m.per_class,
            confusion,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Classifies every test ticket through the full pipeline and scores the result.
pub fn evaluate_model(
    pipeline: &Pipeline,
    test: &LabeledCorpus,
    model_name: &str,
) -> Result<EvaluationReport, EvalError> {
    let label_map = pipeline.label_map();
    let y_true = test
        .labels()
        .iter()
        .map(|&l| {
            let name = test.label_map().name(l).unwrap_or_default();
            label_map
                .get(name)
                .ok_or_else(|| EvalError::UnknownLabel(name.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let y_pred: Vec<usize> = test
        .tickets()
        .par_iter()
        .map(|t| pipeline.classify(&t.description).class)
        .collect();
    let cm = confusion(&y_true, &y_pred, label_map.len())?;
    EvaluationReport::from_confusion(model_name, label_map.names().to_vec(), cm)
}

/// Aligned text table with the columns Accuracy, Precision, Recall, F-score.
pub fn comparison_table(reports: &[EvaluationReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.model_name.len())
        .chain(std::iter::once("Model".len()))
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "Model", "Accuracy", "Precision", "Recall", "F-score"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:>9.6}  {:>9.6}  {:>9.6}  {:>9.6}\n",
            r.model_name, r.accuracy, r.weighted_precision, r.weighted_recall, r.weighted_f1
        ));
    }
    out
}
