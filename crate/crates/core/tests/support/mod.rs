//! Reference implementations and fuzz generators shared by the integration
//! tests and the acceptance runner. Nothing here calls into the code under
//! test except to build inputs.

#![allow(dead_code)]

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use triage_core::ensembles::{VoteMode, VotingModel};
use triage_core::features::{DesignMatrix, SparseVector};
use triage_core::learners::{
    train_learner, LearnerSpec, LinearModel, Link, LogregParams, TreeParams,
};
use triage_core::learners::{KnnParams, MnbParams, SvmParams};
use triage_core::TrainedModel;

/// Small corpus of integer term counts.
#[derive(Debug, Clone)]
pub struct CountCorpus {
    pub rows: Vec<Vec<u32>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub n_features: usize,
}

impl CountCorpus {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let n_classes = rng.random_range(2..=3);
        let n_features = rng.random_range(1..=5);
        let n_docs = rng.random_range(1..=10);
        let rows = (0..n_docs)
            .map(|_| (0..n_features).map(|_| rng.random_range(0..=3)).collect())
            .collect();
        let labels = (0..n_docs)
            .map(|_| rng.random_range(0..n_classes))
            .collect();
        Self {
            rows,
            labels,
            n_classes,
            n_features,
        }
    }

    pub fn design(&self) -> DesignMatrix {
        let rows = self.rows.iter().map(|r| counts_vector(r)).collect();
        DesignMatrix::new(rows, self.labels.clone(), self.n_features, self.n_classes).unwrap()
    }
}

pub fn counts_vector(counts: &[u32]) -> SparseVector {
    SparseVector::from_dense(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
}

fn rational(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact multinomial naive Bayes posterior with add-one smoothing, by
/// direct enumeration of prior times the product of per-occurrence term
/// probabilities.
pub fn mnb_posterior(corpus: &CountCorpus, query: &[u32]) -> Vec<BigRational> {
    let n = corpus.rows.len() as u64;
    let v = corpus.n_features as u64;
    let joint: Vec<BigRational> = (0..corpus.n_classes)
        .map(|c| {
            let docs: Vec<&Vec<u32>> = corpus
                .rows
                .iter()
                .zip(&corpus.labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect();
            let mut p = rational(docs.len() as u64, n);
            let total: u64 = docs.iter().flat_map(|r| r.iter()).map(|&x| x as u64).sum();
            for (j, &times) in query.iter().enumerate() {
                let term: u64 = docs.iter().map(|r| r[j] as u64).sum();
                let theta = rational(term + 1, total + v);
                for _ in 0..times {
                    p *= theta.clone();
                }
            }
            p
        })
        .collect();
    let z: BigRational = joint.iter().fold(BigRational::zero(), |a, b| a + b);
    joint.into_iter().map(|p| p / z.clone()).collect()
}

/// Indices attaining the maximum of exact values.
pub fn exact_argmaxes(values: &[BigRational]) -> Vec<usize> {
    let max = values
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(BigRational::one);
    (0..values.len()).filter(|&i| values[i] == max).collect()
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

fn mean_by_class(distributions: &[Vec<f64>]) -> Vec<f64> {
    let k = distributions[0].len();
    let m = distributions.len() as f64;
    (0..k)
        .map(|c| {
            let mut s = 0.0;
            for d in distributions {
                s += d[c];
            }
            s / m
        })
        .collect()
}

fn first_max(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 0..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

/// Average member distributions explicitly, then argmax (lower index on ties).
pub fn soft_vote_oracle(distributions: &[Vec<f64>]) -> usize {
    first_max(&mean_by_class(distributions))
}

/// Count member argmaxes; among classes with the top count pick the highest
/// mean probability, then the lower index.
pub fn hard_vote_oracle(distributions: &[Vec<f64>]) -> usize {
    let k = distributions[0].len();
    let mut counts = vec![0; k];
    for d in distributions {
        counts[first_max(d)] += 1;
    }
    let top = counts.iter().copied().max().unwrap();
    let mean = mean_by_class(distributions);
    let tied: Vec<usize> = (0..k).filter(|&c| counts[c] == top).collect();
    let mut best = tied[0];
    for &c in &tied[1..] {
        if mean[c] > mean[best] {
            best = c;
        }
    }
    best
}

pub fn random_sparse(rng: &mut ChaCha8Rng, n_features: usize, density: f64) -> SparseVector {
    let dense: Vec<f64> = (0..n_features)
        .map(|_| {
            if rng.random_bool(density) {
                rng.random_range(0.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    SparseVector::from_dense(&dense)
}

pub fn random_design(
    rng: &mut ChaCha8Rng,
    n_rows: usize,
    n_features: usize,
    n_classes: usize,
) -> DesignMatrix {
    let rows = (0..n_rows)
        .map(|_| random_sparse(rng, n_features, 0.6))
        .collect();
    let labels = (0..n_rows)
        .map(|_| rng.random_range(0..n_classes))
        .collect();
    DesignMatrix::new(rows, labels, n_features, n_classes).unwrap()
}

/// A random base learner spec with cheap hyperparameters.
pub fn random_learner(rng: &mut ChaCha8Rng) -> LearnerSpec {
    match rng.random_range(0..6) {
        0 => LearnerSpec::Mnb(MnbParams {
            alpha: rng.random_range(0.1..2.0),
        }),
        1 => LearnerSpec::Logreg(LogregParams {
            step: 0.5,
            epochs: 20,
            l2: 1e-3,
        }),
        2 => LearnerSpec::Svm(SvmParams {
            lambda: 1e-2,
            epochs: 3,
        }),
        3 => LearnerSpec::Knn(KnnParams {
            k: rng.random_range(1..=4),
        }),
        4 => LearnerSpec::Dtree(TreeParams {
            max_depth: Some(rng.random_range(1..=4)),
            ..TreeParams::default()
        }),
        _ => LearnerSpec::Stump,
    }
}

/// Voting ensemble over 2 to 5 random members trained on random data, plus
/// a random query of matching width.
pub fn random_voting_case(rng: &mut ChaCha8Rng, mode: VoteMode) -> (VotingModel, SparseVector) {
    let k = rng.random_range(2..=5);
    let v = rng.random_range(1..=6);
    let n_rows = rng.random_range(3..=12);
    let data = random_design(rng, n_rows, v, k);
    let n_members = rng.random_range(2..=5);
    let members: Vec<TrainedModel> = (0..n_members)
        .map(|_| {
            if rng.random_bool(0.2) {
                random_linear(rng, k, v)
            } else {
                train_learner(&random_learner(rng), &data, None, rng.random()).unwrap()
            }
        })
        .collect();
    let query = random_sparse(rng, v, 0.5);
    (VotingModel::from_members(members, mode).unwrap(), query)
}

fn random_linear(rng: &mut ChaCha8Rng, k: usize, v: usize) -> TrainedModel {
    let weights = (0..k)
        .map(|_| (0..v).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let biases = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    TrainedModel::Logreg(LinearModel::new(weights, biases, Link::Softmax))
}

/// Flattened parameters (weights row-major, then biases).
pub fn flatten(model: &LinearModel) -> Vec<f64> {
    let mut p: Vec<f64> = model.weights().iter().flatten().copied().collect();
    p.extend_from_slice(model.biases());
    p
}

pub fn unflatten(params: &[f64], k: usize, v: usize) -> LinearModel {
    let weights = (0..k)
        .map(|c| params[c * v..(c + 1) * v].to_vec())
        .collect();
    LinearModel::new(weights, params[k * v..].to_vec(), Link::Softmax)
}

/// Relative error of an analytic gradient against central differences of
/// `loss` with step `h`.
pub fn gradient_relative_error(
    loss: impl Fn(&[f64]) -> f64,
    point: &[f64],
    analytic: &[f64],
    h: f64,
) -> f64 {
    let mut numeric = Vec::with_capacity(point.len());
    let mut p = point.to_vec();
    for i in 0..point.len() {
        p[i] = point[i] + h;
        let up = loss(&p);
        p[i] = point[i] - h;
        let down = loss(&p);
        p[i] = point[i];
        numeric.push((up - down) / (2.0 * h));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(analytic).max(norm(&numeric)).max(1e-12)
}

/// Random K x K confusion counts with at least one instance.
pub fn random_confusion(rng: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
    loop {
        let k = rng.random_range(1..=10);
        let counts: Vec<Vec<u64>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            0
                        } else {
                            rng.random_range(0..100)
                        }
                    })
                    .collect()
            })
            .collect();
        if counts.iter().flatten().sum::<u64>() > 0 {
            return counts;
        }
    }
}

/// Default spec for `kind` with ensemble sizes reduced for fast tests.
pub fn quick_spec(kind: triage_core::ModelKind) -> triage_core::ModelSpec {
    use triage_core::{ModelKind, ModelSpec};
    match kind.default_spec() {
        ModelSpec::Bagging { base, vote, .. } => ModelSpec::Bagging {
            base,
            n_estimators: 5,
            vote,
        },
        ModelSpec::RandomForest { .. } => ModelSpec::RandomForest { n_estimators: 8 },
        ModelSpec::Adaboost { .. } => ModelSpec::Adaboost { n_rounds: 15 },
        spec => {
            debug_assert!(kind != ModelKind::Bagging);
            spec
        }
    }
}

/// Random probe texts: mixtures of known words, unknown words, and noise
/// the cleaner strips.
pub fn random_probes(
    rng: &mut ChaCha8Rng,
    corpus: &triage_core::corpus::LabeledCorpus,
    n: usize,
) -> Vec<String> {
    let words: Vec<&str> = corpus
        .tickets()
        .iter()
        .flat_map(|t| t.description.split_whitespace())
        .collect();
    (0..n)
        .map(|i| {
            let len = rng.random_range(0..10);
            let mut parts: Vec<String> = (0..len)
                .map(|_| words[rng.random_range(0..words.len())].to_string())
                .collect();
            if i % 5 == 0 {
                parts.push("qqzzunknown".into());
            }
            if i % 7 == 0 {
                parts.push("call 555-123-4567 or mail a@b.com on 2020-01-02".into());
            }
            parts.join(" ")
        })
        .collect()
}
