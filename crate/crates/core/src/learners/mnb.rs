//! Multinomial naive Bayes over nonnegative (possibly fractional) term weights.

use serde::{Deserialize, Serialize};

use super::{Classifier, LearnerError};
use crate::features::{DesignMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    /// Class priors n_c / N. A class absent from training gets prior 0 and
    /// can never be predicted.
    priors: Vec<f64>,
    /// ln P(term | class), K rows of V columns.
    log_likelihoods: Vec<Vec<f64>>,
    n_features: usize,
}

pub fn train_mnb(data: &DesignMatrix, alpha: f64) -> Result<MnbModel, LearnerError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LearnerError::BadParam(format!(
            "mnb alpha must be > 0, got {alpha}"
        )));
    }
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    let (k, v) = (data.n_classes(), data.n_features());
    let mut class_count = vec![0usize; k];
    let mut term_mass = vec![vec![0.0; v]; k];
    for (x, &y) in data.rows().iter().zip(data.labels()) {
        class_count[y] += 1;
        for &(c, w) in x.entries() {
            term_mass[y][c] += w;
        }
    }
    let n = data.len() as f64;
    let priors = class_count.iter().map(|&c| c as f64 / n).collect();
    let log_likelihoods = term_mass
        .iter()
        .map(|row| {
            let denom = row.iter().sum::<f64>() + alpha * v as f64;
            row.iter().map(|&m| ((m + alpha) / denom).ln()).collect()
        })
        .collect();
    Ok(MnbModel {
        priors,
        log_likelihoods,
        n_features: v,
    })
}

impl MnbModel {
    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn log_priors(&self) -> Vec<f64> {
        self.priors.iter().map(|p| p.ln()).collect()
    }

    pub fn log_likelihoods(&self) -> &[Vec<f64>] {
        &self.log_likelihoods
    }

    /// Unnormalized log posterior per class.
    pub fn log_scores(&self, x: &SparseVector) -> Vec<f64> {
        self.priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(&prior, ll)| {
                if prior == 0.0 {
                    return f64::NEG_INFINITY;
                }
                prior.ln() + x.entries().iter().map(|&(c, w)| w * ll[c]).sum::<f64>()
            })
            .collect()
    }
}

impl Classifier for MnbModel {
    fn n_classes(&self) -> usize {
        self.priors.len()
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        crate::softmax(&self.log_scores(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>, labels: Vec<usize>, k: usize) -> DesignMatrix {
        let v = rows[0].len();
        DesignMatrix::new(
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
            labels,
            v,
            k,
        )
        .unwrap()
    }

    #[test]
    fn hand_enumerated_example() {
        // class 0 doc: cat x2, class 1 doc: dog x1
        let data = matrix(vec![vec![2.0, 0.0], vec![0.0, 1.0]], vec![0, 1], 2);
        let m = train_mnb(&data, 1.0).unwrap();
        let lik: Vec<Vec<f64>> = m
            .log_likelihoods()
            .iter()
            .map(|r| r.iter().map(|l| l.exp()).collect())
            .collect();
        assert!((lik[0][0] - 0.75).abs() < 1e-12);
        assert!((lik[0][1] - 0.25).abs() < 1e-12);
        assert!((lik[1][0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((lik[1][1] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.priors(), &[0.5, 0.5]);
        let q = SparseVector::from_dense(&[1.0, 0.0]);
        let p = m.predict_distribution(&q);
        // 0.375 vs 0.1667 before normalization
        assert!((p[0] - 0.375 / (0.375 + 0.5 / 3.0)).abs() < 1e-12);
        assert_eq!(m.predict(&q), 0);
    }

    #[test]
    fn single_class_present() {
        let data = matrix(vec![vec![1.0, 0.0], vec![0.0, 3.0]], vec![1, 1], 3);
        let m = train_mnb(&data, 1.0).unwrap();
        let p = m.predict_distribution(&SparseVector::from_dense(&[5.0, 0.0]));
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_query_follows_prior() {
        let data = matrix(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 2.0]],
            vec![0, 1, 1],
            2,
        );
        let m = train_mnb(&data, 1.0).unwrap();
        let p = m.predict_distribution(&SparseVector::default());
        assert!((p[1] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.predict(&SparseVector::default()), 1);
    }

    #[test]
    fn probabilities_normalize() {
        let data = matrix(
            vec![
                vec![0.3, 0.0, 0.7],
                vec![0.0, 0.5, 0.5],
                vec![0.1, 0.1, 0.1],
            ],
            vec![0, 1, 2],
            3,
        );
        let m = train_mnb(&data, 0.5).unwrap();
        assert!((m.priors().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for row in m.log_likelihoods() {
            assert!((row.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_zero_alpha() {
        let data = matrix(vec![vec![1.0]], vec![0], 2);
        assert!(matches!(
            train_mnb(&data, 0.0),
            Err(LearnerError::BadParam(_))
        ));
    }
}
