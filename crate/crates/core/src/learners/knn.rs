//! k-nearest neighbours by dot-product similarity.
//!
//! Rows and queries are L2-normalized TF-IDF vectors, so the dot product is
//! the cosine similarity. Equal similarities are ordered by row index, which
//! also covers the zero query: every similarity is 0 and the k lowest-index
//! rows vote.

use serde::{Deserialize, Serialize};

use super::{Classifier, LearnerError};
use crate::features::{DesignMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    rows: Vec<SparseVector>,
    labels: Vec<usize>,
    k: usize,
    n_classes: usize,
    n_features: usize,
}

/// Stores the training rows. `k` is clamped to the number of rows.
pub fn train_knn(data: &DesignMatrix, k: usize) -> Result<KnnModel, LearnerError> {
    if k == 0 {
        return Err(LearnerError::BadParam("knn k must be >= 1".into()));
    }
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    Ok(KnnModel {
        rows: data.rows().to_vec(),
        labels: data.labels().to_vec(),
        k: k.min(data.len()),
        n_classes: data.n_classes(),
        n_features: data.n_features(),
    })
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the k most similar rows, most similar first.
    pub fn neighbours(&self, query: &SparseVector) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> =
            self.rows.iter().map(|r| r.dot(query)).zip(0..).collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, order);
            scored.truncate(self.k);
        }
        scored.sort_by(order);
        scored.into_iter().map(|(_, i)| i).collect()
    }
}

impl Classifier for KnnModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        let nn = self.neighbours(x);
        for &i in &nn {
            votes[self.labels[i]] += 1.0;
        }
        let total = nn.len() as f64;
        votes.iter_mut().for_each(|v| *v /= total);
        votes
    }
}
