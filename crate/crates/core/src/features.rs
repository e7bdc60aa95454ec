//! Vocabulary, TF-IDF vectors and chi-square feature selection.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::TokenDoc;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("empty vocabulary (no term reaches min_df = {min_df})")]
    EmptyVocabulary { min_df: usize },
    #[error("min_df must be at least 1")]
    BadMinDf,
    #[error("select_top_k needs k >= 1")]
    BadK,
    #[error("{docs} documents but {labels} labels")]
    LengthMismatch { docs: usize, labels: usize },
    #[error("row {row}: column {column} out of range for {n_features} features")]
    ColumnOutOfRange {
        row: usize,
        column: usize,
        n_features: usize,
    },
    #[error("row {row}: label {label} out of range for {n_classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        n_classes: usize,
    },
}

/// Sparse row with strictly increasing columns and positive weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts by column, sums duplicates and drops non-positive weights.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(c, _)| c);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (c, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == c => last.1 += w,
                _ => entries.push((c, w)),
            }
        }
        entries.retain(|&(_, w)| w > 0.0);
        Self { entries }
    }

    /// Dense slice to sparse; zeros are skipped.
    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate().collect())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Value at `column`, zero when absent.
    pub fn get(&self, column: usize) -> f64 {
        self.entries
            .binary_search_by_key(&column, |&(c, _)| c)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(c, w)| w * dense[c]).sum()
    }

    /// One past the largest column, zero for the empty vector.
    pub fn dim_hint(&self) -> usize {
        self.entries.last().map_or(0, |&(c, _)| c + 1)
    }
}

/// Training rows plus integer labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    rows: Vec<SparseVector>,
    labels: Vec<usize>,
    n_features: usize,
    n_classes: usize,
}

impl DesignMatrix {
    pub fn new(
        rows: Vec<SparseVector>,
        labels: Vec<usize>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self, FeatureError> {
        if rows.len() != labels.len() {
            return Err(FeatureError::LengthMismatch {
                docs: rows.len(),
                labels: labels.len(),
            });
        }
        for (row, (x, &label)) in rows.iter().zip(&labels).enumerate() {
            if x.dim_hint() > n_features {
                return Err(FeatureError::ColumnOutOfRange {
                    row,
                    column: x.dim_hint() - 1,
                    n_features,
                });
            }
            if label >= n_classes {
                return Err(FeatureError::LabelOutOfRange {
                    row,
                    label,
                    n_classes,
                });
            }
        }
        Ok(Self {
            rows,
            labels,
            n_features,
            n_classes,
        })
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows picked by index (repeats allowed), same shape otherwise.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_features: self.n_features,
            n_classes: self.n_classes,
        }
    }
}

/// Frozen text-to-vector contract.
///
/// Terms are sorted lexicographically. `mask` lists the selected term
/// columns in ascending order; vectors produced by [`vectorize`] are indexed
/// by position in the mask, so a model's feature count is `mask.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    idf: Vec<f64>,
    mask: Vec<usize>,
    #[serde(skip)]
    term_index: HashMap<String, usize>,
    #[serde(skip)]
    mask_position: Vec<Option<usize>>,
}

impl FeatureSpace {
    fn build(
        terms: Vec<String>,
        doc_freq: Vec<usize>,
        n_docs: usize,
        idf: Vec<f64>,
        mask: Vec<usize>,
    ) -> Self {
        let mut space = Self {
            terms,
            doc_freq,
            n_docs,
            idf,
            mask,
            term_index: HashMap::new(),
            mask_position: Vec::new(),
        };
        space.reindex();
        space
    }

    /// Restores lookup tables after deserialization.
    pub(crate) fn reindex(&mut self) {
        self.term_index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        self.mask_position = vec![None; self.terms.len()];
        for (p, &c) in self.mask.iter().enumerate() {
            if let Some(slot) = self.mask_position.get_mut(c) {
                *slot = Some(p);
            }
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn mask(&self) -> &[usize] {
        &self.mask
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    /// Width of vectorized output.
    pub fn n_features(&self) -> usize {
        self.mask.len()
    }

    /// Checks the structural invariants of a (possibly deserialized) space.
    pub fn validate(&self) -> Result<(), String> {
        let v = self.terms.len();
        if self.doc_freq.len() != v || self.idf.len() != v {
            return Err("terms, doc_freq and idf lengths differ".into());
        }
        if self.terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err("terms are not strictly sorted".into());
        }
        if self.mask.windows(2).any(|w| w[0] >= w[1]) || self.mask.iter().any(|&c| c >= v) {
            return Err("mask is not a sorted subset of the columns".into());
        }
        if self.doc_freq.iter().any(|&d| d == 0 || d > self.n_docs) {
            return Err("document frequency out of range".into());
        }
        Ok(())
    }
}

/// Smoothed inverse document frequency.
pub fn smoothed_idf(n_docs: usize, doc_freq: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

pub fn fit_feature_space(docs: &[TokenDoc], min_df: usize) -> Result<FeatureSpace, FeatureError> {
    if min_df == 0 {
        return Err(FeatureError::BadMinDf);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let unique: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, d)| d >= min_df)
        .map(|(t, d)| (t.to_string(), d))
        .unzip();
    if terms.is_empty() {
        return Err(FeatureError::EmptyVocabulary { min_df });
    }
    let n_docs = docs.len();
    let idf = doc_freq.iter().map(|&d| smoothed_idf(n_docs, d)).collect();
    let mask = (0..terms.len()).collect();
    Ok(FeatureSpace::build(terms, doc_freq, n_docs, idf, mask))
}

/// Count times idf over masked-in vocabulary terms, L2 normalized.
pub fn vectorize(doc: &TokenDoc, space: &FeatureSpace) -> SparseVector {
    // position in mask -> (count, idf)
    let mut counts: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for t in &doc.tokens {
        if let Some(&col) = space.term_index.get(t) {
            if let Some(pos) = space.mask_position[col] {
                counts.entry(pos).or_insert((0, space.idf[col])).0 += 1;
            }
        }
    }
    let raw: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(p, (n, idf))| (p, n as f64 * idf))
        .collect();
    let norm = raw.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return SparseVector::default();
    }
    SparseVector {
        entries: raw.into_iter().map(|(c, w)| (c, w / norm)).collect(),
    }
}

/// Convenience wrapper: vectorize every document and pair with labels.
pub fn design_matrix(
    docs: &[TokenDoc],
    labels: &[usize],
    space: &FeatureSpace,
    n_classes: usize,
) -> Result<DesignMatrix, FeatureError> {
    let rows = docs.iter().map(|d| vectorize(d, space)).collect();
    DesignMatrix::new(rows, labels.to_vec(), space.n_features(), n_classes)
}

/// Chi-square statistic of a 2x2 presence table, 0 when a marginal is 0.
///
/// `a`: in class with term, `b`: other classes with term, `c`: in class
/// without term, `d`: other classes without term.
pub fn chi2_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    if denom == 0.0 {
        return 0.0;
    }
    let diff = a * d - b * c;
    n * diff * diff / denom
}

/// Per-term score: max over classes of the one-vs-rest presence chi-square.
/// Scores are indexed by vocabulary column.
pub fn chi2_scores(
    docs: &[TokenDoc],
    labels: &[usize],
    space: &FeatureSpace,
    n_classes: usize,
) -> Result<Vec<f64>, FeatureError> {
    if docs.len() != labels.len() {
        return Err(FeatureError::LengthMismatch {
            docs: docs.len(),
            labels: labels.len(),
        });
    }
    let v = space.vocabulary_size();
    let mut class_size = vec![0usize; n_classes];
    // present[t][c] = docs of class c containing t
    let mut present = vec![vec![0usize; n_classes]; v];
    for (row, (doc, &label)) in docs.iter().zip(labels).enumerate() {
        if label >= n_classes {
            return Err(FeatureError::LabelOutOfRange {
                row,
                label,
                n_classes,
            });
        }
        class_size[label] += 1;
        let unique: BTreeSet<usize> = doc
            .tokens
            .iter()
            .filter_map(|t| space.term_index(t))
            .collect();
        for t in unique {
            present[t][label] += 1;
        }
    }
    let n = docs.len();
    Ok(present
        .iter()
        .map(|per_class| {
            let with_term: usize = per_class.iter().sum();
            (0..n_classes)
                .map(|c| {
                    let a = per_class[c];
                    let b = with_term - a;
                    let c_ = class_size[c] - a;
                    let d = n - with_term - c_;
                    chi2_2x2(a as f64, b as f64, c_ as f64, d as f64)
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

/// New space whose mask holds the `k` best-scoring columns. Ties go to the
/// lexicographically smaller term, i.e. the lower column.
pub fn select_top_k(
    space: &FeatureSpace,
    scores: &[f64],
    k: usize,
) -> Result<FeatureSpace, FeatureError> {
    if k == 0 {
        return Err(FeatureError::BadK);
    }
    let mut order: Vec<usize> = (0..space.vocabulary_size()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    Ok(FeatureSpace::build(
        space.terms.clone(),
        space.doc_freq.clone(),
        space.n_docs,
        space.idf.clone(),
        order,
    ))
}
