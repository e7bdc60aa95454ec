//! Weighted CART classification trees with Gini impurity.
//!
//! Split search is sparse-aware: at a node only the nonzero entries of the
//! node's rows are sorted, and the implicit zeros form one value group at the
//! bottom of every feature's order. Candidate thresholds are midpoints
//! between consecutive distinct values, and `x <= threshold` goes left.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, LearnerError, TreeParams};
use crate::features::{DesignMatrix, SparseVector};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        distribution: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    /// Arena; node 0 is the root.
    nodes: Vec<Node>,
    n_classes: usize,
    n_features: usize,
}

impl TreeModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match &self.nodes[i] {
                Node::Leaf { .. } => best = best.max(d),
                Node::Split { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
            }
        }
        best
    }

    pub fn leaf(&self, x: &SparseVector) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.get(*feature) <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

impl Classifier for TreeModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_distribution(&self, x: &SparseVector) -> Vec<f64> {
        self.leaf(x).to_vec()
    }
}

/// Trains a tree. `weights` default to uniform; they are rescaled by their
/// maximum so uniform weights of any magnitude become exactly 1.0.
pub fn train_tree(
    data: &DesignMatrix,
    weights: Option<&[f64]>,
    params: &TreeParams,
    seed: u64,
) -> Result<TreeModel, LearnerError> {
    if data.is_empty() {
        return Err(LearnerError::EmptyData);
    }
    if params.min_split < 2 || params.max_depth == Some(0) || params.max_features == Some(0) {
        return Err(LearnerError::BadParam(format!(
            "invalid tree parameters {params:?}"
        )));
    }
    let weights = normalized_weights(weights, data.len())?;
    let mut builder = Builder {
        data,
        weights: &weights,
        params,
        rng: rng_from_seed(seed),
        nodes: vec![],
    };
    builder.build();
    Ok(TreeModel {
        nodes: builder.nodes,
        n_classes: data.n_classes(),
        n_features: data.n_features(),
    })
}

fn normalized_weights(weights: Option<&[f64]>, n: usize) -> Result<Vec<f64>, LearnerError> {
    let Some(w) = weights else {
        return Ok(vec![1.0; n]);
    };
    if w.len() != n {
        return Err(LearnerError::BadWeights(format!(
            "{} weights for {} rows",
            w.len(),
            n
        )));
    }
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(LearnerError::BadWeights(
            "weights must be finite and >= 0".into(),
        ));
    }
    let max = w.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(LearnerError::BadWeights("all weights are zero".into()));
    }
    Ok(w.iter().map(|&x| x / max).collect())
}

struct Builder<'a> {
    data: &'a DesignMatrix,
    weights: &'a [f64],
    params: &'a TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn build(&mut self) {
        self.nodes.push(Node::Leaf {
            distribution: vec![],
        });
        let mut stack = vec![(0usize, (0..self.data.len()).collect::<Vec<_>>(), 0usize)];
        while let Some((slot, rows, depth)) = stack.pop() {
            let class_weight = self.class_weights(&rows);
            let pure = rows
                .iter()
                .all(|&r| self.data.labels()[r] == self.data.labels()[rows[0]]);
            let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || depth_reached || rows.len() < self.params.min_split {
                None
            } else {
                self.best_split(&rows, &class_weight)
            };
            let children = split.map(|s| {
                let (l, r): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&r| self.data.rows()[r].get(s.feature) <= s.threshold);
                (s, l, r)
            });
            match children {
                Some((s, left_rows, right_rows))
                    if !left_rows.is_empty() && !right_rows.is_empty() =>
                {
                    let left = self.nodes.len();
                    self.nodes.push(Node::Leaf {
                        distribution: vec![],
                    });
                    self.nodes.push(Node::Leaf {
                        distribution: vec![],
                    });
                    self.nodes[slot] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right: left + 1,
                    };
                    stack.push((left + 1, right_rows, depth + 1));
                    stack.push((left, left_rows, depth + 1));
                }
                _ => {
                    self.nodes[slot] = Node::Leaf {
                        distribution: self.leaf_distribution(&rows, &class_weight),
                    }
                }
            }
        }
    }

    fn class_weights(&self, rows: &[usize]) -> Vec<f64> {
        let mut cw = vec![0.0; self.data.n_classes()];
        for &r in rows {
            cw[self.data.labels()[r]] += self.weights[r];
        }
        cw
    }

    fn leaf_distribution(&self, rows: &[usize], class_weight: &[f64]) -> Vec<f64> {
        let total: f64 = class_weight.iter().sum();
        if total > 0.0 {
            return class_weight.iter().map(|w| w / total).collect();
        }
        // every row at this node has weight 0: fall back to counts
        let mut counts = vec![0.0; class_weight.len()];
        for &r in rows {
            counts[self.data.labels()[r]] += 1.0;
        }
        let n = rows.len() as f64;
        counts.iter().map(|c| c / n).collect()
    }

    /// Maximizes `sum_c l_c^2 / W_L + sum_c r_c^2 / W_R`, which is the same
    /// as minimizing the weighted Gini impurity of the children.
    fn best_split(&mut self, rows: &[usize], node_weight: &[f64]) -> Option<Split> {
        // (feature, value, row) for every nonzero entry at this node
        let mut entries: Vec<(usize, f64, usize)> = Vec::new();
        for &r in rows {
            entries.extend(
                self.data.rows()[r]
                    .entries()
                    .iter()
                    .map(|&(c, v)| (c, v, r)),
            );
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

        // contiguous range per feature, keeping only non-constant features
        let mut ranges: Vec<(usize, usize, usize)> = Vec::new();
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let mut end = start;
            while end < entries.len() && entries[end].0 == f {
                end += 1;
            }
            let constant = end - start == rows.len() && entries[start].1 == entries[end - 1].1;
            if !constant {
                ranges.push((f, start, end));
            }
            start = end;
        }

        let candidates = self.sample_features(&ranges);
        let total: f64 = node_weight.iter().sum();
        let mut best: Option<Split> = None;
        for &ri in &candidates {
            let (feature, lo, hi) = ranges[ri];
            self.scan_feature(
                feature,
                &entries[lo..hi],
                rows.len(),
                node_weight,
                total,
                &mut best,
            );
        }
        best
    }

    /// Indices into `ranges` to evaluate, in ascending feature order.
    ///
    /// With a feature budget, columns are drawn without replacement from all
    /// V columns until `max_features` non-constant ones are found (constant
    /// columns do not count against the budget). If the node has no more
    /// non-constant columns than the budget, all of them are used.
    fn sample_features(&mut self, ranges: &[(usize, usize, usize)]) -> Vec<usize> {
        let budget = match self.params.max_features {
            Some(m) if m < ranges.len() => m,
            _ => return (0..ranges.len()).collect(),
        };
        let by_feature: HashMap<usize, usize> =
            ranges.iter().enumerate().map(|(i, r)| (r.0, i)).collect();
        let v = self.data.n_features();
        // sparse Fisher-Yates over 0..v
        let mut swapped: HashMap<usize, usize> = HashMap::new();
        let mut chosen = Vec::with_capacity(budget);
        for i in 0..v {
            let j = self.rng.random_range(i..v);
            let pick = *swapped.get(&j).unwrap_or(&j);
            let displaced = *swapped.get(&i).unwrap_or(&i);
            swapped.insert(j, displaced);
            if let Some(&ri) = by_feature.get(&pick) {
                chosen.push(ri);
                if chosen.len() == budget {
                    break;
                }
            }
        }
        chosen.sort_unstable();
        chosen
    }

    fn scan_feature(
        &self,
        feature: usize,
        entries: &[(usize, f64, usize)],
        n_rows: usize,
        node_weight: &[f64],
        total: f64,
        best: &mut Option<Split>,
    ) {
        let labels = self.data.labels();
        let n_zero = n_rows - entries.len();
        let mut left = vec![0.0; node_weight.len()];
        let mut left_rows = 0;
        if n_zero > 0 {
            // the zero group is whatever the nonzero entries do not cover
            let mut nonzero = vec![0.0; node_weight.len()];
            for &(_, _, r) in entries {
                nonzero[labels[r]] += self.weights[r];
            }
            for (l, (nw, nz)) in left.iter_mut().zip(node_weight.iter().zip(&nonzero)) {
                *l = (nw - nz).max(0.0);
            }
            left_rows = n_zero;
        }
        let mut prev_value = if n_zero > 0 { Some(0.0) } else { None };
        let mut i = 0;
        while i < entries.len() {
            let value = entries[i].1;
            if let Some(prev) = prev_value {
                if left_rows > 0 && left_rows < n_rows {
                    let score = split_score(&left, node_weight, total);
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        let mid = prev + (value - prev) / 2.0;
                        *best = Some(Split {
                            feature,
                            // adjacent floats: the midpoint may round up to `value`
                            threshold: if mid < value { mid } else { prev },
                            score,
                        });
                    }
                }
            }
            while i < entries.len() && entries[i].1 == value {
                let r = entries[i].2;
                left[labels[r]] += self.weights[r];
                left_rows += 1;
                i += 1;
            }
            prev_value = Some(value);
        }
    }
}

fn split_score(left: &[f64], node: &[f64], total: f64) -> f64 {
    let wl: f64 = left.iter().sum();
    let wr = total - wl;
    let mut sl = 0.0;
    let mut sr = 0.0;
    for (l, n) in left.iter().zip(node) {
        let r = (n - l).max(0.0);
        sl += l * l;
        sr += r * r;
    }
    let term = |s: f64, w: f64| if w > 0.0 { s / w } else { 0.0 };
    term(sl, wl) + term(sr, wr)
}
