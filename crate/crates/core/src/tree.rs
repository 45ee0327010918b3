//! Regression trees and the additive boosted model built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// A tree node. Rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Binary regression tree stored as a node arena; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegTree {
    nodes: Vec<Node>,
}

impl RegTree {
    pub fn leaf(weight: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { weight }],
        }
    }

    /// Builds a tree from raw nodes after checking the structure: every split
    /// references two distinct later nodes, every node other than the root
    /// has exactly one parent, and all numbers are finite.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Malformed("tree has no nodes".into()));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(Error::Malformed(format!(
                            "node {i} splits on feature {feature}, model has {n_features}"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::Malformed(format!("node {i} has non-finite threshold")));
                    }
                    for c in [left, right] {
                        if c <= i || c >= nodes.len() {
                            return Err(Error::Malformed(format!(
                                "node {i} has invalid child {c}"
                            )));
                        }
                        parents[c] += 1;
                    }
                    if left == right {
                        return Err(Error::Malformed(format!("node {i} has identical children")));
                    }
                }
                Node::Leaf { weight } => {
                    if !weight.is_finite() {
                        return Err(Error::Malformed(format!("node {i} has non-finite weight")));
                    }
                }
            }
        }
        if parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::Malformed("tree nodes are not connected as a tree".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Index of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { weight } => weight,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for i in 0..self.nodes.len() {
            if let Node::Split { left, right, .. } = self.nodes[i] {
                depth[left] = depth[i] + 1;
                depth[right] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }

    pub(crate) fn byte_size(&self) -> usize {
        self.nodes.len() * std::mem::size_of::<Node>()
    }
}

/// Incremental tree construction used by both learners. Node ids are arena
/// indices; children are always appended after their parent.
#[derive(Debug, Default)]
pub(crate) struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::Leaf { weight: 0.0 }],
        }
    }

    pub fn set_leaf(&mut self, id: usize, weight: f64) {
        self.nodes[id] = Node::Leaf { weight };
    }

    /// Turns leaf `id` into a split and returns the new `(left, right)` ids.
    pub fn split(&mut self, id: usize, feature: usize, threshold: f64) -> (usize, usize) {
        let left = self.nodes.len();
        let right = left + 1;
        self.nodes.push(Node::Leaf { weight: 0.0 });
        self.nodes.push(Node::Leaf { weight: 0.0 });
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        (left, right)
    }

    pub fn finish(self) -> RegTree {
        RegTree { nodes: self.nodes }
    }
}

/// Additive model: `base_score + learning_rate * sum of tree outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_names: Vec<String>,
    pub trees: Vec<RegTree>,
}

impl BoostModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_names.len() {
            return Err(Error::arg(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        Ok(self.predict_unchecked(row))
    }

    /// Same accumulation order as the training loop, so predictions on
    /// training rows reproduce the trainer's running predictions exactly.
    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + self.learning_rate * t.predict(row))
    }

    pub fn predict_matrix(&self, matrix: &DataMatrix) -> Result<Vec<f64>> {
        if matrix.feature_names() != self.feature_names.as_slice() {
            return Err(Error::arg("matrix features do not match the model's"));
        }
        Ok(matrix.rows().map(|r| self.predict_unchecked(r)).collect())
    }
}
