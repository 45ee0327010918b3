//! Boosted regression trees with exact greedy split enumeration.
//!
//! Every tree is grown depth-first. At each node all features are sorted by
//! value and every midpoint between consecutive distinct values is scored
//! with the second-order split gain. A node is only split when the best gain
//! is strictly positive.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::memory::MemoryMeter;
use crate::objective::{leaf_weight, loss_grad, split_gain_unchecked, squared_loss, GradPair};
use crate::parallel::map_indexed;
use crate::tree::{BoostModel, TreeBuilder};

/// Gains closer than this (relative to the best gain) count as tied.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub num_trees: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub leaf_penalty: f64,
    /// Maximum number of splits on any root-to-leaf path.
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
    /// Start boosting from 0 instead of the target mean.
    pub zero_base_score: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_trees: 7,
            learning_rate: 0.3,
            l2_penalty: 1.0,
            leaf_penalty: 0.0,
            max_depth: 6,
            min_samples_leaf: 1,
            seed: 0,
            zero_base_score: false,
        }
    }
}

impl TrainConfig {
    pub const UNLIMITED_DEPTH: usize = usize::MAX;

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::arg(format!(
                "learning rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(Error::arg(format!(
                "l2 penalty must be finite and >= 0, got {}",
                self.l2_penalty
            )));
        }
        if !(self.leaf_penalty >= 0.0 && self.leaf_penalty.is_finite()) {
            return Err(Error::arg(format!(
                "leaf penalty must be finite and >= 0, got {}",
                self.leaf_penalty
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::arg("max depth must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::arg("min samples per leaf must be at least 1"));
        }
        Ok(())
    }
}

/// A chosen split: rows with `value <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Midpoint of two consecutive distinct values that still separates them.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) * 0.5;
    if m < hi {
        m
    } else {
        lo
    }
}

/// Selects the winner among per-feature candidate lists: the maximal gain
/// wins, and candidates within [`GAIN_TIE_TOLERANCE`] of it are tied, in
/// which case the lowest feature and then the earliest candidate is taken.
/// Candidate lists must be in ascending threshold order.
pub(crate) fn select_split<T: Copy>(per_feature: &[Vec<(T, f64)>]) -> Option<(usize, T, f64)> {
    let best = per_feature
        .iter()
        .flatten()
        .map(|&(_, g)| g)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return None;
    }
    let floor = best - GAIN_TIE_TOLERANCE * best.abs();
    per_feature.iter().enumerate().find_map(|(feature, cands)| {
        cands
            .iter()
            .find(|&&(_, g)| g >= floor && g > 0.0)
            .map(|&(at, gain)| (feature, at, gain))
    })
}

/// Scans one feature of one node and returns every admissible
/// `(threshold, gain)` pair in ascending threshold order.
fn scan_feature(
    rows: &[usize],
    grads: &[GradPair],
    matrix: &DataMatrix,
    feature: usize,
    config: &TrainConfig,
    total: GradPair,
) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&i| (matrix.get(i, feature), i)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let l2 = config.l2_penalty;
    let dp = total.h + l2;
    let n = sorted.len();
    let mut out = Vec::new();
    let mut left = GradPair::default();
    for k in 0..n.saturating_sub(1) {
        left += grads[sorted[k].1];
        let (lo, hi) = (sorted[k].0, sorted[k + 1].0);
        if lo == hi {
            continue;
        }
        let n_left = k + 1;
        if n_left < config.min_samples_leaf || n - n_left < config.min_samples_leaf {
            continue;
        }
        let g_right = total.g - left.g;
        let h_right = total.h - left.h;
        let (dl, dr) = (left.h + l2, h_right + l2);
        if !(dl > 0.0 && dr > 0.0 && dp > 0.0) {
            continue;
        }
        let gain = split_gain_unchecked(left.g, dl, g_right, dr, dp, config.leaf_penalty);
        out.push((midpoint(lo, hi), gain));
    }
    out
}

fn sum_grads(rows: &[usize], grads: &[GradPair]) -> GradPair {
    rows.iter().fold(GradPair::default(), |acc, &i| acc + grads[i])
}

/// Best split of the node holding `rows`, or `None` when no candidate has
/// strictly positive gain.
pub fn find_best_split(
    rows: &[usize],
    grads: &[GradPair],
    matrix: &DataMatrix,
    config: &TrainConfig,
) -> Option<SplitCandidate> {
    find_best_split_metered(rows, grads, matrix, config, &mut MemoryMeter::new())
}

fn find_best_split_metered(
    rows: &[usize],
    grads: &[GradPair],
    matrix: &DataMatrix,
    config: &TrainConfig,
    meter: &mut MemoryMeter,
) -> Option<SplitCandidate> {
    if rows.len() < 2 {
        return None;
    }
    let m = matrix.n_features();
    // per-feature sort buffers plus candidate lists
    let scratch = m * rows.len() * 2 * std::mem::size_of::<(f64, usize)>();
    meter.alloc(scratch);
    let total = sum_grads(rows, grads);
    let per_feature = map_indexed(m, |j| scan_feature(rows, grads, matrix, j, config, total));
    meter.free(scratch);
    select_split(&per_feature).map(|(feature, threshold, gain)| SplitCandidate {
        feature,
        threshold,
        gain,
    })
}

/// Grows one tree over `rows` by recursive greedy splitting.
pub fn build_tree(
    rows: &[usize],
    grads: &[GradPair],
    matrix: &DataMatrix,
    config: &TrainConfig,
) -> Result<crate::tree::RegTree> {
    build_tree_metered(rows, grads, matrix, config, &mut MemoryMeter::new())
}

fn build_tree_metered(
    rows: &[usize],
    grads: &[GradPair],
    matrix: &DataMatrix,
    config: &TrainConfig,
    meter: &mut MemoryMeter,
) -> Result<crate::tree::RegTree> {
    if rows.is_empty() {
        return Err(Error::arg("cannot build a tree over zero rows"));
    }
    let mut builder = TreeBuilder::new();
    grow(&mut builder, 0, rows.to_vec(), 0, grads, matrix, config, meter)?;
    Ok(builder.finish())
}

#[allow(clippy::too_many_arguments)]
fn grow(
    builder: &mut TreeBuilder,
    node: usize,
    rows: Vec<usize>,
    depth: usize,
    grads: &[GradPair],
    matrix: &DataMatrix,
    config: &TrainConfig,
    meter: &mut MemoryMeter,
) -> Result<()> {
    let split = if depth < config.max_depth {
        find_best_split_metered(&rows, grads, matrix, config, meter)
    } else {
        None
    };
    match split {
        None => {
            let total = sum_grads(&rows, grads);
            builder.set_leaf(node, leaf_weight(total.g, total.h, config.l2_penalty)?);
            Ok(())
        }
        Some(s) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| matrix.get(i, s.feature) <= s.threshold);
            drop(rows);
            let (l, r) = builder.split(node, s.feature, s.threshold);
            grow(builder, l, left_rows, depth + 1, grads, matrix, config, meter)?;
            grow(builder, r, right_rows, depth + 1, grads, matrix, config, meter)
        }
    }
}

/// Diagnostics collected while training.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// `sum of 1/2 (y - yhat)^2` before the first tree and after each tree.
    pub loss_history: Vec<f64>,
    /// High-water mark of the tracked working buffers, in bytes.
    pub peak_bytes: usize,
}

pub(crate) fn base_score(matrix: &DataMatrix, zero: bool) -> f64 {
    if zero {
        0.0
    } else {
        matrix.target().iter().sum::<f64>() / matrix.n_rows() as f64
    }
}

pub(crate) fn total_loss(targets: &[f64], preds: &[f64]) -> f64 {
    targets
        .iter()
        .zip(preds)
        .map(|(&y, &p)| squared_loss(y, p))
        .sum()
}

/// Shared boosting loop: compute gradients at the current predictions, fit
/// one tree, add `learning_rate * tree(x)` to every prediction.
pub(crate) fn boost<F>(
    matrix: &DataMatrix,
    num_trees: usize,
    learning_rate: f64,
    zero_base_score: bool,
    meter: &mut MemoryMeter,
    mut fit_tree: F,
) -> Result<(BoostModel, Vec<f64>)>
where
    F: FnMut(&[GradPair], &mut MemoryMeter) -> Result<crate::tree::RegTree>,
{
    let n = matrix.n_rows();
    let targets = matrix.target();
    let base = base_score(matrix, zero_base_score);
    let mut preds = vec![base; n];
    let mut grads = vec![GradPair::default(); n];
    let per_row = std::mem::size_of::<f64>() + std::mem::size_of::<GradPair>();
    meter.alloc(n * per_row);

    let mut model = BoostModel {
        base_score: base,
        learning_rate,
        feature_names: matrix.feature_names().to_vec(),
        trees: Vec::with_capacity(num_trees),
    };
    let mut history = vec![total_loss(targets, &preds)];
    for _ in 0..num_trees {
        for i in 0..n {
            grads[i] = loss_grad(targets[i], preds[i]);
        }
        let tree = fit_tree(&grads, meter)?;
        for (i, row) in matrix.rows().enumerate() {
            preds[i] += learning_rate * tree.predict(row);
        }
        meter.alloc(tree.byte_size());
        model.trees.push(tree);
        history.push(total_loss(targets, &preds));
    }
    meter.free(n * per_row);
    Ok((model, history))
}

pub fn train(matrix: &DataMatrix, config: &TrainConfig) -> Result<BoostModel> {
    train_with_report(matrix, config).map(|(m, _)| m)
}

pub fn train_with_report(matrix: &DataMatrix, config: &TrainConfig) -> Result<(BoostModel, TrainReport)> {
    config.validate()?;
    let mut meter = MemoryMeter::new();
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    meter.alloc(rows.len() * std::mem::size_of::<usize>());
    let (model, loss_history) = boost(
        matrix,
        config.num_trees,
        config.learning_rate,
        config.zero_base_score,
        &mut meter,
        |grads, meter| build_tree_metered(&rows, grads, matrix, config, meter),
    )?;
    Ok((
        model,
        TrainReport {
            loss_history,
            peak_bytes: meter.peak(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_feature(x: &[f64], y: &[f64]) -> DataMatrix {
        DataMatrix::new(
            vec!["x".into()],
            x.iter().map(|&v| vec![v]).collect(),
            "y",
            y.to_vec(),
        )
        .unwrap()
    }

    fn grads_of(g: &[f64]) -> Vec<GradPair> {
        g.iter().map(|&g| GradPair { g, h: 1.0 }).collect()
    }

    fn cfg(l2: f64, pen: f64) -> TrainConfig {
        TrainConfig {
            l2_penalty: l2,
            leaf_penalty: pen,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn four_row_example() {
        let m = one_feature(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4]);
        let g = grads_of(&[-1.0, -1.0, 1.0, 1.0]);
        let s = find_best_split(&[0, 1, 2, 3], &g, &m, &cfg(0.0, 0.0)).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert_eq!(s.gain, 2.0);
    }

    #[test]
    fn constant_features_have_no_split() {
        let m = one_feature(&[3.0; 5], &[0.0; 5]);
        let g = grads_of(&[-1.0, 2.0, 0.5, 1.0, -3.0]);
        assert!(find_best_split(&[0, 1, 2, 3, 4], &g, &m, &cfg(0.0, 0.0)).is_none());
    }

    #[test]
    fn min_samples_leaf_respected() {
        let m = one_feature(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4]);
        let g = grads_of(&[-5.0, 1.0, 1.0, 1.0]);
        let c = TrainConfig {
            min_samples_leaf: 2,
            ..cfg(0.0, 0.0)
        };
        assert_eq!(find_best_split(&[0, 1, 2, 3], &g, &m, &c).unwrap().threshold, 2.5);
    }

    #[test]
    fn midpoint_separates_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a <= t && t < b);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }

    #[test]
    fn equal_targets_give_single_leaf() {
        let m = one_feature(&[1.0, 2.0, 3.0], &[4.0; 3]);
        let c = TrainConfig {
            zero_base_score: true,
            l2_penalty: 0.0,
            num_trees: 1,
            learning_rate: 1.0,
            ..TrainConfig::default()
        };
        let model = train(&m, &c).unwrap();
        assert_eq!(model.trees[0].num_leaves(), 1);
        assert_eq!(model.trees[0].predict(&[1.0]), 4.0);
    }

    #[test]
    fn depth_one_is_a_stump() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let c = TrainConfig {
            max_depth: 1,
            num_trees: 3,
            ..TrainConfig::default()
        };
        let model = train(&one_feature(&x, &y), &c).unwrap();
        assert!(model.trees.iter().all(|t| t.num_leaves() <= 2 && t.depth() <= 1));
    }

    #[test]
    fn large_leaf_penalty_prunes_everything() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y = vec![0.1, -0.2, 0.05, 0.3, -0.1, 0.0, 0.2, -0.3, 0.1, -0.05];
        let c = TrainConfig {
            leaf_penalty: 100.0,
            ..TrainConfig::default()
        };
        let model = train(&one_feature(&x, &y), &c).unwrap();
        assert!(model.trees.iter().all(|t| t.num_leaves() == 1));
    }

    #[test]
    fn zero_trees_predicts_mean() {
        let c = TrainConfig {
            num_trees: 0,
            ..TrainConfig::default()
        };
        let model = train(&one_feature(&[1.0, 2.0], &[1.0, 3.0]), &c).unwrap();
        assert_eq!(model.predict(&[5.0]).unwrap(), 2.0);
    }

    #[test]
    fn separable_set_one_stump() {
        let x = [1.0, 2.0, 3.0, 10.0, 11.0, 12.0];
        let y = [5.0, 5.0, 5.0, -1.0, -1.0, -1.0];
        let c = TrainConfig {
            num_trees: 1,
            learning_rate: 1.0,
            l2_penalty: 0.0,
            max_depth: 1,
            ..TrainConfig::default()
        };
        let m = one_feature(&x, &y);
        let model = train(&m, &c).unwrap();
        for (row, &t) in m.rows().zip(&y) {
            assert!((model.predict(row).unwrap() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_is_non_increasing() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + (v * 7.0).cos()).collect();
        let (_, report) = train_with_report(&one_feature(&x, &y), &TrainConfig::default()).unwrap();
        assert_eq!(report.loss_history.len(), 8);
        for w in report.loss_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(report.peak_bytes > 0);
    }

    #[test]
    fn rejects_bad_config() {
        let m = one_feature(&[1.0, 2.0], &[1.0, 3.0]);
        for c in [
            TrainConfig { learning_rate: 0.0, ..TrainConfig::default() },
            TrainConfig { learning_rate: 1.5, ..TrainConfig::default() },
            TrainConfig { l2_penalty: -1.0, ..TrainConfig::default() },
            TrainConfig { max_depth: 0, ..TrainConfig::default() },
            TrainConfig { min_samples_leaf: 0, ..TrainConfig::default() },
        ] {
            assert!(train(&m, &c).is_err());
        }
    }
}
