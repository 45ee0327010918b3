//! Histogram-binned boosting with best-first (leaf-wise) tree growth.
//!
//! Each feature is discretized once into at most `k` quantile bins. Trees are
//! grown by repeatedly splitting the leaf whose best bin-boundary split has
//! the largest gain, subject to a leaf budget and a depth cap. Split search
//! per node costs O(k) per feature once the histogram is accumulated.

mod bins;
mod histogram;
mod leafwise;

pub use bins::{bin_features, build_bins, BinIndex, BinMapper, BinnedMatrix, MAX_BINS};
pub use histogram::{best_split_from_histogram, build_histogram, BinStat, HistSplit, Histogram};
pub use leafwise::{grow_leaf_wise, grow_leaf_wise_traced, SplitEvent};

use crate::error::{Error, Result};
use crate::exact::{boost, TrainConfig, TrainReport};
use crate::matrix::DataMatrix;
use crate::memory::MemoryMeter;
use crate::tree::BoostModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafWiseConfig {
    pub base: TrainConfig,
    pub max_leaves: usize,
    pub bin_count: usize,
    /// Derive one child's histogram as parent minus sibling.
    pub histogram_subtraction: bool,
}

impl Default for LeafWiseConfig {
    fn default() -> Self {
        Self {
            base: TrainConfig::default(),
            max_leaves: 31,
            bin_count: 255,
            histogram_subtraction: false,
        }
    }
}

impl LeafWiseConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.max_leaves < 2 {
            return Err(Error::arg("max leaves must be at least 2"));
        }
        if !(2..=MAX_BINS).contains(&self.bin_count) {
            return Err(Error::arg(format!(
                "bin count must be in 2..={MAX_BINS}, got {}",
                self.bin_count
            )));
        }
        Ok(())
    }
}

pub fn train_hist(matrix: &DataMatrix, config: &LeafWiseConfig) -> Result<BoostModel> {
    train_hist_with_report(matrix, config).map(|(m, _)| m)
}

pub fn train_hist_with_report(
    matrix: &DataMatrix,
    config: &LeafWiseConfig,
) -> Result<(BoostModel, TrainReport)> {
    config.validate()?;
    let mut meter = MemoryMeter::new();
    let mapper = build_bins(matrix, config.bin_count)?;
    let binned = bin_features(matrix, &mapper)?;
    meter.alloc(binned.byte_size());
    let (model, loss_history) = boost(
        matrix,
        config.base.num_trees,
        config.base.learning_rate,
        config.base.zero_base_score,
        &mut meter,
        |grads, meter| {
            leafwise::grow_metered(&binned, &mapper, grads, config, meter).map(|(t, _)| t)
        },
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
    use crate::objective::GradPair;

    fn data() -> DataMatrix {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64])
            .collect();
        let y = rows.iter().map(|r| r[0] * 0.5 + (r[1] - 5.0).abs()).collect();
        DataMatrix::new(vec!["a".into(), "b".into()], rows, "y", y).unwrap()
    }

    fn grads(m: &DataMatrix) -> Vec<GradPair> {
        let mean = m.target().iter().sum::<f64>() / m.n_rows() as f64;
        m.target()
            .iter()
            .map(|&y| crate::objective::loss_grad(y, mean))
            .collect()
    }

    #[test]
    fn two_leaves_means_one_global_best_split() {
        let m = data();
        let mapper = build_bins(&m, 255).unwrap();
        let binned = bin_features(&m, &mapper).unwrap();
        let g = grads(&m);
        let cfg = LeafWiseConfig {
            max_leaves: 2,
            ..LeafWiseConfig::default()
        };
        let (tree, events) = grow_leaf_wise_traced(&binned, &mapper, &g, &cfg).unwrap();
        assert_eq!(tree.num_leaves(), 2);
        assert_eq!(events.len(), 1);
        let rows: Vec<usize> = (0..m.n_rows()).collect();
        let exact = crate::exact::find_best_split(&rows, &g, &m, &cfg.base).unwrap();
        assert_eq!(events[0].feature, exact.feature);
        assert!((events[0].gain - exact.gain).abs() < 1e-9);
    }

    #[test]
    fn depth_one_is_stump_whatever_the_budget() {
        let m = data();
        let cfg = LeafWiseConfig {
            base: TrainConfig {
                max_depth: 1,
                ..TrainConfig::default()
            },
            max_leaves: 64,
            ..LeafWiseConfig::default()
        };
        let model = train_hist(&m, &cfg).unwrap();
        assert!(model.trees.iter().all(|t| t.num_leaves() <= 2 && t.depth() <= 1));
    }

    #[test]
    fn subtraction_matches_direct_build() {
        let m = data();
        let plain = LeafWiseConfig::default();
        let sub = LeafWiseConfig {
            histogram_subtraction: true,
            ..plain
        };
        let a = train_hist(&m, &plain).unwrap();
        let b = train_hist(&m, &sub).unwrap();
        for row in m.rows() {
            assert!((a.predict(row).unwrap() - b.predict(row).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_trees() {
        let cfg = LeafWiseConfig {
            base: TrainConfig {
                num_trees: 0,
                ..TrainConfig::default()
            },
            ..LeafWiseConfig::default()
        };
        let m = data();
        let model = train_hist(&m, &cfg).unwrap();
        assert!(model.trees.is_empty());
        let mean = m.target().iter().sum::<f64>() / m.n_rows() as f64;
        assert_eq!(model.predict(&[0.0, 0.0]).unwrap(), mean);
    }

    #[test]
    fn rejects_bad_config() {
        let m = data();
        let small = LeafWiseConfig {
            max_leaves: 1,
            ..LeafWiseConfig::default()
        };
        assert!(train_hist(&m, &small).is_err());
        let bins = LeafWiseConfig {
            bin_count: 1,
            ..LeafWiseConfig::default()
        };
        assert!(train_hist(&m, &bins).is_err());
    }
}
