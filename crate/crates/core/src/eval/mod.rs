//! Metrics, cross-validation and side-by-side model comparison.

mod compare;
mod cv;
mod metrics;

pub use compare::{compare_models, write_comparison_table, AccuracyKind, ComparisonRow};
pub use cv::{assign_folds, k_fold_cv, CvResult, Lcg64};
pub use metrics::{metrics, Metrics, DEFAULT_BAND};

use crate::ensemble::{fuse_trained, split_holdout, SavedModel, DEFAULT_HOLDOUT_FRACTION};
use crate::error::Result;
use crate::exact::{train_with_report, TrainConfig};
use crate::hist::{train_hist_with_report, LeafWiseConfig};
use crate::matrix::DataMatrix;

/// A trained model plus the peak working-set estimate of its training run.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: SavedModel,
    pub peak_bytes: usize,
}

/// Anything that turns a training matrix into a model.
pub trait Trainer: Sync {
    fn fit(&self, matrix: &DataMatrix) -> Result<Fitted>;
}

impl<F> Trainer for F
where
    F: Fn(&DataMatrix) -> Result<Fitted> + Sync,
{
    fn fit(&self, matrix: &DataMatrix) -> Result<Fitted> {
        self(matrix)
    }
}

/// The three learners the toolkit ships.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Learner {
    Exact(TrainConfig),
    Hist(LeafWiseConfig),
    /// Both learners fitted on the leading rows, fused by their MAE on the
    /// trailing [`DEFAULT_HOLDOUT_FRACTION`] of rows.
    Ensemble {
        exact: TrainConfig,
        hist: LeafWiseConfig,
    },
}

impl Learner {
    pub fn name(&self) -> &'static str {
        match self {
            Learner::Exact(_) => "exact",
            Learner::Hist(_) => "hist",
            Learner::Ensemble { .. } => "fused",
        }
    }
}

impl Trainer for Learner {
    fn fit(&self, matrix: &DataMatrix) -> Result<Fitted> {
        match self {
            Learner::Exact(c) => {
                let (m, r) = train_with_report(matrix, c)?;
                Ok(Fitted {
                    model: SavedModel::Exact(m),
                    peak_bytes: r.peak_bytes,
                })
            }
            Learner::Hist(c) => {
                let (m, r) = train_hist_with_report(matrix, c)?;
                Ok(Fitted {
                    model: SavedModel::Hist(m),
                    peak_bytes: r.peak_bytes,
                })
            }
            Learner::Ensemble { exact, hist } => {
                let (fit, holdout) = split_holdout(matrix, DEFAULT_HOLDOUT_FRACTION)?;
                let (me, re) = train_with_report(&fit, exact)?;
                let (mh, rh) = train_hist_with_report(&fit, hist)?;
                Ok(Fitted {
                    model: SavedModel::Ensemble(fuse_trained(me, mh, &holdout)?),
                    // both learners' buffers are live when trained side by side
                    peak_bytes: re.peak_bytes + rh.peak_bytes,
                })
            }
        }
    }
}
