//! Gradient-boosted regression for daily plant energy data.
//!
//! The crate covers the whole pipeline: CSV ingestion of daily and minutely
//! records ([`ingest`]), Pearson screening of candidate features
//! ([`features`]), two boosted-tree learners sharing one model type
//! ([`exact`] and [`hist`]), inverse-MAE fusion of the two
//! ([`ensemble`]), and evaluation helpers ([`eval`]).

pub mod ensemble;
pub mod error;
pub mod eval;
pub mod exact;
pub mod features;
pub mod hist;
pub mod ingest;
pub mod kv;
pub mod matrix;
pub mod memory;
pub mod objective;
pub mod parallel;
pub mod tree;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use exact::{train, TrainConfig};
pub use hist::{train_hist, LeafWiseConfig};
pub use matrix::DataMatrix;
pub use tree::{BoostModel, RegTree};
