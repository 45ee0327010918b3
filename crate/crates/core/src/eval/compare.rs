use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use super::metrics::{metrics, Metrics};
use super::Trainer;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Which metric fills the "accuracy" row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AccuracyKind {
    #[default]
    RSquared,
    BandAccuracy,
}

impl AccuracyKind {
    pub fn label(self) -> &'static str {
        match self {
            AccuracyKind::RSquared => "accuracy_r_squared",
            AccuracyKind::BandAccuracy => "accuracy_band",
        }
    }

    pub fn pick(self, m: &Metrics) -> Option<f64> {
        match self {
            AccuracyKind::RSquared => m.r_squared,
            AccuracyKind::BandAccuracy => Some(m.band_accuracy),
        }
    }
}

impl std::str::FromStr for AccuracyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r2" | "r_squared" => Ok(AccuracyKind::RSquared),
            "band" | "band_accuracy" => Ok(AccuracyKind::BandAccuracy),
            other => Err(Error::arg(format!("unknown accuracy metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model_name: String,
    pub accuracy_kind: AccuracyKind,
    pub accuracy: Option<f64>,
    pub metrics: Metrics,
    pub peak_memory_bytes: usize,
    pub train_time_ms: f64,
}

/// Trains every entry on `train` and scores it on `test`. Rows come back in
/// input order.
pub fn compare_models(
    entries: &[(String, &dyn Trainer)],
    train: &DataMatrix,
    test: &DataMatrix,
    band: f64,
    accuracy_kind: AccuracyKind,
) -> Result<Vec<ComparisonRow>> {
    if entries.is_empty() {
        return Err(Error::arg("nothing to compare"));
    }
    train.ensure_same_schema(test)?;
    entries
        .iter()
        .map(|(name, trainer)| {
            let start = Instant::now();
            let fitted = trainer.fit(train)?;
            let train_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let m = metrics(&fitted.model.predict_matrix(test)?, test.target(), band)?;
            Ok(ComparisonRow {
                model_name: name.clone(),
                accuracy_kind,
                accuracy: accuracy_kind.pick(&m),
                metrics: m,
                peak_memory_bytes: fitted.peak_bytes,
                train_time_ms,
            })
        })
        .collect()
}

/// Writes the table with one column per model and three rows: the labelled
/// accuracy metric, peak memory in bytes, and training time in milliseconds.
pub fn write_comparison_table<W: Write>(rows: &[ComparisonRow], sink: W) -> Result<()> {
    let err = |e: csv::Error| Error::Validation(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["metric".to_string()];
    header.extend(rows.iter().map(|r| r.model_name.clone()));
    w.write_record(&header).map_err(err)?;

    let label = rows
        .first()
        .map(|r| r.accuracy_kind.label())
        .unwrap_or(AccuracyKind::default().label());
    let mut acc = vec![label.to_string()];
    acc.extend(rows.iter().map(|r| r.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default()));
    w.write_record(&acc).map_err(err)?;

    let mut mem = vec!["peak_memory_bytes".to_string()];
    mem.extend(rows.iter().map(|r| r.peak_memory_bytes.to_string()));
    w.write_record(&mem).map_err(err)?;

    let mut time = vec!["train_time_ms".to_string()];
    time.extend(rows.iter().map(|r| format!("{:.3}", r.train_time_ms)));
    w.write_record(&time).map_err(err)?;
    w.flush()?;
    Ok(())
}
