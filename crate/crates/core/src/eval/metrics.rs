use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the accuracy band, as a fraction of |actual|.
pub const DEFAULT_BAND: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    /// `None` when the actuals are constant and the ratio is undefined.
    pub r_squared: Option<f64>,
    /// Fraction of predictions within `band * |actual|` of the actual value
    /// (absolute tolerance `band` where the actual is zero).
    pub band_accuracy: f64,
}

pub fn metrics(predictions: &[f64], actuals: &[f64], band: f64) -> Result<Metrics> {
    if predictions.len() != actuals.len() {
        return Err(Error::arg(format!(
            "{} predictions but {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::arg("metrics need at least one prediction"));
    }
    if !(band > 0.0 && band.is_finite()) {
        return Err(Error::arg(format!("band must be > 0, got {band}")));
    }
    let n = predictions.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut within = 0usize;
    for (&p, &y) in predictions.iter().zip(actuals) {
        let e = p - y;
        abs_sum += e.abs();
        sq_sum += e * e;
        let tol = if y == 0.0 { band } else { band * y.abs() };
        if e.abs() <= tol {
            within += 1;
        }
    }
    let mean_y = actuals.iter().sum::<f64>() / n;
    let ss_tot: f64 = actuals.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let constant = actuals.iter().all(|&y| y == actuals[0]);
    let r_squared = if constant || ss_tot == 0.0 {
        None
    } else {
        Some(1.0 - sq_sum / ss_tot)
    };
    Ok(Metrics {
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        r_squared,
        band_accuracy: within as f64 / n,
    })
}
