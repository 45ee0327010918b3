//! Browser bindings for the boostfuse learners.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use boostfuse::ensemble::{fuse_weights, train_ensemble_auto, SavedModel};
use boostfuse::eval::{metrics, Lcg64, DEFAULT_BAND};
use boostfuse::exact::{train, TrainConfig};
use boostfuse::features::{classify_strength, pearson};
use boostfuse::hist::{train_hist, LeafWiseConfig};
use boostfuse::DataMatrix;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const GRID_POINTS: usize = 200;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn uniform(rng: &mut Lcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn gaussian(rng: &mut Lcg64) -> f64 {
    let u1 = uniform(rng).max(f64::MIN_POSITIVE);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn curve(x: f64) -> f64 {
    (1.5 * x).sin() * 2.0 + 0.3 * x
}

/// Noisy samples of a wiggly curve on [0, 6], sorted by x.
fn sample_curve(n: usize, noise: f64, seed: u64) -> Result<DataMatrix, String> {
    let mut rng = Lcg64::new(seed);
    let mut xs: Vec<f64> = (0..n).map(|_| 6.0 * uniform(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let ys = xs.iter().map(|&x| curve(x) + noise * gaussian(&mut rng)).collect();
    DataMatrix::new(
        vec!["x".into()],
        xs.into_iter().map(|x| vec![x]).collect(),
        "y",
        ys,
    )
    .map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn fit(
    learner: &str,
    n_samples: usize,
    n_trees: usize,
    learning_rate: f64,
    max_depth: usize,
    bins: usize,
    noise: f64,
    seed: u64,
) -> Result<Value, String> {
    let data = sample_curve(n_samples, noise, seed)?;
    let exact = TrainConfig {
        num_trees: n_trees,
        learning_rate,
        max_depth,
        ..TrainConfig::default()
    };
    let hist = LeafWiseConfig {
        base: exact,
        bin_count: bins,
        ..LeafWiseConfig::default()
    };
    let model = match learner {
        "exact" => SavedModel::Exact(train(&data, &exact).map_err(|e| e.to_string())?),
        "hist" => SavedModel::Hist(train_hist(&data, &hist).map_err(|e| e.to_string())?),
        "ensemble" => SavedModel::Ensemble(
            train_ensemble_auto(&data, &exact, &hist).map_err(|e| e.to_string())?,
        ),
        other => return Err(format!("unknown learner `{other}`")),
    };
    let preds = model.predict_matrix(&data).map_err(|e| e.to_string())?;
    let m = metrics(&preds, data.target(), DEFAULT_BAND).map_err(|e| e.to_string())?;
    let grid: Vec<[f64; 2]> = (0..GRID_POINTS)
        .map(|i| {
            let x = 6.0 * i as f64 / (GRID_POINTS - 1) as f64;
            [x, model.predict(&[x]).unwrap_or(f64::NAN)]
        })
        .collect();
    let points: Vec<[f64; 2]> = data.rows().zip(data.target()).map(|(r, &y)| [r[0], y]).collect();
    let weights = match &model {
        SavedModel::Ensemble(e) => json!({ "exact": e.weights.w_exact, "hist": e.weights.w_hist }),
        _ => Value::Null,
    };
    Ok(json!({
        "learner": model.kind(),
        "points": points,
        "grid": grid,
        "train_mae": m.mae,
        "train_r_squared": m.r_squared,
        "weights": weights,
    }))
}

/// Trains `learner` ("exact", "hist" or "ensemble") on noisy samples of a
/// fixed curve and returns the samples, the fitted curve on a grid, and
/// training metrics.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn fit_curve(
    learner: &str,
    n_samples: usize,
    n_trees: usize,
    learning_rate: f64,
    max_depth: usize,
    bins: usize,
    noise: f64,
    seed: u32,
) -> String {
    respond(fit(
        learner,
        n_samples,
        n_trees,
        learning_rate,
        max_depth,
        bins,
        noise,
        u64::from(seed),
    ))
}

/// Inverse-MAE fusion weights for two holdout errors.
#[wasm_bindgen]
pub fn fusion_weights(mae_exact: f64, mae_hist: f64) -> String {
    respond(
        fuse_weights(mae_exact, mae_hist)
            .map(|w| json!({ "exact": w.w_exact, "hist": w.w_hist }))
            .map_err(|e| e.to_string()),
    )
}

fn parse_series(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: `{s}`")))
        .collect()
}

/// Pearson correlation of two comma- or space-separated number lists.
#[wasm_bindgen]
pub fn correlate(xs: &str, ys: &str) -> String {
    let run = || -> Result<Value, String> {
        let (x, y) = (parse_series(xs)?, parse_series(ys)?);
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        Ok(json!({ "r": r, "strength": classify_strength(r).as_str(), "n": x.len() }))
    };
    respond(run())
}
