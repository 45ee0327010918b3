//! Inverse-MAE fusion of the exact and histogram learners.
//!
//! Each learner is scored on a holdout set and receives a weight
//! proportional to the *other* learner's mean absolute error, so the more
//! accurate model dominates the blend.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{train as train_exact, TrainConfig};
use crate::hist::{train_hist, LeafWiseConfig};
use crate::matrix::DataMatrix;
use crate::tree::{BoostModel, Node, RegTree};

/// Share of training rows (the most recent ones) held out for fusion
/// weights when no explicit holdout set is given.
pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.2;

pub fn compute_mae(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    if predictions.len() != actuals.len() {
        return Err(Error::arg(format!(
            "{} predictions but {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::arg("cannot compute MAE of an empty series"));
    }
    let sum: f64 = predictions
        .iter()
        .zip(actuals)
        .map(|(p, a)| (p - a).abs())
        .sum();
    Ok(sum / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    #[serde(rename = "exact")]
    pub w_exact: f64,
    #[serde(rename = "hist")]
    pub w_hist: f64,
}

/// `w_exact = mae_hist / (mae_exact + mae_hist)` and symmetrically for the
/// histogram learner. A model with zero error takes all the weight; two
/// perfect models split it evenly.
pub fn fuse_weights(mae_exact: f64, mae_hist: f64) -> Result<FusionWeights> {
    for (name, v) in [("exact", mae_exact), ("hist", mae_hist)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::arg(format!(
                "MAE of the {name} learner must be finite and >= 0, got {v}"
            )));
        }
    }
    let w = match (mae_exact == 0.0, mae_hist == 0.0) {
        (true, true) => FusionWeights { w_exact: 0.5, w_hist: 0.5 },
        (true, false) => FusionWeights { w_exact: 1.0, w_hist: 0.0 },
        (false, true) => FusionWeights { w_exact: 0.0, w_hist: 1.0 },
        (false, false) => {
            let s = mae_exact + mae_hist;
            FusionWeights {
                w_exact: mae_hist / s,
                w_hist: mae_exact / s,
            }
        }
    };
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub model_exact: BoostModel,
    pub model_hist: BoostModel,
    pub weights: FusionWeights,
    pub holdout_mae_exact: f64,
    pub holdout_mae_hist: f64,
}

impl EnsembleModel {
    pub fn feature_names(&self) -> &[String] {
        &self.model_exact.feature_names
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let a = self.model_exact.predict(row)?;
        let b = self.model_hist.predict(row)?;
        Ok(self.blend(a, b))
    }

    fn blend(&self, a: f64, b: f64) -> f64 {
        self.weights.w_exact * a + self.weights.w_hist * b
    }

    pub fn predict_matrix(&self, matrix: &DataMatrix) -> Result<Vec<f64>> {
        let a = self.model_exact.predict_matrix(matrix)?;
        let b = self.model_hist.predict_matrix(matrix)?;
        Ok(a.into_iter().zip(b).map(|(a, b)| self.blend(a, b)).collect())
    }
}

#[cfg(feature = "parallel")]
fn join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
fn join<A, B>(a: impl FnOnce() -> A, b: impl FnOnce() -> B) -> (A, B) {
    (a(), b())
}

/// Trains both learners on `train`, scores them on `holdout`, and fuses.
pub fn train_ensemble(
    train: &DataMatrix,
    holdout: &DataMatrix,
    config_exact: &TrainConfig,
    config_hist: &LeafWiseConfig,
) -> Result<EnsembleModel> {
    train.ensure_same_schema(holdout)?;
    let (exact, hist) = join(
        || train_exact(train, config_exact),
        || train_hist(train, config_hist),
    );
    fuse_trained(exact?, hist?, holdout)
}

/// Builds an ensemble from already-trained learners, scoring them on `holdout`.
pub fn fuse_trained(
    model_exact: BoostModel,
    model_hist: BoostModel,
    holdout: &DataMatrix,
) -> Result<EnsembleModel> {
    if model_exact.feature_names != model_hist.feature_names {
        return Err(Error::arg("component models have different features"));
    }
    let mae_exact = compute_mae(&model_exact.predict_matrix(holdout)?, holdout.target())?;
    let mae_hist = compute_mae(&model_hist.predict_matrix(holdout)?, holdout.target())?;
    Ok(EnsembleModel {
        weights: fuse_weights(mae_exact, mae_hist)?,
        model_exact,
        model_hist,
        holdout_mae_exact: mae_exact,
        holdout_mae_hist: mae_hist,
    })
}

/// Splits off the trailing `fraction` of rows (at least one row on each
/// side). Rows are assumed to be in date order.
pub fn split_holdout(matrix: &DataMatrix, fraction: f64) -> Result<(DataMatrix, DataMatrix)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::arg(format!("holdout fraction must be in (0, 1), got {fraction}")));
    }
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::arg("need at least 2 rows to carve out a holdout"));
    }
    let n_hold = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let cut = n - n_hold;
    let head: Vec<usize> = (0..cut).collect();
    let tail: Vec<usize> = (cut..n).collect();
    Ok((matrix.select_rows(&head)?, matrix.select_rows(&tail)?))
}

/// [`train_ensemble`] with the holdout carved from the end of `train`.
pub fn train_ensemble_auto(
    train: &DataMatrix,
    config_exact: &TrainConfig,
    config_hist: &LeafWiseConfig,
) -> Result<EnsembleModel> {
    let (fit, holdout) = split_holdout(train, DEFAULT_HOLDOUT_FRACTION)?;
    train_ensemble(&fit, &holdout, config_exact, config_hist)
}

// ---------------------------------------------------------------------------
// Model documents

pub const MODEL_VERSION: &str = "boostfuse-model/1";

/// Any model the CLI can persist.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Exact(BoostModel),
    Hist(BoostModel),
    Ensemble(EnsembleModel),
}

impl SavedModel {
    pub fn feature_names(&self) -> &[String] {
        match self {
            SavedModel::Exact(m) | SavedModel::Hist(m) => &m.feature_names,
            SavedModel::Ensemble(e) => e.feature_names(),
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        match self {
            SavedModel::Exact(m) | SavedModel::Hist(m) => m.predict(row),
            SavedModel::Ensemble(e) => e.predict(row),
        }
    }

    pub fn predict_matrix(&self, matrix: &DataMatrix) -> Result<Vec<f64>> {
        match self {
            SavedModel::Exact(m) | SavedModel::Hist(m) => m.predict_matrix(matrix),
            SavedModel::Ensemble(e) => e.predict_matrix(matrix),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Exact(_) => "exact",
            SavedModel::Hist(_) => "hist",
            SavedModel::Ensemble(_) => "ensemble",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LearnerDoc {
    learning_rate: f64,
    base_score: f64,
    trees: Vec<Vec<Node>>,
}

#[derive(Serialize, Deserialize)]
struct MaeDoc {
    exact: f64,
    hist: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: String,
    kind: String,
    feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<LearnerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hist: Option<LearnerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<FusionWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    holdout_mae: Option<MaeDoc>,
}

fn learner_doc(m: &BoostModel) -> LearnerDoc {
    LearnerDoc {
        learning_rate: m.learning_rate,
        base_score: m.base_score,
        trees: m.trees.iter().map(|t| t.nodes().to_vec()).collect(),
    }
}

fn learner_from_doc(doc: LearnerDoc, feature_names: &[String]) -> Result<BoostModel> {
    if !(doc.learning_rate > 0.0 && doc.learning_rate <= 1.0) || !doc.base_score.is_finite() {
        return Err(Error::Malformed("invalid learning rate or base score".into()));
    }
    let trees = doc
        .trees
        .into_iter()
        .map(|nodes| RegTree::from_nodes(nodes, feature_names.len()))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoostModel {
        base_score: doc.base_score,
        learning_rate: doc.learning_rate,
        feature_names: feature_names.to_vec(),
        trees,
    })
}

/// Serializes a model as a versioned JSON document. Floats are written in
/// shortest round-trip form, so reloading reproduces every bit.
pub fn save_any<W: Write>(model: &SavedModel, mut sink: W) -> Result<()> {
    let mut doc = ModelDoc {
        version: MODEL_VERSION.to_string(),
        kind: model.kind().to_string(),
        feature_names: model.feature_names().to_vec(),
        exact: None,
        hist: None,
        weights: None,
        holdout_mae: None,
    };
    match model {
        SavedModel::Exact(m) => doc.exact = Some(learner_doc(m)),
        SavedModel::Hist(m) => doc.hist = Some(learner_doc(m)),
        SavedModel::Ensemble(e) => {
            doc.exact = Some(learner_doc(&e.model_exact));
            doc.hist = Some(learner_doc(&e.model_hist));
            doc.weights = Some(e.weights);
            doc.holdout_mae = Some(MaeDoc {
                exact: e.holdout_mae_exact,
                hist: e.holdout_mae_hist,
            });
        }
    }
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Malformed(format!("cannot serialize model: {e}")))?;
    sink.write_all(text.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn load_any<R: Read>(mut source: R) -> Result<SavedModel> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::Malformed(format!("cannot read model document: {e}")))?;
    if text.trim().is_empty() {
        return Err(Error::Malformed("empty document".into()));
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        if e.is_eof() {
            Error::Truncated
        } else {
            Error::Malformed(e.to_string())
        }
    })?;
    match value.get("version").and_then(Value::as_str) {
        Some(MODEL_VERSION) => {}
        Some(other) => {
            return Err(Error::Version {
                found: other.to_string(),
                expected: MODEL_VERSION.to_string(),
            })
        }
        None => return Err(Error::Malformed("missing version tag".into())),
    }
    let doc: ModelDoc =
        serde_json::from_value(value).map_err(|e| Error::Malformed(e.to_string()))?;
    let names = doc.feature_names;
    let missing = |what: &str| Error::Malformed(format!("missing `{what}` section"));
    match doc.kind.as_str() {
        "exact" => Ok(SavedModel::Exact(learner_from_doc(
            doc.exact.ok_or_else(|| missing("exact"))?,
            &names,
        )?)),
        "hist" => Ok(SavedModel::Hist(learner_from_doc(
            doc.hist.ok_or_else(|| missing("hist"))?,
            &names,
        )?)),
        "ensemble" => {
            let weights = doc.weights.ok_or_else(|| missing("weights"))?;
            let mae = doc.holdout_mae.ok_or_else(|| missing("holdout_mae"))?;
            if !(weights.w_exact >= 0.0 && weights.w_hist >= 0.0)
                || (weights.w_exact + weights.w_hist - 1.0).abs() > 1e-12
            {
                return Err(Error::Malformed("fusion weights must be >= 0 and sum to 1".into()));
            }
            Ok(SavedModel::Ensemble(EnsembleModel {
                model_exact: learner_from_doc(doc.exact.ok_or_else(|| missing("exact"))?, &names)?,
                model_hist: learner_from_doc(doc.hist.ok_or_else(|| missing("hist"))?, &names)?,
                weights,
                holdout_mae_exact: mae.exact,
                holdout_mae_hist: mae.hist,
            }))
        }
        other => Err(Error::Malformed(format!("unknown model kind `{other}`"))),
    }
}

pub fn save_model<W: Write>(model: &EnsembleModel, sink: W) -> Result<()> {
    save_any(&SavedModel::Ensemble(model.clone()), sink)
}

pub fn load_model<R: Read>(source: R) -> Result<EnsembleModel> {
    match load_any(source)? {
        SavedModel::Ensemble(e) => Ok(e),
        other => Err(Error::Malformed(format!(
            "expected an ensemble document, found `{}`",
            other.kind()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mae_examples() {
        assert_eq!(compute_mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(compute_mae(&[1.0, 3.0], &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(compute_mae(&[0.0], &[-4.0]).unwrap(), 4.0);
        assert!(compute_mae(&[], &[]).is_err());
        assert!(compute_mae(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(
            fuse_weights(0.3, 0.3).unwrap(),
            FusionWeights { w_exact: 0.5, w_hist: 0.5 }
        );
        assert_eq!(
            fuse_weights(0.0, 1.0).unwrap(),
            FusionWeights { w_exact: 1.0, w_hist: 0.0 }
        );
        assert_eq!(
            fuse_weights(0.0, 0.0).unwrap(),
            FusionWeights { w_exact: 0.5, w_hist: 0.5 }
        );
        let w = fuse_weights(0.28998819559541045, 0.7100118044045896).unwrap();
        assert_eq!(w.w_exact, 0.7100118044045896);
        assert!((w.w_hist - 0.2899881955954104).abs() < 1e-15);
        assert!(fuse_weights(-1.0, 1.0).is_err());
        assert!(fuse_weights(f64::NAN, 1.0).is_err());
    }

    fn stump_model(w: f64) -> BoostModel {
        BoostModel {
            base_score: 0.0,
            learning_rate: 1.0,
            feature_names: vec!["x".into()],
            trees: vec![RegTree::leaf(w)],
        }
    }

    #[test]
    fn blend_examples() {
        let mut e = EnsembleModel {
            model_exact: stump_model(2.0),
            model_hist: stump_model(4.0),
            weights: FusionWeights { w_exact: 0.5, w_hist: 0.5 },
            holdout_mae_exact: 1.0,
            holdout_mae_hist: 1.0,
        };
        assert_eq!(e.predict(&[0.0]).unwrap(), 3.0);
        e.weights = FusionWeights { w_exact: 1.0, w_hist: 0.0 };
        assert_eq!(e.predict(&[0.0]).unwrap(), 2.0);
        assert!(e.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn load_errors_are_distinct() {
        assert!(matches!(load_any("".as_bytes()), Err(Error::Malformed(_))));
        assert!(matches!(
            load_any(r#"{"version": "boostfuse-model/1", "kind": "#.as_bytes()),
            Err(Error::Truncated)
        ));
        assert!(matches!(
            load_any(r#"{"version": "boostfuse-model/99", "kind": "exact"}"#.as_bytes()),
            Err(Error::Version { .. })
        ));
        assert!(matches!(
            load_any(r#"{"kind": "exact"}"#.as_bytes()),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(load_any("[1, 2".as_bytes()), Err(Error::Truncated)));
    }

    #[test]
    fn single_model_roundtrip() {
        let m = SavedModel::Hist(stump_model(0.1 + 0.2));
        let mut buf = Vec::new();
        save_any(&m, &mut buf).unwrap();
        assert_eq!(load_any(buf.as_slice()).unwrap(), m);
        assert!(load_model(buf.as_slice()).is_err());
    }

    #[test]
    fn holdout_split_sizes() {
        let m = DataMatrix::new(
            vec!["x".into()],
            (0..10).map(|i| vec![i as f64]).collect(),
            "y",
            vec![0.0; 10],
        )
        .unwrap();
        let (a, b) = split_holdout(&m, 0.2).unwrap();
        assert_eq!((a.n_rows(), b.n_rows()), (8, 2));
        assert_eq!(b.row(0), &[8.0]);
    }
}
