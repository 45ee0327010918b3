mod common;

use std::time::{Duration, Instant};

use boostfuse::ensemble::{train_ensemble, SavedModel};
use boostfuse::eval::{k_fold_cv, Learner};
use boostfuse::exact::{find_best_split, train, train_with_report, TrainConfig};
use boostfuse::hist::{bin_features, build_bins, train_hist, train_hist_with_report, LeafWiseConfig};
use boostfuse::objective::GradPair;
use boostfuse::DataMatrix;
use common::*;
use rand::Rng;

#[test]
fn four_row_example_split() {
    let m = DataMatrix::new(
        names(1),
        vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
        "y",
        vec![0.0; 4],
    )
    .unwrap();
    let grads: Vec<GradPair> = [-1.0, -1.0, 1.0, 1.0]
        .iter()
        .map(|&g| GradPair { g, h: 1.0 })
        .collect();
    let config = TrainConfig {
        l2_penalty: 0.0,
        ..TrainConfig::default()
    };
    let s = find_best_split(&[0, 1, 2, 3], &grads, &m, &config).unwrap();
    assert_eq!((s.feature, s.threshold, s.gain), (0, 2.5, 2.0));
}

#[test]
fn separable_set_fits_with_one_stump() {
    let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..10).map(|i| if i < 4 { -3.0 } else { 5.0 }).collect();
    let m = DataMatrix::new(names(1), rows, "y", y).unwrap();
    let config = TrainConfig {
        num_trees: 1,
        learning_rate: 1.0,
        l2_penalty: 0.0,
        max_depth: 1,
        ..TrainConfig::default()
    };
    let model = train(&m, &config).unwrap();
    for (row, y) in m.rows().zip(m.target()) {
        assert!((model.predict(row).unwrap() - y).abs() < 1e-12);
    }
}

#[test]
fn quantile_bins_are_balanced() {
    let mut r = rng(10);
    let col: Vec<Vec<f64>> = (0..1000).map(|_| vec![r.gen::<f64>()]).collect();
    let m = DataMatrix::new(names(1), col, "y", vec![0.0; 1000]).unwrap();
    let mapper = build_bins(&m, 10).unwrap();
    assert_eq!(mapper.n_bins(0), 10);
    let binned = bin_features(&m, &mapper).unwrap();
    let mut counts = [0usize; 10];
    for &b in binned.column(0) {
        counts[b as usize] += 1;
    }
    for c in counts {
        assert!((80..=120).contains(&c), "bin counts {counts:?}");
    }
}

#[test]
fn batch_prediction_matches_rows() {
    let data = smooth_dataset(3, 150, 4);
    let model = train_hist(&data, &LeafWiseConfig::default()).unwrap();
    let batch = model.predict_matrix(&data).unwrap();
    for (row, p) in data.rows().zip(&batch) {
        assert_eq!(model.predict(row).unwrap().to_bits(), p.to_bits());
    }
    assert!(model.predict(&[0.0; 3]).is_err());
}

#[test]
fn histogram_learner_is_faster_on_large_input() {
    // n / k = 8000 / 32 = 250
    let data = recipe_dataset(20, 8000);
    let exact = TrainConfig::default();
    let hist = LeafWiseConfig {
        base: exact,
        bin_count: 32,
        ..LeafWiseConfig::default()
    };
    let best_of = |f: &dyn Fn()| {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                f();
                t.elapsed()
            })
            .min()
            .unwrap_or(Duration::MAX)
    };
    let t_exact = best_of(&|| {
        train(&data, &exact).unwrap();
    });
    let t_hist = best_of(&|| {
        train_hist(&data, &hist).unwrap();
    });
    assert!(t_hist < t_exact, "hist {t_hist:?} vs exact {t_exact:?}");
}

#[test]
fn histogram_learner_uses_less_memory() {
    let data = recipe_dataset(21, 4000);
    let (_, exact) = train_with_report(&data, &TrainConfig::default()).unwrap();
    let (_, hist) = train_hist_with_report(&data, &LeafWiseConfig::default()).unwrap();
    assert!(
        hist.peak_bytes < exact.peak_bytes,
        "hist {} vs exact {}",
        hist.peak_bytes,
        exact.peak_bytes
    );
}

#[test]
fn cross_validation_is_reproducible() {
    let data = smooth_dataset(30, 60, 3);
    let learner = Learner::Hist(LeafWiseConfig::default());
    let a = k_fold_cv(&data, 5, 99, &learner, 0.1).unwrap();
    let b = k_fold_cv(&data, 5, 99, &learner, 0.1).unwrap();
    assert_eq!(a, b);
    let c = k_fold_cv(&data, 5, 100, &learner, 0.1).unwrap();
    assert_ne!(a.fold_assignment, c.fold_assignment);
    assert!(k_fold_cv(&data, 61, 0, &learner, 0.1).is_err());
}

#[test]
fn leave_one_out_folds() {
    let data = smooth_dataset(31, 5, 2);
    let r = k_fold_cv(&data, 5, 0, &Learner::Exact(TrainConfig::default()), 0.1).unwrap();
    let mut seen = r.fold_assignment.clone();
    seen.sort_unstable();
    assert_eq!(seen, vec![0, 1, 2, 3, 4]);
}

#[test]
fn ensemble_prefers_lower_error_learner() {
    let data = recipe_dataset(40, 500);
    let (fit, hold) = boostfuse::ensemble::split_holdout(&data, 0.2).unwrap();
    let coarse = LeafWiseConfig {
        bin_count: 2,
        max_leaves: 2,
        ..LeafWiseConfig::default()
    };
    let e = train_ensemble(&fit, &hold, &TrainConfig::default(), &coarse).unwrap();
    assert!(e.holdout_mae_exact < e.holdout_mae_hist);
    assert!(e.weights.w_exact > e.weights.w_hist);
    let saved = SavedModel::Ensemble(e);
    let row = data.row(0);
    let SavedModel::Ensemble(e) = &saved else { unreachable!() };
    let want = e.weights.w_exact * e.model_exact.predict(row).unwrap()
        + e.weights.w_hist * e.model_hist.predict(row).unwrap();
    assert_eq!(saved.predict(row).unwrap(), want);
}
