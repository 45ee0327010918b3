//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use boostfuse::exact::GAIN_TIE_TOLERANCE;
use boostfuse::hist::{BinMapper, BinnedMatrix, SplitEvent};
use boostfuse::objective::{loss_grad, GradPair};
use boostfuse::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

/// Uniform features on [0, 1) and a smooth nonlinear target.
pub fn smooth_dataset(seed: u64, n: usize, m: usize) -> DataMatrix {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| r.gen::<f64>()).collect())
        .collect();
    let y = rows
        .iter()
        .map(|x| {
            (6.0 * x[0]).sin() + 2.0 * x[1 % m] * x[2 % m] - x[m - 1] + 0.1 * r.gen::<f64>()
        })
        .collect();
    DataMatrix::new(names(m), rows, "y", y).unwrap()
}

/// y = 3*x1 - 2*x2 + x3*x4 + N(0, 0.5^2) with standard normal features, the
/// last five of which are pure noise.
pub fn recipe_dataset(seed: u64, n: usize) -> DataMatrix {
    let mut r = rng(seed);
    let std = Normal::new(0.0, 1.0).unwrap();
    let eps = Normal::new(0.0, 0.5).unwrap();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..9).map(|_| std.sample(&mut r)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|x| 3.0 * x[0] - 2.0 * x[1] + x[2] * x[3] + eps.sample(&mut r))
        .collect();
    DataMatrix::new(names(9), rows, "y", y).unwrap()
}

/// Squared-loss gradients of `matrix`'s target at the given predictions.
pub fn grads_at(matrix: &DataMatrix, preds: &[f64]) -> Vec<GradPair> {
    matrix
        .target()
        .iter()
        .zip(preds)
        .map(|(&y, &p)| loss_grad(y, p))
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn gain(gl: f64, hl: f64, gr: f64, hr: f64, l2: f64, gamma: f64) -> f64 {
    let (g, h) = (gl + gr, hl + hr);
    0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - g * g / (h + l2)) - gamma
}

/// Keeps the lexicographically smallest key among gains within the tie
/// tolerance of the maximum. `cands` must already be in key order.
fn pick<K: Copy>(cands: &[(K, f64)]) -> Option<(K, f64)> {
    let best = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return None;
    }
    let floor = best - GAIN_TIE_TOLERANCE * best.abs();
    cands.iter().copied().find(|c| c.1 >= floor)
}

/// Exhaustive search over every feature and every midpoint between distinct
/// values, summing each side from scratch.
pub fn brute_force_split(
    rows: &[usize],
    grads: &[GradPair],
    matrix: &DataMatrix,
    l2: f64,
    gamma: f64,
    min_leaf: usize,
) -> Option<((usize, f64), f64)> {
    let mut cands = Vec::new();
    for j in 0..matrix.n_features() {
        let mut vals: Vec<f64> = rows.iter().map(|&i| matrix.get(i, j)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            let (mut nl, mut nr) = (0, 0);
            for &i in rows {
                if matrix.get(i, j) <= t {
                    gl += grads[i].g;
                    hl += grads[i].h;
                    nl += 1;
                } else {
                    gr += grads[i].g;
                    hr += grads[i].h;
                    nr += 1;
                }
            }
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            cands.push(((j, t), gain(gl, hl, gr, hr, l2, gamma)));
        }
    }
    pick(&cands)
}

/// Best bin-boundary split of one row set, enumerated directly from the
/// binned columns.
pub fn brute_force_bin_split(
    rows: &[usize],
    grads: &[GradPair],
    binned: &BinnedMatrix,
    mapper: &BinMapper,
    l2: f64,
    gamma: f64,
    min_leaf: usize,
) -> Option<((usize, usize), f64)> {
    let mut cands = Vec::new();
    for j in 0..mapper.n_features() {
        for b in 0..mapper.n_bins(j).saturating_sub(1) {
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            let (mut nl, mut nr) = (0, 0);
            for &i in rows {
                if (binned.get(i, j) as usize) <= b {
                    gl += grads[i].g;
                    hl += grads[i].h;
                    nl += 1;
                } else {
                    gr += grads[i].g;
                    hr += grads[i].h;
                    nr += 1;
                }
            }
            if nl == 0 || nr == 0 || nl < min_leaf || nr < min_leaf {
                continue;
            }
            cands.push(((j, b), gain(gl, hl, gr, hr, l2, gamma)));
        }
    }
    pick(&cands)
}

pub struct ReplaySettings {
    pub l2: f64,
    pub gamma: f64,
    pub min_leaf: usize,
    pub max_depth: usize,
    pub max_leaves: usize,
}

/// Re-runs a traced leaf-wise growth from scratch: before each recorded split
/// every live leaf is re-scored by brute force, and the recorded split must be
/// on a leaf of maximal gain and be that leaf's best split. After the last
/// event, growth must have had a reason to stop.
pub fn replay_leaf_wise(
    events: &[SplitEvent],
    grads: &[GradPair],
    binned: &BinnedMatrix,
    mapper: &BinMapper,
    s: &ReplaySettings,
) -> Result<(), String> {
    struct Live {
        node: usize,
        depth: usize,
        rows: Vec<usize>,
    }
    let score = |leaf: &Live| {
        if leaf.depth >= s.max_depth || leaf.rows.len() < 2 {
            return None;
        }
        brute_force_bin_split(&leaf.rows, grads, binned, mapper, s.l2, s.gamma, s.min_leaf)
    };
    let mut live = vec![Live {
        node: 0,
        depth: 0,
        rows: (0..binned.n_rows()).collect(),
    }];
    let mut next_id = 1;
    for (k, ev) in events.iter().enumerate() {
        let scores: Vec<_> = live.iter().map(score).collect();
        let best = scores
            .iter()
            .flatten()
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let pos = live
            .iter()
            .position(|l| l.node == ev.node)
            .ok_or(format!("event {k}: node {} is not a live leaf", ev.node))?;
        let Some(((f, b), g)) = scores[pos] else {
            return Err(format!("event {k}: split leaf has no valid split"));
        };
        if (g - best).abs() > 1e-9 * best.abs().max(1.0) {
            return Err(format!("event {k}: gain {g} is below live maximum {best}"));
        }
        if (f, b) != (ev.feature, ev.bin) || (g - ev.gain).abs() > 1e-9 * g.abs().max(1.0) {
            return Err(format!(
                "event {k}: recorded ({}, {}, {}) but leaf best is ({f}, {b}, {g})",
                ev.feature, ev.bin, ev.gain
            ));
        }
        if ev.depth != live[pos].depth {
            return Err(format!("event {k}: depth mismatch"));
        }
        let leaf = live.remove(pos);
        let (l, r): (Vec<usize>, Vec<usize>) = leaf
            .rows
            .iter()
            .partition(|&&i| (binned.get(i, f) as usize) <= b);
        live.push(Live { node: next_id, depth: leaf.depth + 1, rows: l });
        live.push(Live { node: next_id + 1, depth: leaf.depth + 1, rows: r });
        next_id += 2;
    }
    if live.len() < s.max_leaves && live.iter().any(|l| score(l).is_some()) {
        return Err("growth stopped while a positive-gain split remained".into());
    }
    if live.len() > s.max_leaves {
        return Err(format!("{} leaves exceed the budget", live.len()));
    }
    Ok(())
}
