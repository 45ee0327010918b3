use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Metrics};
use super::Trainer;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::parallel::map_indexed;

/// 64-bit linear congruential generator, `state <- a * state + c (mod 2^64)`
/// with Knuth's MMIX constants. Fold assignment depends only on this
/// recurrence, so it can be reproduced in any language.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state
    }

    /// Uniform-ish integer in `0..bound` from the high 32 bits:
    /// `((next >> 32) * bound) >> 32`. `bound` must fit in 32 bits.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() >> 32) * bound) >> 32
    }

    /// Fisher-Yates shuffle, walking `i` from `len - 1` down to 1 and swapping
    /// with `j = below(i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Fold index per row: rows are shuffled with [`Lcg64`] seeded by `seed`,
/// then cut into `k` contiguous chunks whose sizes differ by at most one
/// (the first `n % k` folds get the extra row).
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::arg(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::arg(format!("{k} folds requested for {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Lcg64::new(seed).shuffle(&mut order);
    let (base, extra) = (n / k, n % k);
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            assignment[row] = fold;
        }
        pos += size;
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub seed: u64,
    pub fold_assignment: Vec<usize>,
    pub fold_metrics: Vec<Metrics>,
    pub mean_metrics: Metrics,
    /// Population standard deviation across folds.
    pub std_metrics: Metrics,
}

/// k-fold cross-validation: each fold is scored by a model trained on the
/// remaining folds. Folds may train concurrently; results are ordered by fold.
pub fn k_fold_cv(
    matrix: &DataMatrix,
    k: usize,
    seed: u64,
    trainer: &dyn Trainer,
    band: f64,
) -> Result<CvResult> {
    let assignment = assign_folds(matrix.n_rows(), k, seed)?;
    let fold_metrics = map_indexed(k, |fold| {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..matrix.n_rows()).partition(|&i| assignment[i] == fold);
        let fitted = trainer.fit(&matrix.select_rows(&train)?)?;
        let test = matrix.select_rows(&test)?;
        metrics(&fitted.model.predict_matrix(&test)?, test.target(), band)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (mean_metrics, std_metrics) = summarize(&fold_metrics);
    Ok(CvResult {
        k,
        seed,
        fold_assignment: assignment,
        fold_metrics,
        mean_metrics,
        std_metrics,
    })
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn summarize(folds: &[Metrics]) -> (Metrics, Metrics) {
    let (mae, mae_sd) = mean_std(folds.iter().map(|m| m.mae));
    let (rmse, rmse_sd) = mean_std(folds.iter().map(|m| m.rmse));
    let (band, band_sd) = mean_std(folds.iter().map(|m| m.band_accuracy));
    let defined = folds.iter().filter_map(|m| m.r_squared);
    let (r2, r2_sd) = if defined.clone().count() > 0 {
        let (a, b) = mean_std(defined);
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    (
        Metrics {
            mae,
            rmse,
            r_squared: r2,
            band_accuracy: band,
        },
        Metrics {
            mae: mae_sd,
            rmse: rmse_sd,
            r_squared: r2_sd,
            band_accuracy: band_sd,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcg_first_values() {
        let mut g = Lcg64::new(0);
        assert_eq!(g.next_u64(), Lcg64::INCREMENT);
        assert_eq!(
            g.next_u64(),
            Lcg64::INCREMENT
                .wrapping_mul(Lcg64::MULTIPLIER)
                .wrapping_add(Lcg64::INCREMENT)
        );
    }

    #[test]
    fn folds_partition_rows() {
        for (n, k) in [(5, 5), (10, 3), (17, 4), (2, 2)] {
            let a = assign_folds(n, k, 42).unwrap();
            let mut sizes = vec![0; k];
            for &f in &a {
                sizes[f] += 1;
            }
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(hi - lo <= 1, "{sizes:?}");
            assert_eq!(sizes.iter().sum::<usize>(), n);
        }
        assert_eq!(assign_folds(5, 5, 1).unwrap().iter().filter(|&&f| f == 3).count(), 1);
    }

    #[test]
    fn same_seed_same_folds() {
        assert_eq!(assign_folds(50, 5, 9).unwrap(), assign_folds(50, 5, 9).unwrap());
        assert_ne!(assign_folds(50, 5, 9).unwrap(), assign_folds(50, 5, 10).unwrap());
    }

    #[test]
    fn fold_count_errors() {
        assert!(assign_folds(3, 4, 0).is_err());
        assert!(assign_folds(3, 1, 0).is_err());
    }
}
