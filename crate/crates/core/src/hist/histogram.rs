use super::bins::{BinMapper, BinnedMatrix};
use crate::error::{Error, Result};
use crate::exact::select_split;
use crate::objective::{split_gain_unchecked, GradPair};
use crate::parallel::map_indexed;

/// Accumulated statistics of one bin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BinStat {
    pub sum_g: f64,
    pub sum_h: f64,
    pub count: usize,
}

/// Per-feature bin statistics for one set of rows, plus the row-order totals
/// of that set.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    features: Vec<Vec<BinStat>>,
    total: GradPair,
    count: usize,
}

impl Histogram {
    pub fn feature(&self, j: usize) -> &[BinStat] {
        &self.features[j]
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn total(&self) -> GradPair {
        self.total
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Entrywise sum; the histogram of the union of two disjoint row sets.
    pub fn merged(&self, other: &Histogram) -> Histogram {
        self.combine(other, |a, b| a + b, |a, b| a + b)
    }

    /// Entrywise difference: the sibling's histogram when `other` is a child
    /// of `self`.
    pub fn subtract(&self, other: &Histogram) -> Histogram {
        self.combine(other, |a, b| a - b, |a, b| a - b)
    }

    fn combine(
        &self,
        other: &Histogram,
        f: impl Fn(f64, f64) -> f64,
        c: impl Fn(usize, usize) -> usize,
    ) -> Histogram {
        let features = self
            .features
            .iter()
            .zip(&other.features)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| BinStat {
                        sum_g: f(x.sum_g, y.sum_g),
                        sum_h: f(x.sum_h, y.sum_h),
                        count: c(x.count, y.count),
                    })
                    .collect()
            })
            .collect();
        Histogram {
            features,
            total: GradPair {
                g: f(self.total.g, other.total.g),
                h: f(self.total.h, other.total.h),
            },
            count: c(self.count, other.count),
        }
    }

    pub(crate) fn byte_size(&self) -> usize {
        self.features.iter().map(Vec::len).sum::<usize>() * std::mem::size_of::<BinStat>()
    }

    pub(crate) fn byte_size_for(mapper: &BinMapper) -> usize {
        (0..mapper.n_features()).map(|j| mapper.n_bins(j)).sum::<usize>()
            * std::mem::size_of::<BinStat>()
    }
}

/// Accumulates per-bin gradient sums for `rows`. Features are processed
/// independently, each in row order.
pub fn build_histogram(
    rows: &[usize],
    grads: &[GradPair],
    binned: &BinnedMatrix,
    mapper: &BinMapper,
) -> Result<Histogram> {
    if rows.is_empty() {
        return Err(Error::arg("histogram needs at least one row"));
    }
    let features = map_indexed(binned.n_features(), |j| {
        let mut stats = vec![BinStat::default(); mapper.n_bins(j)];
        let col = binned.column(j);
        for &i in rows {
            let s = &mut stats[col[i] as usize];
            s.sum_g += grads[i].g;
            s.sum_h += grads[i].h;
            s.count += 1;
        }
        stats
    });
    let total = rows
        .iter()
        .fold(GradPair::default(), |acc, &i| acc + grads[i]);
    Ok(Histogram {
        features,
        total,
        count: rows.len(),
    })
}

/// A split at a bin boundary: bins `0..=bin` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistSplit {
    pub feature: usize,
    pub bin: usize,
    pub gain: f64,
}

/// Scans the `k - 1` boundaries of each feature with running left sums.
/// Uses the same gain formula and tie rule as the exact learner.
pub fn best_split_from_histogram(
    hist: &Histogram,
    l2_penalty: f64,
    leaf_penalty: f64,
    min_samples_leaf: usize,
) -> Option<HistSplit> {
    let total = hist.total;
    let dp = total.h + l2_penalty;
    let per_feature: Vec<Vec<(usize, f64)>> = hist
        .features
        .iter()
        .map(|bins| {
            let mut out = Vec::new();
            let mut left = GradPair::default();
            let mut n_left = 0usize;
            for (b, s) in bins.iter().enumerate().take(bins.len().saturating_sub(1)) {
                left.g += s.sum_g;
                left.h += s.sum_h;
                n_left += s.count;
                let n_right = hist.count - n_left;
                if n_left == 0 || n_right == 0 {
                    continue;
                }
                if n_left < min_samples_leaf || n_right < min_samples_leaf {
                    continue;
                }
                let g_right = total.g - left.g;
                let (dl, dr) = (left.h + l2_penalty, total.h - left.h + l2_penalty);
                if !(dl > 0.0 && dr > 0.0 && dp > 0.0) {
                    continue;
                }
                out.push((b, split_gain_unchecked(left.g, dl, g_right, dr, dp, leaf_penalty)));
            }
            out
        })
        .collect();
    select_split(&per_feature).map(|(feature, bin, gain)| HistSplit { feature, bin, gain })
}
