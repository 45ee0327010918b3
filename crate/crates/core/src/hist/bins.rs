use crate::error::{Error, Result};
use crate::exact::midpoint;
use crate::matrix::DataMatrix;

/// Bin index type; caps the bin count at 65536.
pub type BinIndex = u16;
pub const MAX_BINS: usize = BinIndex::MAX as usize + 1;

/// Per-feature bin boundaries.
///
/// Bin `b` of a feature holds values `v` with `upper[b-1] < v <= upper[b]`.
/// The last upper edge is the largest training value; anything above it is
/// clamped into the last bin, anything below the first edge lands in bin 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMapper {
    upper_edges: Vec<Vec<f64>>,
    ranges: Vec<(f64, f64)>,
}

impl BinMapper {
    pub fn n_features(&self) -> usize {
        self.upper_edges.len()
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.upper_edges[feature].len()
    }

    pub fn upper_edges(&self, feature: usize) -> &[f64] {
        &self.upper_edges[feature]
    }

    /// `(min, max)` of the training values of a feature.
    pub fn range(&self, feature: usize) -> (f64, f64) {
        self.ranges[feature]
    }

    /// A feature with a single bin cannot be split.
    pub fn is_unsplittable(&self, feature: usize) -> bool {
        self.n_bins(feature) < 2
    }

    pub fn bin(&self, feature: usize, value: f64) -> BinIndex {
        let edges = &self.upper_edges[feature];
        let b = edges.partition_point(|&e| e < value);
        b.min(edges.len() - 1) as BinIndex
    }

    /// Threshold that sends bins `0..=bin` left.
    pub fn threshold(&self, feature: usize, bin: usize) -> f64 {
        self.upper_edges[feature][bin]
    }
}

/// Builds bins at empirical quantiles. A feature with at most `k` distinct
/// values gets one bin per value; cut points are midpoints between
/// neighbouring distinct values.
pub fn build_bins(matrix: &DataMatrix, k: usize) -> Result<BinMapper> {
    if !(2..=MAX_BINS).contains(&k) {
        return Err(Error::arg(format!("bin count must be in 2..={MAX_BINS}, got {k}")));
    }
    let mut upper_edges = Vec::with_capacity(matrix.n_features());
    let mut ranges = Vec::with_capacity(matrix.n_features());
    for j in 0..matrix.n_features() {
        let mut values = matrix.column(j);
        values.sort_by(f64::total_cmp);
        let (lo, hi) = (values[0], values[values.len() - 1]);
        ranges.push((lo, hi));
        upper_edges.push(feature_edges(&values, k));
    }
    Ok(BinMapper {
        upper_edges,
        ranges,
    })
}

fn feature_edges(sorted: &[f64], k: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = sorted.to_vec();
    distinct.dedup();
    let max = distinct[distinct.len() - 1];
    let mut edges = Vec::new();
    if distinct.len() <= k {
        for w in distinct.windows(2) {
            edges.push(midpoint(w[0], w[1]));
        }
    } else {
        let n = sorted.len();
        for b in 1..k {
            let idx = b * n / k;
            if idx == 0 || idx >= n {
                continue;
            }
            let lo = sorted[idx - 1];
            // first value strictly above `lo`
            let next = sorted[idx..].iter().copied().find(|&v| v > lo);
            if let Some(hi) = next {
                let e = midpoint(lo, hi);
                if edges.last().is_none_or(|&last| e > last) {
                    edges.push(e);
                }
            }
        }
    }
    edges.push(max);
    edges
}

/// Bin indices stored feature-major: `bins[feature * n_rows + row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMatrix {
    n_rows: usize,
    n_features: usize,
    bins: Vec<BinIndex>,
}

impl BinnedMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn get(&self, row: usize, feature: usize) -> BinIndex {
        self.bins[feature * self.n_rows + row]
    }

    pub fn column(&self, feature: usize) -> &[BinIndex] {
        &self.bins[feature * self.n_rows..(feature + 1) * self.n_rows]
    }

    pub(crate) fn byte_size(&self) -> usize {
        self.bins.len() * std::mem::size_of::<BinIndex>()
    }
}

/// Replaces every cell by its bin index.
pub fn bin_features(matrix: &DataMatrix, mapper: &BinMapper) -> Result<BinnedMatrix> {
    if matrix.n_features() != mapper.n_features() {
        return Err(Error::arg(format!(
            "matrix has {} features, bin mapper has {}",
            matrix.n_features(),
            mapper.n_features()
        )));
    }
    let n = matrix.n_rows();
    let m = matrix.n_features();
    let mut bins = Vec::with_capacity(n * m);
    for j in 0..m {
        bins.extend(matrix.rows().map(|r| mapper.bin(j, r[j])));
    }
    Ok(BinnedMatrix {
        n_rows: n,
        n_features: m,
        bins,
    })
}
