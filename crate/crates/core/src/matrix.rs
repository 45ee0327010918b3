//! Column-named numeric table with a designated target column.

use crate::error::{Error, Result};

/// Dense row-major feature matrix plus one target vector.
///
/// Every cell is finite, there is at least one row and one feature column,
/// and the target label never appears among the feature labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    feature_names: Vec<String>,
    target_name: String,
    values: Vec<f64>,
    target: Vec<f64>,
    n_rows: usize,
}

impl DataMatrix {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        target_name: impl Into<String>,
        target: Vec<f64>,
    ) -> Result<Self> {
        let target_name = target_name.into();
        let m = feature_names.len();
        if m == 0 {
            return Err(Error::arg("matrix needs at least one feature column"));
        }
        if rows.is_empty() {
            return Err(Error::arg("matrix needs at least one row"));
        }
        if rows.len() != target.len() {
            return Err(Error::arg(format!(
                "{} rows but {} target values",
                rows.len(),
                target.len()
            )));
        }
        if feature_names.contains(&target_name) {
            return Err(Error::arg(format!(
                "target `{target_name}` is also listed as a feature"
            )));
        }
        for (i, name) in feature_names.iter().enumerate() {
            if feature_names[..i].contains(name) {
                return Err(Error::arg(format!("duplicate feature `{name}`")));
            }
        }
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::arg(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::arg(format!(
                    "non-finite value in row {i}, column `{}`",
                    feature_names[j]
                )));
            }
            values.extend_from_slice(row);
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite target in row {i}")));
        }
        Ok(Self {
            feature_names,
            target_name,
            n_rows: rows.len(),
            values,
            target,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_features();
        &self.values[i * m..(i + 1) * m]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::arg("row selection is empty"));
        }
        let m = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * m);
        let mut target = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::arg(format!("row index {i} out of range")));
            }
            values.extend_from_slice(self.row(i));
            target.push(self.target[i]);
        }
        Ok(Self {
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            n_rows: indices.len(),
            values,
            target,
        })
    }

    /// Matrix restricted to the named feature columns, in the order given.
    pub fn select_features(&self, names: &[String]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::Schema { column: n.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = self
            .rows()
            .map(|r| idx.iter().map(|&j| r[j]).collect())
            .collect();
        Self::new(
            names.to_vec(),
            rows,
            self.target_name.clone(),
            self.target.clone(),
        )
    }

    /// Checks that `other` carries the same feature and target labels.
    pub fn ensure_same_schema(&self, other: &DataMatrix) -> Result<()> {
        if self.feature_names != other.feature_names || self.target_name != other.target_name {
            return Err(Error::arg("matrices do not share feature and target names"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rejects_target_among_features() {
        let err = DataMatrix::new(names(&["a", "y"]), vec![vec![1.0, 2.0]], "y", vec![0.0]);
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(DataMatrix::new(names(&["a", "b"]), vec![vec![1.0]], "y", vec![0.0]).is_err());
        assert!(
            DataMatrix::new(names(&["a"]), vec![vec![f64::NAN]], "y", vec![0.0]).is_err()
        );
        assert!(DataMatrix::new(names(&["a"]), vec![], "y", vec![]).is_err());
    }

    #[test]
    fn column_readback_preserves_rows() {
        let m = DataMatrix::new(
            names(&["a", "b"]),
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            "y",
            vec![7.0, 8.0, 9.0],
        )
        .unwrap();
        assert_eq!(m.column(1), vec![2.0, 4.0, 6.0]);
        assert_eq!(m.row(2), &[5.0, 6.0]);
        let s = m.select_rows(&[2, 0]).unwrap();
        assert_eq!(s.target(), &[9.0, 7.0]);
        let f = m.select_features(&names(&["b"])).unwrap();
        assert_eq!(f.column(0), vec![2.0, 4.0, 6.0]);
    }
}
