//! Pearson correlation screening and feature ranking.
//!
//! Features are classed by |r| against the target: above 0.5 is strong, at
//! or below 0.3 is weak, anything between is moderate. Weak features are then
//! cross-correlated with every strong feature; a weak feature that tracks a
//! strong one (|r| > 0.5) is marked indirectly relevant and becomes eligible
//! for selection after all strong and moderate features.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

pub const STRONG_THRESHOLD: f64 = 0.5;
pub const WEAK_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strength {
    Strong,
    Moderate,
    Weak,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Strong => "Strong",
            Strength::Moderate => "Moderate",
            Strength::Weak => "Weak",
        }
    }
}

/// Pearson product-moment correlation, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::arg(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateSeries(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::DegenerateSeries("series has zero variance".into()));
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateSeries("series has zero variance".into()));
    }
    let prod = sxx * syy;
    let denom = if prod.is_finite() && prod > 0.0 {
        prod.sqrt()
    } else {
        sxx.sqrt() * syy.sqrt()
    };
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

pub fn classify_strength(r: f64) -> Strength {
    let a = r.abs();
    if a > STRONG_THRESHOLD {
        Strength::Strong
    } else if a <= WEAK_THRESHOLD {
        Strength::Weak
    } else {
        Strength::Moderate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub feature: String,
    /// `None` when the feature column is constant.
    pub r: Option<f64>,
    pub strength: Option<Strength>,
    pub n: usize,
    pub degenerate: bool,
    pub indirectly_relevant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderLink {
    pub strong_feature: String,
    /// `None` when the pair is degenerate.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub target: String,
    /// One entry per feature column, in matrix column order.
    pub entries: Vec<CorrelationEntry>,
    /// Weak feature -> correlations with every strong feature.
    pub second_order: BTreeMap<String, Vec<SecondOrderLink>>,
}

impl CorrelationReport {
    pub fn entry(&self, feature: &str) -> Option<&CorrelationEntry> {
        self.entries.iter().find(|e| e.feature == feature)
    }

    /// Entries ordered by |r| descending, name ascending; degenerate last.
    pub fn ranked(&self) -> Vec<&CorrelationEntry> {
        let mut v: Vec<&CorrelationEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| rank_order(a, b));
        v
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let err = |e: csv::Error| Error::Validation(e.to_string());
        w.write_record(["feature", "r", "strength", "flags"]).map_err(err)?;
        for e in self.ranked() {
            let mut flags = Vec::new();
            if e.degenerate {
                flags.push("degenerate");
            }
            if e.indirectly_relevant {
                flags.push("indirectly_relevant");
            }
            w.write_record([
                e.feature.clone(),
                e.r.map(|r| r.to_string()).unwrap_or_default(),
                e.strength.map(|s| s.as_str().to_string()).unwrap_or_default(),
                flags.join(";"),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON form with entries sorted by |r| descending.
    pub fn to_json(&self) -> Result<String> {
        let sorted = CorrelationReport {
            target: self.target.clone(),
            entries: self.ranked().into_iter().cloned().collect(),
            second_order: self.second_order.clone(),
        };
        serde_json::to_string_pretty(&sorted).map_err(|e| Error::Validation(e.to_string()))
    }
}

fn rank_order(a: &CorrelationEntry, b: &CorrelationEntry) -> Ordering {
    match (a.r, b.r) {
        (Some(x), Some(y)) => y
            .abs()
            .total_cmp(&x.abs())
            .then_with(|| a.feature.cmp(&b.feature)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.feature.cmp(&b.feature),
    }
}

/// Correlates every feature column with the target.
pub fn correlate_with_target(matrix: &DataMatrix) -> Result<CorrelationReport> {
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::DegenerateSeries(format!(
            "need at least 2 rows, got {n}"
        )));
    }
    let target = matrix.target();
    if is_constant(target) {
        return Err(Error::DegenerateTarget(matrix.target_name().to_string()));
    }
    let entries = matrix
        .feature_names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = matrix.column(j);
            let r = match pearson(&col, target) {
                Ok(r) => Some(r),
                Err(Error::DegenerateSeries(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(CorrelationEntry {
                feature: name.clone(),
                r,
                strength: r.map(classify_strength),
                n,
                degenerate: r.is_none(),
                indirectly_relevant: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationReport {
        target: matrix.target_name().to_string(),
        entries,
        second_order: BTreeMap::new(),
    })
}

/// Cross-correlates each weak feature with each strong feature and flags weak
/// features that track a strong one.
pub fn second_order_analysis(matrix: &DataMatrix, report: &CorrelationReport) -> Result<CorrelationReport> {
    let column_of = |name: &str| {
        matrix
            .column_index(name)
            .map(|j| matrix.column(j))
            .ok_or_else(|| Error::Schema {
                column: name.to_string(),
            })
    };
    let strong: Vec<(&str, Vec<f64>)> = report
        .entries
        .iter()
        .filter(|e| e.strength == Some(Strength::Strong))
        .map(|e| Ok((e.feature.as_str(), column_of(&e.feature)?)))
        .collect::<Result<_>>()?;

    let mut out = report.clone();
    out.second_order.clear();
    for entry in out.entries.iter_mut() {
        entry.indirectly_relevant = false;
        if entry.strength != Some(Strength::Weak) {
            continue;
        }
        let weak_col = column_of(&entry.feature)?;
        let links: Vec<SecondOrderLink> = strong
            .iter()
            .map(|(name, col)| SecondOrderLink {
                strong_feature: name.to_string(),
                r: pearson(&weak_col, col).ok(),
            })
            .collect();
        entry.indirectly_relevant = links
            .iter()
            .any(|l| l.r.is_some_and(|r| r.abs() > STRONG_THRESHOLD));
        out.second_order.insert(entry.feature.clone(), links);
    }
    Ok(out)
}

/// Picks up to `k` features: strong and moderate ones first, then indirectly
/// relevant weak ones, each group ordered by |r| descending with ties broken
/// by name.
pub fn select_features(report: &CorrelationReport, k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let tier = |e: &CorrelationEntry| match e.strength {
        Some(Strength::Strong | Strength::Moderate) => Some(0),
        Some(Strength::Weak) if e.indirectly_relevant => Some(1),
        _ => None,
    };
    let mut eligible: Vec<(u8, &CorrelationEntry)> = report
        .entries
        .iter()
        .filter(|e| !e.degenerate)
        .filter_map(|e| tier(e).map(|t| (t, e)))
        .collect();
    if eligible.is_empty() {
        return Err(Error::EmptySelection);
    }
    eligible.sort_by(|(ta, a), (tb, b)| ta.cmp(tb).then_with(|| rank_order(a, b)));
    Ok(eligible
        .into_iter()
        .take(k)
        .map(|(_, e)| e.feature.clone())
        .collect())
}
