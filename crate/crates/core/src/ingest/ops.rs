use chrono::Datelike;

use super::DailyRecord;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Keeps the days on which the refrigeration system produced cooling.
pub fn filter_operating_days(records: &[DailyRecord]) -> Vec<DailyRecord> {
    records
        .iter()
        .filter(|r| r.system_daily_cooling != 0.0)
        .cloned()
        .collect()
}

/// Result of a train/test split by calendar month.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthSplit {
    pub train: Vec<DailyRecord>,
    pub test: Vec<DailyRecord>,
    pub warnings: Vec<String>,
}

/// Partitions records by calendar month (1 = January). Records outside both
/// months are dropped; an empty side produces a warning rather than an error.
pub fn split_by_month(records: &[DailyRecord], train_month: u32, test_month: u32) -> Result<MonthSplit> {
    for m in [train_month, test_month] {
        if !(1..=12).contains(&m) {
            return Err(Error::arg(format!("month {m} out of range 1..=12")));
        }
    }
    if train_month == test_month {
        return Err(Error::arg("train and test month must differ"));
    }
    let pick = |m: u32| -> Vec<DailyRecord> {
        records
            .iter()
            .filter(|r| r.date.month() == m)
            .cloned()
            .collect()
    };
    let train = pick(train_month);
    let test = pick(test_month);
    let mut warnings = Vec::new();
    if train.is_empty() {
        warnings.push(format!("no records in train month {train_month}"));
    }
    if test.is_empty() {
        warnings.push(format!("no records in test month {test_month}"));
    }
    Ok(MonthSplit {
        train,
        test,
        warnings,
    })
}

/// Builds a matrix whose columns follow `feature_names`, with `target_name`
/// extracted as the target vector. Row order follows `records`.
pub fn to_matrix(records: &[DailyRecord], feature_names: &[String], target_name: &str) -> Result<DataMatrix> {
    if feature_names.iter().any(|f| f == target_name) {
        return Err(Error::arg(format!(
            "target `{target_name}` is also listed as a feature"
        )));
    }
    if records.is_empty() {
        return Err(Error::arg("no records to build a matrix from"));
    }
    let lookup = |r: &DailyRecord, name: &str| {
        r.value(name).ok_or_else(|| Error::Schema {
            column: name.to_string(),
        })
    };
    let mut rows = Vec::with_capacity(records.len());
    let mut target = Vec::with_capacity(records.len());
    for r in records {
        rows.push(
            feature_names
                .iter()
                .map(|f| lookup(r, f))
                .collect::<Result<Vec<_>>>()?,
        );
        target.push(lookup(r, target_name)?);
    }
    DataMatrix::new(feature_names.to_vec(), rows, target_name, target)
}
