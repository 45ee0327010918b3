//! Ingestion of daily and minutely plant records.
//!
//! Daily records carry the five canonical plant columns plus any number of
//! extra named numeric columns (temperatures, instantaneous readings, ...).
//! Columns are matched by header string through a [`ColumnSchema`], so the
//! original non-Latin headers can be mapped with an alias table.

mod daily;
mod minutely;
mod ops;

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::kv::parse_kv;

pub use daily::{parse_daily_csv, write_daily_csv};
pub use minutely::{
    aggregate_by_day, aggregate_minutely, parse_minutely_csv, write_partial_daily_csv,
    MinutelyRecord, PartialDailyRecord,
};
pub use ops::{filter_operating_days, split_by_month, to_matrix, MonthSplit};

pub const DATE: &str = "date";
pub const HOST_DAILY_POWER: &str = "host_daily_power";
pub const CHILLER_PUMP_DAILY_POWER: &str = "chiller_pump_daily_power";
pub const COOLING_TOWER_DAILY_POWER: &str = "cooling_tower_daily_power";
pub const ROOM_DAILY_ELECTRICITY: &str = "room_daily_electricity";
pub const SYSTEM_DAILY_COOLING: &str = "system_daily_cooling";

/// The five numeric daily fields, in canonical column order.
pub const DAILY_FIELDS: [&str; 5] = [
    HOST_DAILY_POWER,
    CHILLER_PUMP_DAILY_POWER,
    COOLING_TOWER_DAILY_POWER,
    ROOM_DAILY_ELECTRICITY,
    SYSTEM_DAILY_COOLING,
];

pub const TIMESTAMP: &str = "timestamp";
pub const INSTANTANEOUS_ACTIVE_POWER: &str = "instantaneous_active_power";
pub const DAILY_CUMULATIVE_ELECTRICITY: &str = "daily_cumulative_electricity";
pub const YEARLY_CUMULATIVE_ELECTRICITY: &str = "yearly_cumulative_electricity";
pub const YEARLY_MEAN_COP: &str = "yearly_mean_cop";

/// One day of plant telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub host_daily_power: f64,
    pub chiller_pump_daily_power: f64,
    pub cooling_tower_daily_power: f64,
    pub room_daily_electricity: f64,
    pub system_daily_cooling: f64,
    /// Additional named numeric columns found in the source.
    pub extra: BTreeMap<String, f64>,
}

impl DailyRecord {
    pub fn new(
        date: NaiveDate,
        host_daily_power: f64,
        chiller_pump_daily_power: f64,
        cooling_tower_daily_power: f64,
        room_daily_electricity: f64,
        system_daily_cooling: f64,
    ) -> Self {
        Self {
            date,
            host_daily_power,
            chiller_pump_daily_power,
            cooling_tower_daily_power,
            room_daily_electricity,
            system_daily_cooling,
            extra: BTreeMap::new(),
        }
    }

    /// Looks up a numeric column by canonical or extra name.
    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            HOST_DAILY_POWER => Some(self.host_daily_power),
            CHILLER_PUMP_DAILY_POWER => Some(self.chiller_pump_daily_power),
            COOLING_TOWER_DAILY_POWER => Some(self.cooling_tower_daily_power),
            ROOM_DAILY_ELECTRICITY => Some(self.room_daily_electricity),
            SYSTEM_DAILY_COOLING => Some(self.system_daily_cooling),
            other => self.extra.get(other).copied(),
        }
    }

    fn set(&mut self, name: &str, v: f64) {
        match name {
            HOST_DAILY_POWER => self.host_daily_power = v,
            CHILLER_PUMP_DAILY_POWER => self.chiller_pump_daily_power = v,
            COOLING_TOWER_DAILY_POWER => self.cooling_tower_daily_power = v,
            ROOM_DAILY_ELECTRICITY => self.room_daily_electricity = v,
            SYSTEM_DAILY_COOLING => self.system_daily_cooling = v,
            other => {
                self.extra.insert(other.to_string(), v);
            }
        }
    }

    /// Names of all numeric columns: canonical fields first, then extras sorted.
    pub fn column_names(&self) -> Vec<String> {
        DAILY_FIELDS
            .iter()
            .map(|s| s.to_string())
            .chain(self.extra.keys().cloned())
            .collect()
    }
}

/// What to do with a row holding a missing, unparseable, negative or
/// non-finite numeric cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowPolicy {
    /// Fail with the offending line number.
    #[default]
    Strict,
    /// Drop the row and keep going.
    Lenient,
}

/// Maps canonical field names to the header strings used by a source file.
/// Unmapped canonical fields are looked up under their own name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnSchema {
    aliases: BTreeMap<String, String>,
}

impl ColumnSchema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_alias(mut self, canonical: &str, header: &str) -> Self {
        self.aliases.insert(canonical.to_string(), header.to_string());
        self
    }

    /// Builds a schema from a `canonical=header` alias file.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut schema = Self::new();
        for (k, v) in parse_kv(text)? {
            schema.aliases.insert(k, v);
        }
        Ok(schema)
    }

    /// Header string expected for a canonical field.
    pub fn header_for<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.aliases
            .get(canonical)
            .map(String::as_str)
            .unwrap_or(canonical)
    }

    /// Canonical name for a header string, if the header is mapped.
    fn canonical_for(&self, header: &str, canonical_fields: &[&str]) -> Option<String> {
        canonical_fields
            .iter()
            .find(|c| self.header_for(c) == header)
            .map(|c| c.to_string())
    }
}

pub(crate) fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| format!("invalid ISO 8601 date `{s}`: {e}"))
}

pub(crate) fn parse_number(s: &str, column: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err(format!("missing value in column `{column}`"));
    }
    let v: f64 = t
        .parse()
        .map_err(|_| format!("cannot parse `{t}` as a number in column `{column}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{t}` in column `{column}`"));
    }
    Ok(v)
}

pub(crate) fn require_column(
    headers: &csv::StringRecord,
    header: &str,
    canonical: &str,
) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == header)
        .ok_or_else(|| Error::Schema {
            column: if header == canonical {
                canonical.to_string()
            } else {
                format!("{canonical} (header `{header}`)")
            },
        })
}
