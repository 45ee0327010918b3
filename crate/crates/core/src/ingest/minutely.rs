use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime};

use super::daily::{format_value, io_error};
use super::{
    parse_number, require_column, ColumnSchema, RowPolicy, DAILY_CUMULATIVE_ELECTRICITY,
    DAILY_FIELDS, DATE, INSTANTANEOUS_ACTIVE_POWER, TIMESTAMP, YEARLY_CUMULATIVE_ELECTRICITY,
    YEARLY_MEAN_COP,
};
use crate::error::{Error, Result};

/// One gateway reading at 1-minute cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct MinutelyRecord {
    pub timestamp: NaiveDateTime,
    pub instantaneous_active_power: f64,
    pub daily_cumulative_electricity: f64,
    pub yearly_cumulative_electricity: f64,
    pub yearly_mean_cop: f64,
}

/// A daily record reconstructed from minutely readings. Only the fields the
/// gateway stream can supply are filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDailyRecord {
    pub date: NaiveDate,
    pub host_daily_power: Option<f64>,
    pub chiller_pump_daily_power: Option<f64>,
    pub cooling_tower_daily_power: Option<f64>,
    pub room_daily_electricity: Option<f64>,
    pub system_daily_cooling: Option<f64>,
}

const MINUTELY_FIELDS: [&str; 4] = [
    INSTANTANEOUS_ACTIVE_POWER,
    DAILY_CUMULATIVE_ELECTRICITY,
    YEARLY_CUMULATIVE_ELECTRICITY,
    YEARLY_MEAN_COP,
];

fn parse_timestamp(s: &str) -> std::result::Result<NaiveDateTime, String> {
    let t = s.trim();
    ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(t, fmt).ok())
        .ok_or_else(|| format!("invalid timestamp `{t}`"))
}

/// Parses gateway readings. Column lookup goes through `schema` exactly as for
/// daily files.
pub fn parse_minutely_csv<R: Read>(
    source: R,
    schema: &ColumnSchema,
    policy: RowPolicy,
) -> Result<Vec<MinutelyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Row {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let ts_col = require_column(&headers, schema.header_for(TIMESTAMP), TIMESTAMP)?;
    let cols = MINUTELY_FIELDS
        .iter()
        .map(|f| require_column(&headers, schema.header_for(f), f))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Row {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let parsed = (|| {
            let ts = parse_timestamp(record.get(ts_col).unwrap_or(""))?;
            let mut v = [0.0; 4];
            for (k, (&c, name)) in cols.iter().zip(MINUTELY_FIELDS).enumerate() {
                v[k] = parse_number(record.get(c).unwrap_or(""), name)?;
            }
            Ok::<_, String>(MinutelyRecord {
                timestamp: ts,
                instantaneous_active_power: v[0],
                daily_cumulative_electricity: v[1],
                yearly_cumulative_electricity: v[2],
                yearly_mean_cop: v[3],
            })
        })();
        match (parsed, policy) {
            (Ok(r), _) => out.push(r),
            (Err(message), RowPolicy::Strict) => return Err(Error::Row { line, message }),
            (Err(_), RowPolicy::Lenient) => {}
        }
    }
    Ok(out)
}

/// Collapses one day of readings. The room's daily electricity is the
/// cumulative reading at the latest timestamp; host power is the arithmetic
/// mean of the instantaneous readings. Input order does not matter.
pub fn aggregate_minutely(records: &[MinutelyRecord], day: NaiveDate) -> Result<PartialDailyRecord> {
    if records.is_empty() {
        return Err(Error::arg("no minutely records to aggregate"));
    }
    if let Some(r) = records.iter().find(|r| r.timestamp.date() != day) {
        return Err(Error::Validation(format!(
            "record at {} is not on {day}",
            r.timestamp
        )));
    }
    let mut sorted: Vec<&MinutelyRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.timestamp);

    let offending: Vec<String> = sorted
        .windows(2)
        .filter(|w| w[1].daily_cumulative_electricity < w[0].daily_cumulative_electricity)
        .map(|w| w[1].timestamp.format("%Y-%m-%d %H:%M:%S").to_string())
        .collect();
    if !offending.is_empty() {
        return Err(Error::Monotonicity {
            timestamps: offending,
        });
    }

    let mean_power = sorted
        .iter()
        .map(|r| r.instantaneous_active_power)
        .sum::<f64>()
        / sorted.len() as f64;
    let last = sorted[sorted.len() - 1];
    Ok(PartialDailyRecord {
        date: day,
        host_daily_power: Some(mean_power),
        chiller_pump_daily_power: None,
        cooling_tower_daily_power: None,
        room_daily_electricity: Some(last.daily_cumulative_electricity),
        system_daily_cooling: None,
    })
}

/// Groups readings by calendar day and aggregates each day, in date order.
pub fn aggregate_by_day(records: &[MinutelyRecord]) -> Result<Vec<PartialDailyRecord>> {
    let mut days: BTreeMap<NaiveDate, Vec<MinutelyRecord>> = BTreeMap::new();
    for r in records {
        days.entry(r.timestamp.date()).or_default().push(r.clone());
    }
    days.iter()
        .map(|(day, recs)| aggregate_minutely(recs, *day))
        .collect()
}

/// Writes partial daily records; unavailable fields are left empty.
pub fn write_partial_daily_csv<W: Write>(records: &[PartialDailyRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![DATE];
    header.extend(DAILY_FIELDS);
    w.write_record(&header).map_err(io_error)?;
    for r in records {
        w.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            format_value(r.host_daily_power),
            format_value(r.chiller_pump_daily_power),
            format_value(r.cooling_tower_daily_power),
            format_value(r.room_daily_electricity),
            format_value(r.system_daily_cooling),
        ])
        .map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}
