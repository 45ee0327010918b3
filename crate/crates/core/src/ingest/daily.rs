use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use super::{
    parse_date, parse_number, require_column, ColumnSchema, DailyRecord, RowPolicy, DAILY_FIELDS,
    DATE,
};
use crate::error::{Error, Result};

/// Parses a daily CSV. Columns are located by header name through `schema`;
/// every header that is neither the date nor a canonical field is read as an
/// extra numeric column.
pub fn parse_daily_csv<R: Read>(
    source: R,
    schema: &ColumnSchema,
    policy: RowPolicy,
) -> Result<Vec<DailyRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .clone();

    let date_col = require_column(&headers, schema.header_for(DATE), DATE)?;
    let mut columns: Vec<(usize, String)> = Vec::new();
    for field in DAILY_FIELDS {
        let idx = require_column(&headers, schema.header_for(field), field)?;
        columns.push((idx, field.to_string()));
    }
    let mut canonical_fields: Vec<&str> = DAILY_FIELDS.to_vec();
    canonical_fields.push(DATE);
    for (idx, h) in headers.iter().enumerate() {
        let h = h.trim();
        if h.is_empty() || schema.canonical_for(h, &canonical_fields).is_some() {
            continue;
        }
        columns.push((idx, h.to_string()));
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            csv_error(e, line)
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        match parse_row(&record, date_col, &columns) {
            Ok(rec) => {
                if !seen.insert(rec.date) {
                    return Err(Error::Validation(format!(
                        "duplicate date {} at line {line}",
                        rec.date
                    )));
                }
                out.push(rec);
            }
            Err(message) => match policy {
                RowPolicy::Strict => return Err(Error::Row { line, message }),
                RowPolicy::Lenient => continue,
            },
        }
    }
    Ok(out)
}

fn parse_row(
    record: &csv::StringRecord,
    date_col: usize,
    columns: &[(usize, String)],
) -> std::result::Result<DailyRecord, String> {
    let cell = |i: usize| record.get(i).unwrap_or("");
    let date = parse_date(cell(date_col))?;
    let mut rec = DailyRecord::new(date, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (idx, name) in columns {
        let v = parse_number(cell(*idx), name)?;
        if v < 0.0 {
            return Err(format!("negative value {v} in column `{name}`"));
        }
        rec.set(name, v);
    }
    Ok(rec)
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    Error::Row {
        line,
        message: e.to_string(),
    }
}

/// Writes records as canonical CSV: `date`, the five canonical fields, then
/// the union of extra columns in name order. Floats use shortest round-trip
/// formatting.
pub fn write_daily_csv<W: Write>(records: &[DailyRecord], sink: W) -> Result<()> {
    let extras: BTreeSet<&String> = records.iter().flat_map(|r| r.extra.keys()).collect();
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = vec![DATE];
    header.extend(DAILY_FIELDS);
    header.extend(extras.iter().map(|s| s.as_str()));
    w.write_record(&header).map_err(io_error)?;
    for r in records {
        let mut row = vec![r.date.format("%Y-%m-%d").to_string()];
        for f in DAILY_FIELDS {
            row.push(format_value(r.value(f)));
        }
        for e in &extras {
            row.push(format_value(r.extra.get(*e).copied()));
        }
        w.write_record(&row).map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn format_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn io_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{HOST_DAILY_POWER, SYSTEM_DAILY_COOLING};

    const HEADER: &str = "date,host_daily_power,chiller_pump_daily_power,cooling_tower_daily_power,room_daily_electricity,system_daily_cooling\n";

    fn parse(text: &str) -> Result<Vec<DailyRecord>> {
        parse_daily_csv(text.as_bytes(), &ColumnSchema::new(), RowPolicy::Strict)
    }

    #[test]
    fn parses_table_row() {
        let recs = parse(&format!("{HEADER}2021-03-16, 40.5, 4, 0, 225.8, 2315.6\n")).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.date.to_string(), "2021-03-16");
        assert_eq!(r.host_daily_power, 40.5);
        assert_eq!(r.chiller_pump_daily_power, 4.0);
        assert_eq!(r.cooling_tower_daily_power, 0.0);
        assert_eq!(r.room_daily_electricity, 225.8);
        assert_eq!(r.system_daily_cooling, 2315.6);
    }

    #[test]
    fn empty_body_gives_empty_list() {
        assert!(parse(HEADER).unwrap().is_empty());
    }

    #[test]
    fn bad_number_reports_line() {
        let text = format!("{HEADER}2021-03-16,1,2,3,4,5\n2021-03-17,abc,2,3,4,5\n");
        match parse(&text) {
            Err(Error::Row { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_drops_bad_rows() {
        let text = format!("{HEADER}2021-03-16,1,2,3,4,5\n2021-03-17,,2,3,4,5\n2021-03-18,NaN,2,3,4,5\n");
        let recs =
            parse_daily_csv(text.as_bytes(), &ColumnSchema::new(), RowPolicy::Lenient).unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "date,host_daily_power\n";
        match parse(text) {
            Err(Error::Schema { column }) => assert_eq!(column, "chiller_pump_daily_power"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_date_rejected() {
        let text = format!("{HEADER}2021-03-16,1,2,3,4,5\n2021-03-16,1,2,3,4,5\n");
        assert!(matches!(parse(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn columns_matched_by_header_not_position() {
        let text = "system_daily_cooling,date,wet_bulb,room_daily_electricity,cooling_tower_daily_power,chiller_pump_daily_power,host_daily_power\n\
                    2315.6,2021-03-16,18.5,225.8,0,4,40.5\n";
        let recs = parse(text).unwrap();
        assert_eq!(recs[0].value(HOST_DAILY_POWER), Some(40.5));
        assert_eq!(recs[0].value(SYSTEM_DAILY_COOLING), Some(2315.6));
        assert_eq!(recs[0].value("wet_bulb"), Some(18.5));
    }

    #[test]
    fn aliases_map_original_headers() {
        let schema = ColumnSchema::from_kv(
            "host_daily_power=主机日总有功功率 /W\n\
             chiller_pump_daily_power=冷冻泵日总有功功率 /W\n\
             cooling_tower_daily_power=冷却塔日有功功率 /W\n\
             room_daily_electricity=机房日累计电量/°\n\
             system_daily_cooling=系统日累计冷量\n\
             date=日期\n",
        )
        .unwrap();
        let text = "日期,主机日总有功功率 /W,冷冻泵日总有功功率 /W,冷却塔日有功功率 /W,机房日累计电量/°,系统日累计冷量\n\
                    2021-03-17,49.2,4,0,223.7,2304.7\n";
        let recs = parse_daily_csv(text.as_bytes(), &schema, RowPolicy::Strict).unwrap();
        assert_eq!(recs[0].room_daily_electricity, 223.7);
        assert!(recs[0].extra.is_empty());
    }

    #[test]
    fn canonical_write_reparses_identically() {
        let text = String::from(
            "date,host_daily_power,chiller_pump_daily_power,cooling_tower_daily_power,room_daily_electricity,system_daily_cooling,b,a\n\
             2021-03-16,40.5,4,0,225.8,2315.6,0.1,0.30000000000000004\n"
        );
        let recs = parse(&text).unwrap();
        let mut buf = Vec::new();
        write_daily_csv(&recs, &mut buf).unwrap();
        let again = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(recs, again);
        assert!(String::from_utf8(buf).unwrap().starts_with("date,host_daily_power,chiller_pump_daily_power,cooling_tower_daily_power,room_daily_electricity,system_daily_cooling,a,b\n"));
    }
}
