//! Ingestion and feature engineering for the rainfall/flood tables.
//!
//! Raw input is a daily-rainfall CSV (`Station,Year,Month,1,...,31`) plus a
//! per-year flood CSV (`Station,Year,Flood`). This module parses both,
//! zero-fills missing day cells, sums days into monthly and annual totals,
//! joins the flood label on (station, year), and encodes the categorical
//! columns: station names to consecutive integers in lexicographic order,
//! flood YES/NO to 1/0.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DAYS_PER_MONTH: usize = 31;
pub const MONTHS_PER_YEAR: usize = 12;

pub const MONTH_NAMES: [&str; MONTHS_PER_YEAR] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}, column {column}: {message}")]
    Cell { row: usize, column: String, message: String },
    #[error("bad header: {0}")]
    Header(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("duplicate record for ({station}, {year}, month {month})")]
    DuplicateMonth { station: String, year: i32, month: u32 },
    #[error("record ({station}, {year}, month {month}) still has missing day cells; impute first")]
    MissingDayCells { station: String, year: i32, month: u32 },
    #[error("rainfall total overflow for ({station}, {year})")]
    TotalOverflow { station: String, year: i32 },
    #[error("unmatched keys in label merge: {0}")]
    MergeUnmatched(String),
    #[error("duplicate flood record for ({station}, {year})")]
    DuplicateFloodRecord { station: String, year: i32 },
    #[error("invalid flood label {label:?} for ({station}, {year}); expected YES or NO")]
    InvalidFloodLabel { station: String, year: i32, label: String },
    #[error("duplicate (station, year) pair ({station}, {year})")]
    DuplicateStationYear { station: String, year: i32 },
    #[error("station codes are not a consecutive 0..S-1 encoding: {0}")]
    BadStationCodes(String),
    #[error("row {row}: annual total {annual} does not equal the monthly sum {sum}")]
    AnnualMismatch { row: usize, annual: u32, sum: u32 },
}

/// One station-month of daily rainfall. Short months and absent readings are
/// `None` until [`impute_missing`] runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailyRainfallRecord {
    pub station: String,
    pub year: i32,
    pub month: u32,
    pub days: [Option<u32>; DAYS_PER_MONTH],
}

/// One station-year flood observation; `flood` is the literal "YES" or "NO"
/// when parsed from CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloodRecord {
    pub station: String,
    pub year: i32,
    pub flood: String,
}

/// Monthly and annual rainfall totals for one station-year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonthlyTotals {
    pub station: String,
    pub year: i32,
    pub monthly: [u32; MONTHS_PER_YEAR],
    pub annual: u32,
}

/// Station-years whose coverage was short of twelve month-records; absent
/// months were treated as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonthCoverageWarning {
    pub station: String,
    pub year: i32,
    pub missing_months: Vec<u32>,
}

impl std::fmt::Display for MonthCoverageWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}) missing months {:?} treated as zero",
            self.station, self.year, self.missing_months
        )
    }
}

/// A feature row with the flood label still textual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedRow {
    pub station: String,
    pub year: i32,
    pub monthly: [u32; MONTHS_PER_YEAR],
    pub annual: u32,
    pub flood_label: String,
}

/// Fully encoded example: station id, twelve monthly totals, annual total,
/// binary flood label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub station_id: u32,
    pub station_name: String,
    pub year: i32,
    pub monthly: [u32; MONTHS_PER_YEAR],
    pub annual: u32,
    pub flood: u8,
}

/// Encoded dataset plus the station-name code map (index = station id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    rows: Vec<FeatureRow>,
    stations: Vec<String>,
}

impl LabeledDataset {
    /// Validates the (station, year) uniqueness and code-map invariants.
    pub fn from_parts(rows: Vec<FeatureRow>, stations: Vec<String>) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if !seen.insert((row.station_name.clone(), row.year)) {
                return Err(DatasetError::DuplicateStationYear {
                    station: row.station_name.clone(),
                    year: row.year,
                });
            }
            let mapped = stations.get(row.station_id as usize);
            if mapped != Some(&row.station_name) {
                return Err(DatasetError::BadStationCodes(format!(
                    "row ({}, {}) claims id {} but the code map says {:?}",
                    row.station_name, row.year, row.station_id, mapped
                )));
            }
        }
        let distinct: BTreeSet<&String> = stations.iter().collect();
        if distinct.len() != stations.len() {
            return Err(DatasetError::BadStationCodes(
                "code map contains duplicate names".into(),
            ));
        }
        Ok(Self { rows, stations })
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    /// Station names indexed by code.
    pub fn station_names(&self) -> &[String] {
        &self.stations
    }

    pub fn station_id(&self, name: &str) -> Option<u32> {
        self.stations.iter().position(|s| s == name).map(|i| i as u32)
    }

    pub fn station_name(&self, id: u32) -> Option<&str> {
        self.stations.get(id as usize).map(String::as_str)
    }

    /// Model-input matrix, labels, and column names. Columns are Station,
    /// Year, the twelve months, and optionally Annual.
    pub fn feature_matrix(&self, include_annual: bool) -> (Vec<Vec<f64>>, Vec<u8>, Vec<String>) {
        let mut names = vec!["Station".to_string(), "Year".to_string()];
        names.extend(MONTH_NAMES.iter().map(|m| m.to_string()));
        if include_annual {
            names.push("Annual".to_string());
        }
        let mut matrix = Vec::with_capacity(self.rows.len());
        let mut labels = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut features = Vec::with_capacity(names.len());
            features.push(row.station_id as f64);
            features.push(row.year as f64);
            features.extend(row.monthly.iter().map(|&v| v as f64));
            if include_annual {
                features.push(row.annual as f64);
            }
            matrix.push(features);
            labels.push(row.flood);
        }
        (matrix, labels, names)
    }

    /// Processed-dataset CSV with the encoded station id first.
    pub fn to_processed_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["Station".to_string(), "StationName".to_string(), "Year".to_string()];
        header.extend(MONTH_NAMES.iter().map(|m| m.to_string()));
        header.push("Annual".to_string());
        header.push("Flood".to_string());
        writer.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut cells = vec![
                row.station_id.to_string(),
                row.station_name.clone(),
                row.year.to_string(),
            ];
            cells.extend(row.monthly.iter().map(|v| v.to_string()));
            cells.push(row.annual.to_string());
            cells.push(row.flood.to_string());
            writer.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    /// Inverse of [`LabeledDataset::to_processed_csv`].
    pub fn from_processed_csv<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut csv_reader = csv::ReaderBuilder::new().from_reader(reader);
        let headers = csv_reader.headers()?.clone();
        let expected_len = 3 + MONTHS_PER_YEAR + 2;
        if headers.len() != expected_len
            || headers.get(0) != Some("Station")
            || headers.get(1) != Some("StationName")
            || headers.get(2) != Some("Year")
            || headers.get(expected_len - 1) != Some("Flood")
        {
            return Err(DatasetError::Header(format!(
                "expected processed-dataset header Station,StationName,Year,January,...,Annual,Flood, got {:?}",
                headers
            )));
        }
        let mut rows = Vec::new();
        let mut code_map: BTreeMap<u32, String> = BTreeMap::new();
        for (i, record) in csv_reader.records().enumerate() {
            let row_no = i + 1;
            let record = record?;
            let cell = |idx: usize, col: &str| -> Result<&str, DatasetError> {
                record.get(idx).map(str::trim).filter(|s| !s.is_empty()).ok_or_else(|| {
                    DatasetError::Cell {
                        row: row_no,
                        column: col.to_string(),
                        message: "missing value".into(),
                    }
                })
            };
            let parse_u32 = |idx: usize, col: &str| -> Result<u32, DatasetError> {
                cell(idx, col)?.parse().map_err(|_| DatasetError::Cell {
                    row: row_no,
                    column: col.to_string(),
                    message: format!("invalid integer {:?}", record.get(idx).unwrap_or("")),
                })
            };
            let station_id = parse_u32(0, "Station")?;
            let station_name = cell(1, "StationName")?.to_string();
            let year: i32 = cell(2, "Year")?.parse().map_err(|_| DatasetError::Cell {
                row: row_no,
                column: "Year".into(),
                message: format!("invalid integer {:?}", record.get(2).unwrap_or("")),
            })?;
            let mut monthly = [0u32; MONTHS_PER_YEAR];
            for (m, slot) in monthly.iter_mut().enumerate() {
                *slot = parse_u32(3 + m, MONTH_NAMES[m])?;
            }
            let annual = parse_u32(3 + MONTHS_PER_YEAR, "Annual")?;
            let sum: u32 = monthly.iter().sum();
            if sum != annual {
                return Err(DatasetError::AnnualMismatch { row: row_no, annual, sum });
            }
            let flood = parse_u32(4 + MONTHS_PER_YEAR, "Flood")?;
            if flood > 1 {
                return Err(DatasetError::Cell {
                    row: row_no,
                    column: "Flood".into(),
                    message: format!("expected 0 or 1, got {flood}"),
                });
            }
            if let Some(existing) = code_map.get(&station_id) {
                if existing != &station_name {
                    return Err(DatasetError::BadStationCodes(format!(
                        "id {station_id} maps to both {existing:?} and {station_name:?}"
                    )));
                }
            } else {
                code_map.insert(station_id, station_name.clone());
            }
            rows.push(FeatureRow {
                station_id,
                station_name,
                year,
                monthly,
                annual,
                flood: flood as u8,
            });
        }
        let stations: Vec<String> = code_map.values().cloned().collect();
        let consecutive = code_map.keys().copied().eq(0..code_map.len() as u32);
        if !consecutive {
            return Err(DatasetError::BadStationCodes(format!(
                "ids {:?} are not consecutive from 0",
                code_map.keys().collect::<Vec<_>>()
            )));
        }
        LabeledDataset::from_parts(rows, stations)
    }
}

const MISSING_TOKENS: [&str; 3] = ["NaN", "nan", "NA"];

fn is_missing_token(cell: &str) -> bool {
    cell.is_empty() || MISSING_TOKENS.contains(&cell)
}

/// Parse the raw daily-rainfall CSV. Day cells may be empty or a NaN token;
/// short rows are right-padded with missing markers. Row order is preserved.
pub fn parse_daily_rainfall<R: Read>(reader: R) -> Result<Vec<DailyRainfallRecord>, DatasetError> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let fixed = ["Station", "Year", "Month"];
    for (i, name) in fixed.iter().enumerate() {
        if headers.get(i).map(str::trim) != Some(*name) {
            return Err(DatasetError::Header(format!(
                "expected column {} to be {name:?}, got {:?}",
                i + 1,
                headers.get(i).unwrap_or("")
            )));
        }
    }
    if headers.len() > fixed.len() + DAYS_PER_MONTH {
        return Err(DatasetError::Header(format!(
            "too many columns: {} (expected at most {} day columns)",
            headers.len(),
            DAYS_PER_MONTH
        )));
    }

    let mut records = Vec::new();
    for (i, result) in csv_reader.records().enumerate() {
        let row = i + 1;
        let record = result?;
        if record.len() > fixed.len() + DAYS_PER_MONTH {
            return Err(DatasetError::Cell {
                row,
                column: format!("{}", record.len()),
                message: format!(
                    "row has {} cells; expected at most {}",
                    record.len(),
                    fixed.len() + DAYS_PER_MONTH
                ),
            });
        }
        let required = |idx: usize, col: &str| -> Result<&str, DatasetError> {
            record.get(idx).map(str::trim).filter(|s| !s.is_empty()).ok_or_else(|| {
                DatasetError::Cell {
                    row,
                    column: col.to_string(),
                    message: "missing value".into(),
                }
            })
        };
        let station = required(0, "Station")?.to_string();
        let year: i32 = required(1, "Year")?.parse().map_err(|_| DatasetError::Cell {
            row,
            column: "Year".into(),
            message: format!("invalid integer {:?}", record.get(1).unwrap_or("")),
        })?;
        let month: u32 = required(2, "Month")?.parse().map_err(|_| DatasetError::Cell {
            row,
            column: "Month".into(),
            message: format!("invalid integer {:?}", record.get(2).unwrap_or("")),
        })?;
        if !(1..=12).contains(&month) {
            return Err(DatasetError::Cell {
                row,
                column: "Month".into(),
                message: format!("month {month} outside 1-12"),
            });
        }
        let mut days = [None; DAYS_PER_MONTH];
        for (d, slot) in days.iter_mut().enumerate() {
            let Some(cell) = record.get(fixed.len() + d) else {
                break; // short row: remaining days stay missing
            };
            let cell = cell.trim();
            if is_missing_token(cell) {
                continue;
            }
            *slot = Some(cell.parse().map_err(|_| DatasetError::Cell {
                row,
                column: (d + 1).to_string(),
                message: format!("invalid rainfall value {cell:?}"),
            })?);
        }
        records.push(DailyRainfallRecord { station, year, month, days });
    }
    Ok(records)
}

/// Parse the flood-occurrence CSV (`Station,Year,Flood` with literal YES/NO).
pub fn parse_flood_csv<R: Read>(reader: R) -> Result<Vec<FloodRecord>, DatasetError> {
    let mut csv_reader = csv::ReaderBuilder::new().from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let expected = ["Station", "Year", "Flood"];
    for (i, name) in expected.iter().enumerate() {
        if headers.get(i).map(str::trim) != Some(*name) {
            return Err(DatasetError::Header(format!(
                "expected flood CSV header Station,Year,Flood, got {:?}",
                headers
            )));
        }
    }
    let mut records = Vec::new();
    for (i, result) in csv_reader.records().enumerate() {
        let row = i + 1;
        let record = result?;
        let required = |idx: usize, col: &str| -> Result<&str, DatasetError> {
            record.get(idx).map(str::trim).filter(|s| !s.is_empty()).ok_or_else(|| {
                DatasetError::Cell {
                    row,
                    column: col.to_string(),
                    message: "missing value".into(),
                }
            })
        };
        let station = required(0, "Station")?.to_string();
        let year: i32 = required(1, "Year")?.parse().map_err(|_| DatasetError::Cell {
            row,
            column: "Year".into(),
            message: format!("invalid integer {:?}", record.get(1).unwrap_or("")),
        })?;
        let flood = required(2, "Flood")?.to_string();
        if flood != "YES" && flood != "NO" {
            return Err(DatasetError::Cell {
                row,
                column: "Flood".into(),
                message: format!("expected YES or NO, got {flood:?}"),
            });
        }
        records.push(FloodRecord { station, year, flood });
    }
    Ok(records)
}

/// Replace every missing day cell with zero. Returns the new records and the
/// number of cells replaced.
pub fn impute_missing(records: &[DailyRainfallRecord]) -> (Vec<DailyRainfallRecord>, usize) {
    let mut replaced = 0usize;
    let imputed = records
        .iter()
        .map(|record| {
            let mut out = record.clone();
            for day in out.days.iter_mut() {
                if day.is_none() {
                    *day = Some(0);
                    replaced += 1;
                }
            }
            out
        })
        .collect();
    (imputed, replaced)
}

/// Sum day cells into per-month totals and an annual total per station-year.
///
/// Output is ordered by (station, year). Station-years with fewer than twelve
/// month-records keep the absent months at zero and produce a warning.
pub fn aggregate_monthly(
    records: &[DailyRainfallRecord],
) -> Result<(Vec<MonthlyTotals>, Vec<MonthCoverageWarning>), DatasetError> {
    let mut groups: BTreeMap<(String, i32), [Option<u32>; MONTHS_PER_YEAR]> = BTreeMap::new();
    for record in records {
        let mut total: u64 = 0;
        for (d, day) in record.days.iter().enumerate() {
            match day {
                Some(v) => total += u64::from(*v),
                None => {
                    let _ = d;
                    return Err(DatasetError::MissingDayCells {
                        station: record.station.clone(),
                        year: record.year,
                        month: record.month,
                    });
                }
            }
        }
        let total = u32::try_from(total).map_err(|_| DatasetError::TotalOverflow {
            station: record.station.clone(),
            year: record.year,
        })?;
        let slot = &mut groups
            .entry((record.station.clone(), record.year))
            .or_insert([None; MONTHS_PER_YEAR])[(record.month - 1) as usize];
        if slot.is_some() {
            return Err(DatasetError::DuplicateMonth {
                station: record.station.clone(),
                year: record.year,
                month: record.month,
            });
        }
        *slot = Some(total);
    }

    let mut totals = Vec::with_capacity(groups.len());
    let mut warnings = Vec::new();
    for ((station, year), months) in groups {
        let missing: Vec<u32> = months
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_none())
            .map(|(i, _)| i as u32 + 1)
            .collect();
        if !missing.is_empty() {
            warnings.push(MonthCoverageWarning {
                station: station.clone(),
                year,
                missing_months: missing,
            });
        }
        let mut monthly = [0u32; MONTHS_PER_YEAR];
        let mut annual: u64 = 0;
        for (i, m) in months.iter().enumerate() {
            monthly[i] = m.unwrap_or(0);
            annual += u64::from(monthly[i]);
        }
        let annual = u32::try_from(annual)
            .map_err(|_| DatasetError::TotalOverflow { station: station.clone(), year })?;
        totals.push(MonthlyTotals { station, year, monthly, annual });
    }
    Ok((totals, warnings))
}

/// Join flood labels onto monthly totals, exact on (station, year).
/// Unmatched keys on either side fail the merge and are all listed.
pub fn merge_flood_labels(
    totals: &[MonthlyTotals],
    floods: &[FloodRecord],
) -> Result<Vec<MergedRow>, DatasetError> {
    let mut flood_map: BTreeMap<(&str, i32), &str> = BTreeMap::new();
    for record in floods {
        if flood_map
            .insert((record.station.as_str(), record.year), record.flood.as_str())
            .is_some()
        {
            return Err(DatasetError::DuplicateFloodRecord {
                station: record.station.clone(),
                year: record.year,
            });
        }
    }

    let feature_keys: BTreeSet<(&str, i32)> =
        totals.iter().map(|t| (t.station.as_str(), t.year)).collect();
    let features_without_flood: Vec<_> = feature_keys
        .iter()
        .filter(|k| !flood_map.contains_key(*k))
        .collect();
    let floods_without_features: Vec<_> = flood_map
        .keys()
        .filter(|k| !feature_keys.contains(*k))
        .collect();
    if !features_without_flood.is_empty() || !floods_without_features.is_empty() {
        return Err(DatasetError::MergeUnmatched(format!(
            "feature rows without flood label: {features_without_flood:?}; flood records without feature row: {floods_without_features:?}"
        )));
    }

    Ok(totals
        .iter()
        .map(|t| MergedRow {
            station: t.station.clone(),
            year: t.year,
            monthly: t.monthly,
            annual: t.annual,
            flood_label: flood_map[&(t.station.as_str(), t.year)].to_string(),
        })
        .collect())
}

/// Encode stations to consecutive integers in lexicographic name order and
/// the flood label to 1/0, without adding columns.
pub fn encode_labels(rows: &[MergedRow]) -> Result<LabeledDataset, DatasetError> {
    let stations: Vec<String> = rows
        .iter()
        .map(|r| r.station.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let id_of = |name: &str| -> u32 {
        stations.binary_search_by(|s| s.as_str().cmp(name)).expect("station present") as u32
    };
    let mut encoded = Vec::with_capacity(rows.len());
    for row in rows {
        let flood = match row.flood_label.as_str() {
            "YES" => 1,
            "NO" => 0,
            other => {
                return Err(DatasetError::InvalidFloodLabel {
                    station: row.station.clone(),
                    year: row.year,
                    label: other.to_string(),
                })
            }
        };
        encoded.push(FeatureRow {
            station_id: id_of(&row.station),
            station_name: row.station.clone(),
            year: row.year,
            monthly: row.monthly,
            annual: row.annual,
            flood,
        });
    }
    LabeledDataset::from_parts(encoded, stations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rainfall_csv_header() -> String {
        let days: Vec<String> = (1..=31).map(|d| d.to_string()).collect();
        format!("Station,Year,Month,{}\n", days.join(","))
    }

    fn row_with_days(station: &str, year: i32, month: u32, days: &[&str]) -> String {
        format!("{station},{year},{month},{}\n", days.join(","))
    }

    fn record(station: &str, year: i32, month: u32, days: [Option<u32>; 31]) -> DailyRainfallRecord {
        DailyRainfallRecord { station: station.into(), year, month, days }
    }

    fn full_month(station: &str, year: i32, month: u32, day_one: u32) -> DailyRainfallRecord {
        let mut days = [Some(0u32); 31];
        days[0] = Some(day_one);
        record(station, year, month, days)
    }

    #[test]
    fn parse_day_value_lands_in_right_column() {
        let mut days = vec!["0"; 31];
        days[2] = "3";
        let csv = format!("{}{}", rainfall_csv_header(), row_with_days("Dhaka", 1980, 1, &days));
        let records = parse_daily_rainfall(csv.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].days[2], Some(3));
        assert!(records[0].days.iter().enumerate().all(|(i, d)| i == 2 || *d == Some(0)));
    }

    #[test]
    fn parse_header_only_is_empty() {
        let records = parse_daily_rainfall(rainfall_csv_header().as_bytes()).unwrap();
        assert!(records.is_empty());
    }

    #[test]
    fn parse_trailing_nan_cells_become_missing() {
        let mut days = vec!["0"; 31];
        days[29] = "NaN";
        days[30] = "NaN";
        let csv = format!("{}{}", rainfall_csv_header(), row_with_days("Dhaka", 1980, 2, &days));
        let records = parse_daily_rainfall(csv.as_bytes()).unwrap();
        assert_eq!(records[0].days[29], None);
        assert_eq!(records[0].days[30], None);
        assert_eq!(records[0].days[28], Some(0));
    }

    #[test]
    fn parse_short_rows_are_right_padded() {
        let csv = format!("{}Dhaka,1980,4,1,2\n", rainfall_csv_header());
        let records = parse_daily_rainfall(csv.as_bytes()).unwrap();
        assert_eq!(records[0].days[0], Some(1));
        assert_eq!(records[0].days[1], Some(2));
        assert!(records[0].days[2..].iter().all(Option::is_none));
    }

    #[test]
    fn parse_accepts_all_missing_tokens() {
        let csv = format!("{}Dhaka,1980,1,,NaN,nan,NA,7\n", rainfall_csv_header());
        let records = parse_daily_rainfall(csv.as_bytes()).unwrap();
        assert_eq!(&records[0].days[..5], &[None, None, None, None, Some(7)]);
    }

    #[test]
    fn parse_errors_name_row_and_column() {
        let csv = format!("{}Dhaka,1980,1,0,bogus\n", rainfall_csv_header());
        let err = parse_daily_rainfall(csv.as_bytes()).unwrap_err();
        match err {
            DatasetError::Cell { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "2");
            }
            other => panic!("unexpected error {other:?}"),
        }

        let csv = format!("{}Dhaka,1980,13,0\n", rainfall_csv_header());
        assert!(matches!(
            parse_daily_rainfall(csv.as_bytes()),
            Err(DatasetError::Cell { column, .. }) if column == "Month"
        ));

        let csv = format!("{}Dhaka,,3,0\n", rainfall_csv_header());
        assert!(matches!(
            parse_daily_rainfall(csv.as_bytes()),
            Err(DatasetError::Cell { column, .. }) if column == "Year"
        ));
    }

    #[test]
    fn parse_rejects_wrong_header() {
        let err = parse_daily_rainfall("Name,Year,Month,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Header(_)));
    }

    #[test]
    fn impute_fills_trailing_days() {
        let mut days = [Some(1u32); 31];
        days[29] = None;
        days[30] = None;
        let (imputed, replaced) = impute_missing(&[record("Dhaka", 1980, 2, days)]);
        assert_eq!(replaced, 2);
        assert_eq!(imputed[0].days[29], Some(0));
        assert_eq!(imputed[0].days[30], Some(0));
    }

    #[test]
    fn impute_is_identity_on_complete_records() {
        let complete = record("Dhaka", 1983, 11, [Some(2); 31]);
        let (imputed, replaced) = impute_missing(std::slice::from_ref(&complete));
        assert_eq!(replaced, 0);
        assert_eq!(imputed[0], complete);
    }

    #[test]
    fn impute_fills_mid_month_gaps() {
        let mut days = [Some(0u32); 31];
        days[13] = None;
        days[14] = None;
        let (imputed, replaced) = impute_missing(&[record("Dhaka", 1983, 11, days)]);
        assert_eq!(replaced, 2);
        assert!(imputed[0].days.iter().all(|d| *d == Some(0)));
    }

    /// A year whose monthly totals are carried entirely by day 1.
    fn dhaka_1980() -> Vec<DailyRainfallRecord> {
        let totals = [3, 32, 54, 147, 414, 323, 380, 269, 296, 300, 0, 0];
        totals
            .iter()
            .enumerate()
            .map(|(m, &t)| full_month("Dhaka", 1980, m as u32 + 1, t))
            .collect()
    }

    #[test]
    fn aggregate_dhaka_1980() {
        let (totals, warnings) = aggregate_monthly(&dhaka_1980()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(totals.len(), 1);
        assert_eq!(totals[0].monthly[0], 3);
        assert_eq!(totals[0].annual, 2218);
    }

    #[test]
    fn aggregate_sitakunda_2020() {
        let monthly = [46, 0, 0, 171, 244, 711, 1472, 657, 550, 340, 54, 0];
        let records: Vec<_> = monthly
            .iter()
            .enumerate()
            .map(|(m, &t)| full_month("Sitakunda", 2020, m as u32 + 1, t))
            .collect();
        let (totals, _) = aggregate_monthly(&records).unwrap();
        assert_eq!(totals[0].annual, 4245);
    }

    #[test]
    fn aggregate_all_zero_year() {
        let records: Vec<_> = (1..=12).map(|m| full_month("X", 2000, m, 0)).collect();
        let (totals, _) = aggregate_monthly(&records).unwrap();
        assert_eq!(totals[0].monthly, [0; 12]);
        assert_eq!(totals[0].annual, 0);
    }

    #[test]
    fn aggregate_warns_on_missing_months() {
        let records = vec![full_month("X", 2000, 1, 5)];
        let (totals, warnings) = aggregate_monthly(&records).unwrap();
        assert_eq!(totals[0].annual, 5);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].missing_months.len(), 11);
    }

    #[test]
    fn aggregate_rejects_duplicates_and_unimputed() {
        let records = vec![full_month("X", 2000, 1, 5), full_month("X", 2000, 1, 6)];
        assert!(matches!(
            aggregate_monthly(&records),
            Err(DatasetError::DuplicateMonth { month: 1, .. })
        ));

        let mut days = [Some(0u32); 31];
        days[4] = None;
        assert!(matches!(
            aggregate_monthly(&[record("X", 2000, 1, days)]),
            Err(DatasetError::MissingDayCells { .. })
        ));
    }

    fn flood(station: &str, year: i32, label: &str) -> FloodRecord {
        FloodRecord { station: station.into(), year, flood: label.into() }
    }

    fn totals(station: &str, year: i32, annual: u32) -> MonthlyTotals {
        let mut monthly = [0u32; 12];
        monthly[0] = annual;
        MonthlyTotals { station: station.into(), year, monthly, annual }
    }

    #[test]
    fn merge_attaches_labels() {
        let merged = merge_flood_labels(
            &[totals("Dhaka", 1980, 2218), totals("Dhaka", 1981, 1965)],
            &[flood("Dhaka", 1980, "YES"), flood("Dhaka", 1981, "NO")],
        )
        .unwrap();
        assert_eq!(merged[0].flood_label, "YES");
        assert_eq!(merged[1].flood_label, "NO");
    }

    #[test]
    fn merge_lists_unmatched_keys() {
        let err = merge_flood_labels(&[totals("X", 1999, 1)], &[]).unwrap_err();
        match err {
            DatasetError::MergeUnmatched(msg) => assert!(msg.contains("1999"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn merge_count_matches_features_on_total_join() {
        let features = vec![totals("A", 1, 1), totals("B", 1, 2), totals("B", 2, 3)];
        let floods = vec![flood("A", 1, "NO"), flood("B", 1, "YES"), flood("B", 2, "NO")];
        let merged = merge_flood_labels(&features, &floods).unwrap();
        assert_eq!(merged.len(), features.len());
    }

    fn merged(station: &str, year: i32, label: &str) -> MergedRow {
        MergedRow {
            station: station.into(),
            year,
            monthly: [0; 12],
            annual: 0,
            flood_label: label.into(),
        }
    }

    #[test]
    fn encode_maps_labels_and_stations() {
        let ds = encode_labels(&[
            merged("Sitakunda", 2020, "YES"),
            merged("Dhaka", 1980, "NO"),
        ])
        .unwrap();
        assert_eq!(ds.station_id("Dhaka"), Some(0));
        assert_eq!(ds.station_id("Sitakunda"), Some(1));
        let by_name: BTreeMap<_, _> =
            ds.rows().iter().map(|r| (r.station_name.clone(), r.flood)).collect();
        assert_eq!(by_name["Sitakunda"], 1);
        assert_eq!(by_name["Dhaka"], 0);
    }

    #[test]
    fn encode_rejects_unknown_label() {
        let err = encode_labels(&[merged("Dhaka", 1980, "MAYBE")]).unwrap_err();
        assert!(matches!(err, DatasetError::InvalidFloodLabel { label, .. } if label == "MAYBE"));
    }

    #[test]
    fn encode_is_a_bijection_on_station_names() {
        let names = ["Khulna", "Dhaka", "Bogra", "Sitakunda", "Barisal"];
        let rows: Vec<_> = names.iter().map(|n| merged(n, 2001, "NO")).collect();
        let ds = encode_labels(&rows).unwrap();
        let mut decoded: Vec<&str> = (0..ds.station_names().len() as u32)
            .map(|id| ds.station_name(id).unwrap())
            .collect();
        decoded.sort_unstable();
        let mut expected = names.to_vec();
        expected.sort_unstable();
        assert_eq!(decoded, expected);
    }

    #[test]
    fn processed_csv_round_trips_bit_exactly() {
        let rows = vec![
            merged("Dhaka", 1980, "YES"),
            merged("Dhaka", 1981, "NO"),
            merged("Sitakunda", 2020, "YES"),
        ];
        let ds = encode_labels(&rows).unwrap();
        let text = ds.to_processed_csv();
        let reparsed = LabeledDataset::from_processed_csv(text.as_bytes()).unwrap();
        assert_eq!(reparsed, ds);
        assert_eq!(reparsed.to_processed_csv(), text);
    }

    #[test]
    fn processed_csv_rejects_corrupt_rows() {
        let header = "Station,StationName,Year,January,February,March,April,May,June,July,August,September,October,November,December,Annual,Flood\n";
        // annual does not equal the monthly sum
        let bad_annual = format!("{header}0,Dhaka,1980,1,0,0,0,0,0,0,0,0,0,0,0,5,1\n");
        assert!(matches!(
            LabeledDataset::from_processed_csv(bad_annual.as_bytes()),
            Err(DatasetError::AnnualMismatch { row: 1, annual: 5, sum: 1 })
        ));

        let bad_flood = format!("{header}0,Dhaka,1980,1,0,0,0,0,0,0,0,0,0,0,0,1,2\n");
        assert!(matches!(
            LabeledDataset::from_processed_csv(bad_flood.as_bytes()),
            Err(DatasetError::Cell { column, .. }) if column == "Flood"
        ));

        // ids must be consecutive from zero
        let gap = format!(
            "{header}0,Dhaka,1980,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n2,Bogra,1980,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n"
        );
        assert!(matches!(
            LabeledDataset::from_processed_csv(gap.as_bytes()),
            Err(DatasetError::BadStationCodes(_))
        ));
    }

    #[test]
    fn feature_matrix_columns() {
        let ds = encode_labels(&[merged("Dhaka", 1980, "YES")]).unwrap();
        let (matrix, labels, names) = ds.feature_matrix(true);
        assert_eq!(names.len(), 15);
        assert_eq!(matrix[0].len(), 15);
        assert_eq!(labels, vec![1]);
        let (matrix, _, names) = ds.feature_matrix(false);
        assert_eq!(names.len(), 14);
        assert_eq!(matrix[0].len(), 14);
        assert!(!names.contains(&"Annual".to_string()));
    }

    proptest! {
        #[test]
        fn impute_leaves_no_missing_cells(mask in proptest::collection::vec(any::<bool>(), 31)) {
            let mut days = [Some(1u32); 31];
            for (slot, missing) in days.iter_mut().zip(&mask) {
                if *missing {
                    *slot = None;
                }
            }
            let (imputed, replaced) = impute_missing(&[record("P", 1990, 6, days)]);
            prop_assert_eq!(replaced, mask.iter().filter(|m| **m).count());
            prop_assert!(imputed[0].days.iter().all(Option::is_some));
        }

        #[test]
        fn aggregate_is_permutation_invariant(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut records = Vec::new();
            for (s, station) in ["A", "B"].iter().enumerate() {
                for year in 2000..2003 {
                    for month in 1..=12 {
                        records.push(full_month(station, year, month, month + s as u32));
                    }
                }
            }
            let baseline = aggregate_monthly(&records).unwrap();
            let mut shuffled = records.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate_monthly(&shuffled).unwrap(), baseline);
        }

        #[test]
        fn annual_equals_monthly_sum(values in proptest::collection::vec(0u32..2000, 12)) {
            let records: Vec<_> = values
                .iter()
                .enumerate()
                .map(|(m, &t)| full_month("S", 1999, m as u32 + 1, t))
                .collect();
            let (totals, _) = aggregate_monthly(&records).unwrap();
            prop_assert_eq!(totals[0].annual, totals[0].monthly.iter().sum::<u32>());
        }
    }
}
