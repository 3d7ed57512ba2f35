//! CSV ingestion and log-return preparation.
//!
//! Input files carry a header with a `date` column (ISO-8601 days) plus named
//! value columns; empty cells mark missing observations. Series are aligned
//! by intersecting dates, any date missing in some series is dropped
//! entirely, and the surviving rows are turned into differenced log series —
//! so a return may span a calendar gap where rows were removed.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// A single named series of dated positive observations.
#[derive(Debug, Clone)]
pub struct RawSeries {
    pub name: String,
    /// Present (non-missing) observations, dates strictly increasing.
    pub observations: Vec<(NaiveDate, f64)>,
}

/// Date-aligned panel of log returns.
#[derive(Debug, Clone)]
pub struct AlignedPanel {
    /// Date of each return (the later endpoint of the difference).
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl AlignedPanel {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Load a CSV with a `date` column and one [`RawSeries`] per value column.
///
/// `columns` selects which value columns to load; pass an empty slice to load
/// them all. Empty cells are recorded as missing (simply absent from the
/// series); non-numeric non-empty cells, malformed dates and duplicate dates
/// are errors.
pub fn load_csv(path: impl AsRef<Path>, columns: &[String]) -> Result<Vec<RawSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.as_ref().display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("bad header: {e}")))?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("date"))
        .ok_or_else(|| Error::Data("no `date` column in header".into()))?;
    let wanted: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, h)| {
            i != date_idx && (columns.is_empty() || columns.iter().any(|c| c == h))
        })
        .map(|(i, h)| (i, h.to_string()))
        .collect();
    for c in columns {
        if !headers.iter().any(|h| h == c) {
            return Err(Error::Data(format!("column `{c}` not found in header")));
        }
    }
    if wanted.is_empty() {
        return Err(Error::Data("no value columns to load".into()));
    }
    let mut series: Vec<RawSeries> = wanted
        .iter()
        .map(|(_, name)| RawSeries { name: name.clone(), observations: Vec::new() })
        .collect();
    let mut last_date: Option<NaiveDate> = None;
    for (row_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {}: {e}", row_no + 2)))?;
        let date_str = record.get(date_idx).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d")
            .map_err(|_| Error::Data(format!("row {}: malformed date `{date_str}`", row_no + 2)))?;
        if let Some(prev) = last_date {
            if date == prev {
                return Err(Error::Data(format!("duplicate date {date}")));
            }
            if date < prev {
                return Err(Error::Data(format!(
                    "dates out of order: {date} after {prev}"
                )));
            }
        }
        last_date = Some(date);
        for (s, &(col, ref name)) in series.iter_mut().zip(&wanted) {
            let cell = record.get(col).unwrap_or("").trim();
            if cell.is_empty() {
                continue; // missing
            }
            let value: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "row {}: column `{name}` has non-numeric cell `{cell}`",
                    row_no + 2
                ))
            })?;
            s.observations.push((date, value));
        }
    }
    Ok(series)
}

/// Intersect dates across series, drop dates missing anywhere, and compute
/// per-column first differences of logs.
pub fn align_and_log_diff(series: &[RawSeries]) -> Result<AlignedPanel> {
    if series.is_empty() {
        return Err(Error::Data("need at least one series".into()));
    }
    // intersection of the date sets
    let mut common: Vec<NaiveDate> = series[0].observations.iter().map(|o| o.0).collect();
    for s in &series[1..] {
        let dates: std::collections::BTreeSet<NaiveDate> =
            s.observations.iter().map(|o| o.0).collect();
        common.retain(|d| dates.contains(d));
    }
    if common.len() < 2 {
        return Err(Error::Data(format!(
            "only {} aligned dates across series; need at least 2",
            common.len()
        )));
    }
    let mut columns = Vec::with_capacity(series.len());
    for s in series {
        let by_date: std::collections::BTreeMap<NaiveDate, f64> =
            s.observations.iter().cloned().collect();
        let mut logs = Vec::with_capacity(common.len());
        for d in &common {
            let v = by_date[d];
            if v <= 0.0 {
                return Err(Error::Data(format!(
                    "series `{}` has nonpositive value {v} on {d}; log return undefined",
                    s.name
                )));
            }
            logs.push(v.ln());
        }
        let returns: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
        columns.push((s.name.clone(), returns));
    }
    Ok(AlignedPanel { dates: common[1..].to_vec(), columns })
}
