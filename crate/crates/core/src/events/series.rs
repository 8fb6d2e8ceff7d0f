use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::error::{contract, Error, Result};

/// One category's contiguous daily demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SalesSeries {
    pub category: String,
    start: NaiveDate,
    values: Vec<f64>,
}

impl SalesSeries {
    pub fn new(category: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(contract(format!("sales values must be finite and >= 0, got {v}")));
        }
        Ok(Self {
            category: category.into(),
            start,
            values,
        })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Last covered day. Panics on an empty series.
    pub fn end(&self) -> NaiveDate {
        self.date(self.values.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.start + Days::new(index as u64)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let off = (date - self.start).num_days();
        (off >= 0 && (off as usize) < self.values.len()).then_some(off as usize)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.values.len()).map(|i| self.date(i))
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        write_date_column(path, "value", self.start, &self.values)
    }

    /// Reads a `date,value` CSV; dates must be consecutive days.
    pub fn from_csv(path: &Path, category: impl Into<String>) -> Result<Self> {
        let (start, values) = read_date_column(path, "value")?;
        Self::new(category, start.unwrap_or_else(super::window_start), values)
    }
}

/// Writes a `date,<name>` CSV with consecutive dates from `start`.
pub fn write_date_column(path: &Path, name: &str, start: NaiveDate, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["date", name])?;
    for (i, v) in values.iter().enumerate() {
        let d = start + Days::new(i as u64);
        w.write_record([d.to_string(), v.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

/// Reads a `date,<name>` CSV of consecutive dates. Returns the first date
/// (`None` when empty) and the values.
pub fn read_date_column(path: &Path, name: &str) -> Result<(Option<NaiveDate>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != name {
        return Err(parse_err(1, format!("expected header `date,{name}`")));
    }
    let mut start = None;
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let d: NaiveDate = rec[0]
            .trim()
            .parse()
            .map_err(|e| parse_err(line, format!("bad date: {e}")))?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|e| parse_err(line, format!("bad value: {e}")))?;
        let s = *start.get_or_insert(d);
        if d != s + Days::new(values.len() as u64) {
            return Err(parse_err(line, format!("date {d} breaks the daily sequence")));
        }
        values.push(v);
    }
    Ok((start, values))
}
