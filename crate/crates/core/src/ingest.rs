//! CSV ingestion: price tables, loss returns and observation matrices.
//!
//! Dialect: UTF-8, comma separator, mandatory header row, `.` as decimal
//! point, no thousands separators. Parse errors carry the 1-based line of
//! the file (the header is line 1) and the 1-based field position.

use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Tokens treated as a missing price.
pub const MISSING_TOKENS: [&str; 6] = ["", "NA", "NaN", "nan", "null", "."];

const DATE_FORMATS: [&str; 3] = ["%Y-%m-%d", "%Y/%m/%d", "%Y%m%d"];

/// Daily prices: one date column followed by `p` named series that may have
/// gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    series: Vec<Vec<Option<f64>>>,
}

/// Loss returns with the date of each return (the later of the two prices).
///
/// Kept as plain columns because a single return row is a valid result but
/// not a valid [`DataMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct Returns {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    /// Rows of the price table with every series present.
    pub complete_rows: usize,
}

impl Returns {
    pub fn n(&self) -> usize {
        self.dates.len()
    }

    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::from_columns(self.columns.clone())?.with_labels(self.names.clone())
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s, f).ok())
}

fn parse_err(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column,
        message: message.into(),
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn line_of(record: &csv::StringRecord, fallback: usize) -> usize {
    record.position().map_or(fallback, |p| p.line() as usize)
}

impl PriceTable {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, series: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if names.len() != series.len() || names.is_empty() {
            return Err(Error::InvalidData(format!(
                "{} series names for {} series",
                names.len(),
                series.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::InvalidData(format!(
                "at least two dates are required, found {}",
                dates.len()
            )));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData(format!(
                "dates must be strictly increasing ({} then {})",
                dates[i],
                dates[i + 1]
            )));
        }
        for (name, s) in names.iter().zip(&series) {
            if s.len() != dates.len() {
                return Err(Error::DimensionMismatch {
                    expected: dates.len(),
                    found: s.len(),
                });
            }
            if let Some(v) = s.iter().flatten().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidData(format!(
                    "series {name} has a nonpositive or non-finite price {v}"
                )));
            }
        }
        Ok(Self { dates, names, series })
    }

    /// Parses `date,NAME1,...,NAMEp`. Empty cells and the tokens in
    /// [`MISSING_TOKENS`] are missing values.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = reader(input);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(parse_err(1, header.len(), "header needs a date column and at least one series"));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut series = vec![Vec::new(); names.len()];
        for (idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = line_of(&rec, idx + 2);
            if rec.len() != header.len() {
                return Err(parse_err(
                    line,
                    rec.len().min(header.len()) + 1,
                    format!("expected {} fields, found {}", header.len(), rec.len()),
                ));
            }
            let date = parse_date(&rec[0])
                .ok_or_else(|| parse_err(line, 1, format!("unrecognized date {:?}", &rec[0])))?;
            if let Some(prev) = dates.last() {
                if date <= *prev {
                    return Err(parse_err(line, 1, format!("date {date} does not follow {prev}")));
                }
            }
            dates.push(date);
            for (j, field) in rec.iter().skip(1).enumerate() {
                let value = if MISSING_TOKENS.contains(&field) {
                    None
                } else {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| parse_err(line, j + 2, format!("not a number: {field:?}")))?;
                    if !(v.is_finite() && v > 0.0) {
                        return Err(parse_err(line, j + 2, format!("price must be positive, found {field}")));
                    }
                    Some(v)
                };
                series[j].push(value);
            }
        }
        Self::new(dates, names, series)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn series(&self, j: usize) -> &[Option<f64>] {
        &self.series[j]
    }

    /// Loss returns `-log(P_t / P_{t-1})` after listwise deletion.
    ///
    /// Rows with any missing price are dropped first; returns are then taken
    /// between consecutive retained rows, also across a deleted gap.
    pub fn returns(&self) -> Result<Returns> {
        let complete: Vec<usize> = (0..self.dates.len())
            .filter(|&i| self.series.iter().all(|s| s[i].is_some()))
            .collect();
        if complete.len() < 2 {
            return Err(Error::InvalidData(format!(
                "{} complete price rows; at least 2 are needed",
                complete.len()
            )));
        }
        let columns = self
            .series
            .iter()
            .map(|s| {
                complete
                    .windows(2)
                    .map(|w| -(s[w[1]].unwrap() / s[w[0]].unwrap()).ln())
                    .collect()
            })
            .collect();
        Ok(Returns {
            dates: complete[1..].iter().map(|&i| self.dates[i]).collect(),
            names: self.names.clone(),
            columns,
            complete_rows: complete.len(),
        })
    }
}

/// Reads an observation matrix with a header of column labels. A leading
/// column headed `date` is treated as a row index and skipped.
pub fn read_data_matrix<R: Read>(input: R) -> Result<DataMatrix> {
    let mut rdr = reader(input);
    let header = rdr.headers()?.clone();
    let skip = usize::from(header.get(0).is_some_and(|h| h.eq_ignore_ascii_case("date")));
    if header.len() <= skip {
        return Err(parse_err(1, header.len(), "header has no data columns"));
    }
    let labels: Vec<String> = header.iter().skip(skip).map(str::to_string).collect();
    let mut columns = vec![Vec::new(); labels.len()];
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, idx + 2);
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                rec.len().min(header.len()) + 1,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        for (j, field) in rec.iter().enumerate().skip(skip) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, j + 1, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, j + 1, format!("non-finite value {field}")));
            }
            columns[j - skip].push(v);
        }
    }
    DataMatrix::from_columns(columns)?.with_labels(labels)
}

/// Writes `data` with a header of its labels. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_data_matrix<W: Write>(data: &DataMatrix, output: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(data.labels_or_default())?;
    for i in 0..data.n() {
        w.write_record((0..data.p()).map(|j| data.get(i, j).to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes loss returns with a leading `date` column.
pub fn write_returns<W: Write>(returns: &Returns, output: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(std::iter::once("date").chain(returns.names.iter().map(String::as_str)))?;
    for (i, d) in returns.dates.iter().enumerate() {
        let values = returns.columns.iter().map(|c| c[i].to_string());
        w.write_record(std::iter::once(d.format("%Y-%m-%d").to_string()).chain(values))?;
    }
    w.flush()?;
    Ok(())
}
