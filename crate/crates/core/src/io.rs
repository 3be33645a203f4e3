//! Time-series CSV reading and writing.
//!
//! Files carry a `time_s` column followed by one column per channel.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const TIME_COLUMN: &str = "time_s";

/// Channels reordered to `labels`, plus the time column.
#[derive(Debug, Clone)]
pub struct TimeSeriesTable {
    pub time: Vec<f64>,
    /// rows = channels (in `labels` order), columns = samples
    pub values: Array2<f64>,
}

pub fn read_time_series(path: &Path, labels: &[String]) -> Result<TimeSeriesTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some(TIME_COLUMN) {
        return Err(Error::Csv(format!("{}: first column must be `{TIME_COLUMN}`", path.display())));
    }
    let mut col_of = Vec::with_capacity(labels.len());
    for label in labels {
        let idx = headers
            .iter()
            .position(|h| h == label)
            .ok_or_else(|| Error::MissingChannel(label.clone()))?;
        col_of.push(idx);
    }

    let mut time = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |col: usize| -> Result<f64> {
            let cell = record.get(col).unwrap_or("");
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Csv(format!("row {row}, column {col}: cannot parse {cell:?}")))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { row, col });
            }
            Ok(v)
        };
        let t = parse(0)?;
        if let Some(&prev) = time.last() {
            if t <= prev {
                return Err(Error::NonMonotonicTime { row });
            }
        }
        time.push(t);
        for (k, &col) in col_of.iter().enumerate() {
            columns[k].push(parse(col)?);
        }
    }
    if time.is_empty() {
        return Err(Error::EmptySignal);
    }
    let n = time.len();
    let flat: Vec<f64> = columns.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((labels.len(), n), flat)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    Ok(TimeSeriesTable { time, values })
}

/// Sampling rate implied by a time column, checking every interval is within
/// 1% of the nominal one.
pub fn sample_rate_from_time(time: &[f64]) -> Result<f64> {
    if time.len() < 2 {
        return Err(Error::SignalTooShort { len: time.len(), needed: 2 });
    }
    let dt = (time[time.len() - 1] - time[0]) / (time.len() - 1) as f64;
    for (i, w) in time.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 0.01 * dt {
            return Err(Error::SampleRateJitter { row: i + 1 });
        }
    }
    Ok(1.0 / dt)
}

pub fn write_time_series(path: &Path, sample_rate: f64, labels: &[String], values: &Array2<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    write!(out, "{TIME_COLUMN}").map_err(io_err)?;
    for l in labels {
        write!(out, ",{l}").map_err(io_err)?;
    }
    writeln!(out).map_err(io_err)?;
    for t in 0..values.ncols() {
        write!(out, "{}", t as f64 / sample_rate).map_err(io_err)?;
        for ch in 0..values.nrows() {
            write!(out, ",{}", values[[ch, t]]).map_err(io_err)?;
        }
        writeln!(out).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
/// Bare numeric matrix, one CSV row per matrix row, no header.
pub fn write_matrix_csv(path: &Path, values: &Array2<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    for row in values.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

