//! Asset-return tables (rows are time, columns are assets) and their sample
//! covariance.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestError, Result};
use crate::matrix::SymMatrix;

use super::matrix_csv::is_numeric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsTable {
    pub asset_names: Vec<String>,
    /// One return vector per time step, in file order.
    pub rows: Vec<Vec<f64>>,
    /// Rows dropped because a cell was missing or not a number.
    pub dropped_rows: usize,
}

impl ReturnsTable {
    pub fn n_assets(&self) -> usize {
        self.asset_names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Drops the named assets. Unknown names are returned, not treated as errors.
    pub fn without_assets(&self, names: &[String]) -> (ReturnsTable, Vec<String>) {
        let unknown = names
            .iter()
            .filter(|n| !self.asset_names.contains(n))
            .cloned()
            .collect();
        let keep: Vec<usize> = (0..self.n_assets())
            .filter(|&j| !names.contains(&self.asset_names[j]))
            .collect();
        let table = ReturnsTable {
            asset_names: keep.iter().map(|&j| self.asset_names[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&j| r[j]).collect())
                .collect(),
            dropped_rows: self.dropped_rows,
        };
        (table, unknown)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.asset_names).map_err(|e| Error::Format(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| super::matrix_csv::format_value(*v)))
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// `None` detects a header: the first row is one when none of its
    /// non-empty cells parse as numbers.
    pub has_header: Option<bool>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: None,
        }
    }
}

pub fn parse_returns(reader: impl Read, options: &LoadOptions) -> Result<ReturnsTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut dropped = 0;
    let mut width = None;
    let mut first = true;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match width {
            Some(w) if rec.len() != w => {
                return Err(IngestError::Ragged {
                    line: line + 1,
                    found: rec.len(),
                    expected: w,
                }
                .into())
            }
            _ => width = Some(rec.len()),
        }
        if first {
            first = false;
            let header = options
                .has_header
                .unwrap_or_else(|| rec.iter().any(|c| !c.is_empty()) && rec.iter().filter(|c| !c.is_empty()).all(|c| !is_numeric(c)));
            if header {
                names = Some(rec.iter().map(str::to_string).collect());
                continue;
            }
        }
        let parsed: Option<Vec<f64>> = rec
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        match parsed {
            Some(r) => rows.push(r),
            None => dropped += 1,
        }
    }
    let cols = width.ok_or(IngestError::Empty)?;
    if rows.len() < 2 || cols < 2 {
        return Err(IngestError::TooSmall { rows: rows.len(), cols }.into());
    }
    let asset_names = names.unwrap_or_else(|| (0..cols).map(|j| format!("col_{j}")).collect());
    Ok(ReturnsTable {
        asset_names,
        rows,
        dropped_rows: dropped,
    })
}

pub fn load_returns_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<ReturnsTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::Unreadable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_returns(std::io::BufReader::new(file), options)
}

/// Column-centered sample covariance with `1/(rows - 1)` normalization.
pub fn covariance_from_returns(table: &ReturnsTable) -> Result<SymMatrix> {
    let n = table.n_rows();
    let p = table.n_assets();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 rows for a covariance, got {n}")));
    }
    let mut x = DMatrix::from_row_iterator(n, p, table.rows.iter().flatten().copied());
    for j in 0..p {
        let mean = x.column(j).sum() / n as f64;
        x.column_mut(j).add_scalar_mut(-mean);
    }
    let c = x.tr_mul(&x) / (n - 1) as f64;
    SymMatrix::new(c)
}
