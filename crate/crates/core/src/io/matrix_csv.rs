//! Plain numeric matrix CSV: row-major, optional header row of names, 17
//! significant digits per value.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, IngestError, Result};
use crate::matrix::SymMatrix;

use super::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub names: Option<Vec<String>>,
    pub matrix: DMatrix<f64>,
}

/// Formats `v` with 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_matrix_csv(m: &DMatrix<f64>, names: Option<&[String]>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    if let Some(names) = names {
        if names.len() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} column names", m.ncols()),
                found: format!("{}", names.len()),
            });
        }
        w.write_record(names).map_err(|e| Error::Format(e.to_string()))?;
    }
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| format_value(m[(i, j)])))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &DMatrix<f64>, names: Option<&[String]>) -> Result<()> {
    write_atomic(path, render_matrix_csv(m, names)?.as_bytes())
}

pub(crate) fn is_numeric(cell: &str) -> bool {
    cell.trim().parse::<f64>().is_ok()
}

pub fn parse_matrix_csv(text: &str) -> Result<MatrixFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if let Some(w) = width {
            if rec.len() != w {
                return Err(IngestError::Ragged {
                    line: line + 1,
                    found: rec.len(),
                    expected: w,
                }
                .into());
            }
        }
        width = Some(rec.len());
        if line == 0 && rec.iter().all(|c| !is_numeric(c)) {
            names = Some(rec.iter().map(str::to_string).collect());
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Format(format!("line {}, column {}: `{c}` is not a finite number", line + 1, j + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let cols = width.ok_or(IngestError::Empty)?;
    if rows.is_empty() {
        return Err(IngestError::Empty.into());
    }
    let matrix = DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten());
    Ok(MatrixFile { names, matrix })
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<MatrixFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Unreadable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_matrix_csv(&text)
}

/// Reads a square matrix and symmetrizes it.
pub fn read_sym_matrix_csv(path: impl AsRef<Path>) -> Result<(Option<Vec<String>>, SymMatrix)> {
    let file = read_matrix_csv(path)?;
    Ok((file.names, SymMatrix::new(file.matrix)?))
}
