//! Record files (CSV and JSON lines) and the solver run summary.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestError, Result};
use crate::solver::{SolveResult, SolverConfig, Termination};

use super::write_atomic;

/// CSV with a header row taken from the record's field names.
pub fn render_records_csv<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn render_records_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes JSON lines when `path` ends in `.jsonl` or `.json`, CSV otherwise.
pub fn write_records<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => render_records_jsonl(records)?,
        _ => render_records_csv(records)?,
    };
    write_atomic(path, text.as_bytes())
}

pub fn parse_records_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

pub fn read_records_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Unreadable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_records_csv(&text)
}

/// JSON summary written next to the matrices by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub p: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub final_delta1: f64,
    pub final_delta2: f64,
    pub delta1_history: Vec<f64>,
    pub delta2_history: Vec<f64>,
    pub config: SolverConfig,
    pub s_nonzero_pairs: usize,
}

impl RunSummary {
    pub fn new(result: &SolveResult, config: &SolverConfig, support_tol: f64) -> Self {
        let p = result.s.dim();
        let mut pairs = 0;
        for j in 0..p {
            for i in 0..j {
                if result.s[(i, j)].abs() > support_tol {
                    pairs += 1;
                }
            }
        }
        Self {
            p,
            iterations: result.iterations,
            termination: result.termination,
            final_delta1: result.final_delta1(),
            final_delta2: result.final_delta2(),
            delta1_history: result.delta1_history.clone(),
            delta2_history: result.delta2_history.clone(),
            config: config.clone(),
            s_nonzero_pairs: pairs,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}
