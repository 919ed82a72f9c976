//! CSV series ingest.

use std::fs;
use std::path::Path;

use npchange::PairedSeries;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Where the series comes from and which columns to read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: String,
    pub x_col: String,
    pub y_col: String,
    pub label_col: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone)]
pub struct SeriesFile {
    pub series: PairedSeries,
    pub labels: Option<Vec<String>>,
    pub digest: InputDigest,
}

impl SeriesFile {
    /// Label of 1-based observation `t`.
    pub fn label(&self, t: usize) -> Option<String> {
        self.labels.as_ref().and_then(|l| l.get(t.checked_sub(1)?).cloned())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn column(headers: &csv::StringRecord, name: &str, flag: &str) -> CliResult<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        let found: Vec<&str> = headers.iter().collect();
        CliError::schema(format!(
            "column '{name}' ({flag}) not found; header has: {}",
            found.join(", ")
        ))
    })
}

fn parse_real(field: &str, col: &str, line: u64) -> CliResult<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::schema(format!(
            "line {line}: column '{col}' value '{field}' is not a finite real number"
        ))),
    }
}

/// Reads the series, rejecting any row whose `x` or `y` does not parse.
pub fn read_series(spec: &InputSpec) -> CliResult<SeriesFile> {
    let path = Path::new(&spec.path);
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sha256 = sha256_hex(&bytes);

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let headers = reader
        .headers()
        .map_err(|e| CliError::schema(format!("{}: unreadable header: {e}", spec.path)))?
        .clone();
    let xi = column(&headers, &spec.x_col, "--x-col")?;
    let yi = column(&headers, &spec.y_col, "--y-col")?;
    let li = spec
        .label_col
        .as_deref()
        .map(|name| column(&headers, name, "--label-col"))
        .transpose()?;

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut labels = li.map(|_| Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| CliError::schema(format!("{}: {e}", spec.path)))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        x.push(parse_real(field(xi), &spec.x_col, line)?);
        y.push(parse_real(field(yi), &spec.y_col, line)?);
        if let (Some(i), Some(l)) = (li, labels.as_mut()) {
            l.push(field(i).to_string());
        }
    }
    if x.is_empty() {
        return Err(CliError::schema(format!("{}: no data rows", spec.path)));
    }
    let rows = x.len();
    let series = PairedSeries::new(x, y)?;
    Ok(SeriesFile {
        series,
        labels,
        digest: InputDigest { sha256, rows },
    })
}
