//! CSV ingestion: feature tables, full distance matrices, weight columns.
//!
//! Decimal separator is the dot, always. A non-numeric first row is treated
//! as a header and skipped.

use std::path::Path;

use nalgebra::DMatrix;
use rvhaar_core::geometry::{DissimilarityMatrix, ObjectWeights};

use crate::CliError;

/// Reads a CSV file into rows of numbers, skipping a header row when the
/// first row contains any non-numeric field.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("cannot open {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => rows.push(values),
            Err(e) if index == 0 => {
                // Header row; ignore.
                let _ = e;
            }
            Err(e) => {
                return Err(CliError::validation(format!(
                    "{} row {}: non-numeric field ({e})",
                    path.display(),
                    index + 1
                )));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no numeric rows",
            path.display()
        )));
    }
    let width = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(CliError::validation(format!(
            "{} row {}: expected {width} fields, found {}",
            path.display(),
            bad + 1,
            rows[bad].len()
        )));
    }
    Ok(rows)
}

pub fn read_features(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let rows = read_numeric_csv(path)?;
    let n = rows.len();
    let p = rows[0].len();
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

pub fn read_distances(path: &Path) -> Result<DissimilarityMatrix, CliError> {
    let rows = read_numeric_csv(path)?;
    let n = rows.len();
    if rows[0].len() != n {
        return Err(CliError::validation(format!(
            "{}: distance matrix must be square, got {n}x{}",
            path.display(),
            rows[0].len()
        )));
    }
    let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    DissimilarityMatrix::new(matrix)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn read_weights(path: &Path, n: usize) -> Result<ObjectWeights, CliError> {
    let rows = read_numeric_csv(path)?;
    if rows.iter().any(|r| r.len() != 1) {
        return Err(CliError::validation(format!(
            "{}: weights file must be a single column",
            path.display()
        )));
    }
    if rows.len() != n {
        return Err(CliError::validation(format!(
            "{}: {} weights for {n} objects",
            path.display(),
            rows.len()
        )));
    }
    ObjectWeights::new(rows.into_iter().map(|r| r[0]).collect())
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}
