//! CSV ingestion: turn one numeric column of a file into sample values plus
//! the summary statistics the analytic layer needs.

use std::path::Path;

use crate::core::GroupDistribution;
use crate::{Error, Result};

/// What ingestion found: moments of the kept values plus counts of rows that
/// were dropped and why.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestSummary {
    pub count: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub max: f64,
    pub skipped_non_numeric: u64,
    pub skipped_out_of_range: u64,
}

impl IngestSummary {
    /// Moments as a group distribution, with the observed maximum as the
    /// support bound. An empirical distribution on `[0, max]` always
    /// satisfies the variance cap, so this only fails on degenerate input.
    pub fn to_group_distribution(&self) -> Result<GroupDistribution> {
        GroupDistribution::new(self.mean, self.std_dev * self.std_dev, self.max)
    }
}

/// Reads one column of a CSV file as nonnegative numeric data.
///
/// `column` is matched against the header row first; if no header matches it
/// is parsed as a 0-based column index. Unparseable or non-finite fields are
/// skipped and counted as non-numeric; negative values are skipped and
/// counted as out of range (the estimators assume a support of `[0, m]`).
/// Fails if nothing usable remains or if skipped rows outnumber kept ones.
pub fn ingest_csv(path: &Path, column: &str) -> Result<(Vec<f64>, IngestSummary)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::io(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::io(format!("{}: {e}", path.display())))?;
    let index = match headers.iter().position(|h| h.trim() == column) {
        Some(i) => i,
        None => column.parse::<usize>().map_err(|_| {
            Error::io(format!(
                "{}: no column named {column:?} (headers: {}) and it is not a numeric index",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?,
    };

    let mut values = Vec::new();
    let mut skipped_non_numeric = 0u64;
    let mut skipped_out_of_range = 0u64;
    for record in reader.records() {
        let record = record.map_err(|e| Error::io(format!("{}: {e}", path.display())))?;
        let field = match record.get(index) {
            Some(f) => f.trim(),
            None => {
                skipped_non_numeric += 1;
                continue;
            }
        };
        match field.parse::<f64>() {
            Ok(x) if x.is_finite() && x >= 0.0 => values.push(x),
            Ok(x) if x.is_finite() => skipped_out_of_range += 1, // negative
            _ => skipped_non_numeric += 1,
        }
    }

    if values.is_empty() {
        return Err(Error::io(format!(
            "{}: column {column:?} contains no usable numeric values",
            path.display()
        )));
    }
    let skipped = skipped_non_numeric + skipped_out_of_range;
    if skipped > values.len() as u64 {
        return Err(Error::io(format!(
            "{}: column {column:?} dropped {skipped} rows but kept only {}; refusing to \
             summarize a minority of the file",
            path.display(),
            values.len()
        )));
    }

    let count = values.len() as u64;
    let mean = values.iter().sum::<f64>() / count as f64;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / count as f64;
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let summary = IngestSummary {
        count,
        mean,
        std_dev: var.sqrt(),
        max,
        skipped_non_numeric,
        skipped_out_of_range,
    };
    Ok((values, summary))
}
