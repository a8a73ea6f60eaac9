//! Plain comma-separated benchmark results.
//!
//! ```text
//! dataset,variant,resample,seed,accuracy
//! BasicMotions,3,0,0,0.975000
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::BenchmarkResult;

pub const HEADER: &str = "dataset,variant,resample,seed,accuracy";

/// One line of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub variant: u8,
    pub resample: usize,
    pub seed: u64,
    pub accuracy: f64,
}

/// Flattens results into rows ordered by dataset, variant and resample.
pub fn result_rows(results: &[BenchmarkResult]) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = results
        .iter()
        .flat_map(|r| {
            r.accuracies.iter().enumerate().map(move |(i, &accuracy)| ResultRow {
                dataset: r.dataset.clone(),
                variant: r.variant_id,
                resample: i,
                seed: r.resample_seed(i),
                accuracy,
            })
        })
        .collect();
    rows.sort_by(|a, b| (&a.dataset, a.variant, a.resample).cmp(&(&b.dataset, b.variant, b.resample)));
    rows
}

/// Renders results with accuracies to six decimal places.
pub fn render_results(results: &[BenchmarkResult]) -> Result<String> {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for row in result_rows(results) {
        if row.dataset.contains([',', '\n', '\r']) {
            return Err(Error::invalid_input(format!(
                "dataset name {:?} cannot be written to a comma-separated file",
                row.dataset
            )));
        }
        out.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            row.dataset, row.variant, row.resample, row.seed, row.accuracy
        ));
    }
    Ok(out)
}

pub fn write_results(results: &[BenchmarkResult], path: impl AsRef<Path>) -> Result<()> {
    let text = render_results(results)?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((i, _)) => return Err(Error::parse(i + 1, format!("expected header {HEADER:?}"))),
        None => return Err(Error::parse(1, "empty results file")),
    }
    lines
        .map(|(i, line)| {
            let line_no = i + 1;
            let fields: Vec<&str> = line.trim().split(',').collect();
            let [dataset, variant, resample, seed, accuracy] = fields[..] else {
                return Err(Error::parse(
                    line_no,
                    format!("expected 5 fields, found {}", fields.len()),
                ));
            };
            let bad = |what: &str| Error::parse(line_no, format!("invalid {what}"));
            Ok(ResultRow {
                dataset: dataset.to_owned(),
                variant: variant.parse().map_err(|_| bad("variant"))?,
                resample: resample.parse().map_err(|_| bad("resample"))?,
                seed: seed.parse().map_err(|_| bad("seed"))?,
                accuracy: accuracy.parse().map_err(|_| bad("accuracy"))?,
            })
        })
        .collect()
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    parse_results(&fs::read_to_string(path)?)
}
