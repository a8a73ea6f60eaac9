//! Reader for the `.ts` text format used by the UCR/UEA time-series archive.
//!
//! ```text
//! # comment
//! @problemName Example
//! @univariate false
//! @classLabel true up down
//! @data
//! 1.0,2.0,3.0:4.0,5.0,6.0:up
//! ```
//!
//! Each data line holds the dimensions of one instance separated by `:`,
//! values within a dimension separated by `,`, and the class label as the
//! final `:` field. Only equal-length series without missing values are
//! accepted.

use std::fs;
use std::path::Path;

use crate::data::{Dataset, LabelEncoding};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
struct Header {
    problem_name: Option<String>,
    univariate: Option<bool>,
    dimensions: Option<usize>,
    series_length: Option<usize>,
    class_labels: Option<Vec<String>>,
}

fn parse_bool(line: usize, directive: &str, value: Option<&str>) -> Result<bool> {
    match value.map(str::to_ascii_lowercase).as_deref() {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(Error::parse(line, format!("@{directive} expects true or false"))),
    }
}

fn parse_usize(line: usize, directive: &str, value: Option<&str>) -> Result<usize> {
    value
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(line, format!("@{directive} expects a non-negative integer")))
}

/// Parses `.ts` text. `fallback_name` names the dataset when the header has
/// no `@problemName`.
pub fn parse_ts(text: &str, fallback_name: &str) -> Result<Dataset> {
    let mut header = Header::default();
    let mut in_data = false;
    let mut instances: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut raw_labels: Vec<(usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            let Some(directive) = line.strip_prefix('@') else {
                return Err(Error::parse(line_no, "expected a header directive before @data"));
            };
            let mut parts = directive.split_whitespace();
            let name = parts.next().unwrap_or_default().to_ascii_lowercase();
            match name.as_str() {
                "problemname" => header.problem_name = parts.next().map(str::to_owned),
                "univariate" => header.univariate = Some(parse_bool(line_no, "univariate", parts.next())?),
                "dimensions" => header.dimensions = Some(parse_usize(line_no, "dimensions", parts.next())?),
                "serieslength" => header.series_length = Some(parse_usize(line_no, "seriesLength", parts.next())?),
                "equallength" => {
                    if !parse_bool(line_no, "equalLength", parts.next())? {
                        return Err(Error::parse(line_no, "unequal-length series are not supported"));
                    }
                }
                "missing" => {
                    if parse_bool(line_no, "missing", parts.next())? {
                        return Err(Error::parse(line_no, "series with missing values are not supported"));
                    }
                }
                "timestamps" => {
                    if parse_bool(line_no, "timeStamps", parts.next())? {
                        return Err(Error::parse(line_no, "timestamped series are not supported"));
                    }
                }
                "classlabel" => {
                    if !parse_bool(line_no, "classLabel", parts.next())? {
                        return Err(Error::parse(
                            line_no,
                            "unlabeled data cannot be used for classification",
                        ));
                    }
                    let labels: Vec<String> = parts.map(str::to_owned).collect();
                    if labels.is_empty() {
                        return Err(Error::parse(line_no, "@classLabel true must list the class labels"));
                    }
                    header.class_labels = Some(labels);
                }
                "data" => in_data = true,
                // Other directives (e.g. @targetlabel) carry nothing we use.
                _ => {}
            }
            continue;
        }

        let mut fields: Vec<&str> = line.split(':').collect();
        let label = fields.pop().expect("split yields at least one field").trim();
        if fields.is_empty() || label.is_empty() {
            return Err(Error::parse(
                line_no,
                "data line needs at least one dimension and a class label",
            ));
        }
        let dims = fields
            .iter()
            .map(|field| {
                field
                    .split(',')
                    .map(|v| {
                        let v = v.trim();
                        match v.parse::<f64>() {
                            Ok(x) if x.is_finite() => Ok(x),
                            _ if v == "?" || v.eq_ignore_ascii_case("nan") => {
                                Err(Error::parse(line_no, "missing values are not supported"))
                            }
                            _ => Err(Error::parse(line_no, format!("invalid value {v:?}"))),
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;

        let length = dims[0].len();
        if dims.iter().any(|d| d.len() != length) {
            return Err(Error::parse(
                line_no,
                "dimensions of one instance have different lengths",
            ));
        }
        if let Some(first) = instances.first() {
            if dims.len() != first.len() {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "instance has {} dimensions, earlier ones have {}",
                        dims.len(),
                        first.len()
                    ),
                ));
            }
            if length != first[0].len() {
                return Err(Error::parse(
                    line_no,
                    format!("series length {length} differs from earlier length {}", first[0].len()),
                ));
            }
        }
        if header.univariate == Some(true) && dims.len() != 1 {
            return Err(Error::parse(
                line_no,
                "univariate problem has a multi-dimensional instance",
            ));
        }
        if let Some(d) = header.dimensions {
            if dims.len() != d {
                return Err(Error::parse(
                    line_no,
                    format!("expected {d} dimensions, found {}", dims.len()),
                ));
            }
        }
        if let Some(l) = header.series_length {
            if length != l {
                return Err(Error::parse(
                    line_no,
                    format!("expected series length {l}, found {length}"),
                ));
            }
        }
        if let Some(known) = &header.class_labels {
            if !known.iter().any(|k| k == label) {
                return Err(Error::parse(line_no, format!("unknown class label {label:?}")));
            }
        }
        instances.push(dims);
        raw_labels.push((line_no, label.to_owned()));
    }

    let last_line = text.lines().count().max(1);
    if !in_data {
        return Err(Error::parse(last_line, "missing @data section"));
    }
    if instances.is_empty() {
        return Err(Error::parse(last_line, "no instances after @data"));
    }
    let encoding = match header.class_labels {
        Some(labels) => LabelEncoding::from_classes(labels)?,
        None => LabelEncoding::from_classes(raw_labels.iter().map(|(_, l)| l.clone()))?,
    };
    let labels = raw_labels
        .iter()
        .map(|(line, l)| {
            encoding
                .encode(l)
                .ok_or_else(|| Error::parse(*line, format!("unknown class label {l:?}")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let name = header.problem_name.unwrap_or_else(|| fallback_name.to_owned());
    Dataset::new(name, instances, labels, encoding)
}

/// Reads and parses a `.ts` file; the file stem names the dataset when the
/// header does not.
pub fn read_ts_file(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.trim_end_matches("_TRAIN").trim_end_matches("_TEST"))
        .unwrap_or("dataset");
    parse_ts(&text, stem)
}
