//! Data model shared by every stage of the pipeline.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Standard deviations below this are treated as a constant series.
pub const DEGENERATE_STD: f64 = 1e-8;

/// A univariate series of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_input("time series must have length >= 1"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid_input(format!(
                "non-finite value {} at position {pos}",
                values[pos]
            )));
        }
        Ok(TimeSeries(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Z-normalizes `values` to zero mean and unit population standard deviation.
///
/// A series whose standard deviation is below [`DEGENERATE_STD`] carries no
/// shape information and maps to all zeros.
pub fn z_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid_input("cannot normalize an empty series"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_input("cannot normalize a series with non-finite values"));
    }
    Ok(z_normalize_finite(values))
}

/// [`z_normalize`] for input already known to be finite and non-empty.
pub(crate) fn z_normalize_finite(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < DEGENERATE_STD {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / std).collect()
}

/// Bijection between raw class labels and indices `0..n`, assigned in sorted
/// label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelEncoding {
    classes: Vec<String>,
}

impl LabelEncoding {
    pub fn from_classes<I, S>(classes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = classes.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(Error::invalid_input("label encoding needs at least one class"));
        }
        Ok(LabelEncoding {
            classes: set.into_iter().collect(),
        })
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn encode(&self, label: &str) -> Option<usize> {
        self.classes.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }

    pub fn decode(&self, index: usize) -> Option<&str> {
        self.classes.get(index).map(String::as_str)
    }

    /// Encoding covering the classes of both `self` and `other`.
    pub fn union(&self, other: &LabelEncoding) -> LabelEncoding {
        let set: BTreeSet<&String> = self.classes.iter().chain(&other.classes).collect();
        LabelEncoding {
            classes: set.into_iter().cloned().collect(),
        }
    }
}

/// Builds a sorted-order encoding for `raw_labels` and returns it with the
/// encoded index of every label.
pub fn encode_labels<S: AsRef<str>>(raw_labels: &[S]) -> Result<(LabelEncoding, Vec<usize>)> {
    if raw_labels.is_empty() {
        return Err(Error::invalid_input("cannot encode an empty label list"));
    }
    let encoding = LabelEncoding::from_classes(raw_labels.iter().map(|s| s.as_ref().to_owned()))?;
    let indices = raw_labels
        .iter()
        .map(|s| encoding.encode(s.as_ref()).expect("label is in its own encoding"))
        .collect();
    Ok((encoding, indices))
}

/// Labeled collection of equal-length multivariate series.
///
/// Values are stored instance-major: the `d` dimensions of instance `i` sit
/// back to back, so an instance slice is also its concatenation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dims: usize,
    length: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    encoding: LabelEncoding,
}

impl Dataset {
    /// `instances[i][dim]` is one dimension of instance `i`; `labels` are
    /// indices into `encoding`.
    pub fn new(
        name: impl Into<String>,
        instances: Vec<Vec<Vec<f64>>>,
        labels: Vec<usize>,
        encoding: LabelEncoding,
    ) -> Result<Self> {
        let first = instances
            .first()
            .ok_or_else(|| Error::invalid_input("dataset must contain at least one instance"))?;
        let dims = first.len();
        if dims == 0 {
            return Err(Error::invalid_input("instances must have at least one dimension"));
        }
        let length = first[0].len();
        if length == 0 {
            return Err(Error::invalid_input("series must have length >= 1"));
        }
        if labels.len() != instances.len() {
            return Err(Error::invalid_input(format!(
                "{} labels for {} instances",
                labels.len(),
                instances.len()
            )));
        }
        let mut values = Vec::with_capacity(instances.len() * dims * length);
        for (i, inst) in instances.iter().enumerate() {
            if inst.len() != dims {
                return Err(Error::invalid_input(format!(
                    "instance {i} has {} dimensions, expected {dims}",
                    inst.len()
                )));
            }
            for (dim, series) in inst.iter().enumerate() {
                if series.len() != length {
                    return Err(Error::invalid_input(format!(
                        "instance {i} dimension {dim} has length {}, expected {length}",
                        series.len()
                    )));
                }
                if series.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid_input(format!(
                        "instance {i} dimension {dim} contains non-finite values"
                    )));
                }
                values.extend_from_slice(series);
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= encoding.class_count()) {
            return Err(Error::invalid_input(format!(
                "label index {bad} outside {} known classes",
                encoding.class_count()
            )));
        }
        Ok(Dataset {
            name: name.into(),
            dims,
            length,
            values,
            labels,
            encoding,
        })
    }

    /// Builds a dataset from raw labels, encoding them in sorted order.
    pub fn from_raw_labels<S: AsRef<str>>(
        name: impl Into<String>,
        instances: Vec<Vec<Vec<f64>>>,
        raw_labels: &[S],
    ) -> Result<Self> {
        let (encoding, labels) = encode_labels(raw_labels)?;
        Dataset::new(name, instances, labels, encoding)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of instances (m).
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of dimensions (d).
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Length of every series (l).
    pub fn series_length(&self) -> usize {
        self.length
    }

    /// Number of known classes (n).
    pub fn class_count(&self) -> usize {
        self.encoding.class_count()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn encoding(&self) -> &LabelEncoding {
        &self.encoding
    }

    /// All dimensions of instance `i`, concatenated in stored order.
    pub fn instance(&self, i: usize) -> &[f64] {
        let stride = self.dims * self.length;
        &self.values[i * stride..(i + 1) * stride]
    }

    pub fn series(&self, i: usize, dim: usize) -> &[f64] {
        let start = (i * self.dims + dim) * self.length;
        &self.values[start..start + self.length]
    }

    /// One dimension of every instance.
    pub fn dimension(&self, dim: usize) -> Vec<&[f64]> {
        (0..self.len()).map(|i| self.series(i, dim)).collect()
    }

    /// Per-class instance counts, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Re-expresses the labels under a wider encoding.
    pub fn with_encoding(&self, encoding: &LabelEncoding) -> Result<Dataset> {
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let raw = self.encoding.decode(l).expect("label in range");
                encoding
                    .encode(raw)
                    .ok_or_else(|| Error::invalid_input(format!("class {raw:?} missing from encoding")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            labels,
            encoding: encoding.clone(),
            ..self.clone()
        })
    }

    /// Instances at `indices` (in that order) of the pool formed by `first`
    /// followed by `second`.
    fn gather(first: &Dataset, second: &Dataset, indices: &[usize]) -> Dataset {
        let stride = first.dims * first.length;
        let mut values = Vec::with_capacity(indices.len() * stride);
        let mut labels = Vec::with_capacity(indices.len());
        for &idx in indices {
            let (src, i) = if idx < first.len() {
                (first, idx)
            } else {
                (second, idx - first.len())
            };
            values.extend_from_slice(src.instance(i));
            labels.push(src.labels[i]);
        }
        Dataset {
            name: first.name.clone(),
            dims: first.dims,
            length: first.length,
            values,
            labels,
            encoding: first.encoding.clone(),
        }
    }

    /// Instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::gather(self, self, indices)
    }
}

/// Re-encodes two datasets so they share the union of their classes.
pub fn align_encodings(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    if train.encoding == test.encoding {
        return Ok((train.clone(), test.clone()));
    }
    let union = train.encoding.union(&test.encoding);
    Ok((train.with_encoding(&union)?, test.with_encoding(&union)?))
}

/// One train/test split of the pooled train+test instances. Indices below
/// the original train size refer to the train set, the rest to the test set
/// offset by that size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResamplePlan {
    pub resample_index: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl ResamplePlan {
    pub fn apply(&self, train: &Dataset, test: &Dataset) -> (Dataset, Dataset) {
        (
            Dataset::gather(train, test, &self.train_indices),
            Dataset::gather(train, test, &self.test_indices),
        )
    }
}

/// Redraws a train/test split of the original sizes from the pooled data,
/// keeping the original per-class train counts. Resample 0 is the original
/// split; every other index seeds its own shuffle.
pub fn stratified_resample(train: &Dataset, test: &Dataset, resample_index: usize) -> Result<ResamplePlan> {
    if train.dims != test.dims || train.length != test.length {
        return Err(Error::invalid_input(format!(
            "train is {}x{} but test is {}x{} (dimensions x length)",
            train.dims, train.length, test.dims, test.length
        )));
    }
    if train.encoding != test.encoding {
        return Err(Error::invalid_input("train and test use different class sets"));
    }
    let n_train = train.len();
    let pooled = n_train + test.len();
    let pooled_label = |idx: usize| {
        if idx < n_train {
            train.labels[idx]
        } else {
            test.labels[idx - n_train]
        }
    };

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); train.class_count()];
    for idx in 0..pooled {
        by_class[pooled_label(idx)].push(idx);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::invalid_input(format!(
            "class {:?} has no instances in the pooled data",
            train.encoding.decode(c).unwrap_or("?")
        )));
    }

    if resample_index == 0 {
        return Ok(ResamplePlan {
            resample_index,
            train_indices: (0..n_train).collect(),
            test_indices: (n_train..pooled).collect(),
        });
    }

    let mut rng = seed::rng(resample_index as u64);
    let train_counts = train.class_counts();
    let mut train_indices = Vec::with_capacity(n_train);
    let mut test_indices = Vec::with_capacity(test.len());
    for (members, &want) in by_class.iter_mut().zip(&train_counts) {
        members.shuffle(&mut rng);
        train_indices.extend_from_slice(&members[..want]);
        test_indices.extend_from_slice(&members[want..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(ResamplePlan {
        resample_index,
        train_indices,
        test_indices,
    })
}
