//! Sum-rule fusion of per-lens probability matrices.
//!
//! Each matrix is scaled by its weight, the scaled matrices are summed
//! elementwise, and every row of the sum is resolved to its argmax class.
//! The weight generators are uniform (all ones), mean-max (the mean of a
//! matrix's row-wise maxima) and validation (cross-validated accuracy of the
//! lens's own model).

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::{fit_lens_model, ForestConfig, ProbabilityMatrix};
use crate::seed;
use crate::symbolic::Lens;

/// Relative gap under which two class scores count as tied. Scores that are
/// equal in exact arithmetic can differ in their last bits depending on
/// summation order, and the tie rule must not depend on that order.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Index of the largest value, ties to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * max.abs().max(1.0);
    row.iter().position(|&v| v >= max - tol).unwrap_or(0)
}

/// Read access to an `m x n` matrix of non-negative class scores.
pub trait ClassScores {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn row(&self, i: usize) -> &[f64];
}

impl ClassScores for ProbabilityMatrix {
    fn rows(&self) -> usize {
        ProbabilityMatrix::rows(self)
    }
    fn cols(&self) -> usize {
        ProbabilityMatrix::cols(self)
    }
    fn row(&self, i: usize) -> &[f64] {
        ProbabilityMatrix::row(self, i)
    }
}

/// Weighted elementwise sum of a matrix set. Rows no longer sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FusedMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn argmax(&self) -> Vec<usize> {
        (0..self.rows).map(|i| argmax(self.row(i))).collect()
    }
}

impl ClassScores for FusedMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Non-empty, ordered set of equally shaped score matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet<M = ProbabilityMatrix> {
    matrices: Vec<M>,
}

impl<M: ClassScores> MatrixSet<M> {
    pub fn new(matrices: Vec<M>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::invalid_input("matrix set must contain at least one matrix"))?;
        let shape = (first.rows(), first.cols());
        if let Some(i) = matrices.iter().position(|m| (m.rows(), m.cols()) != shape) {
            return Err(Error::invalid_input(format!(
                "matrix {i} is {}x{}, expected {}x{}",
                matrices[i].rows(),
                matrices[i].cols(),
                shape.0,
                shape.1
            )));
        }
        Ok(MatrixSet { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[M] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<M> {
        self.matrices
    }

    pub fn rows(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.matrices[0].cols()
    }
}

/// Non-negative weights, at least one of them positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid_input("weight vector must be non-empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid_input("weights must be finite and non-negative"));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid_input("at least one weight must be positive"));
        }
        Ok(WeightVector(weights))
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
}

pub fn weights_uniform<M: ClassScores>(set: &MatrixSet<M>) -> WeightVector {
    WeightVector(vec![1.0; set.len()])
}

fn mean_row_max<M: ClassScores>(m: &M) -> f64 {
    let total: f64 = (0..m.rows())
        .map(|i| m.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    total / m.rows() as f64
}

/// Weight of each matrix = mean over its rows of the row maximum.
pub fn weights_meanmax<M: ClassScores>(set: &MatrixSet<M>) -> Result<WeightVector> {
    WeightVector::new(set.matrices.iter().map(mean_row_max).collect())
}

/// Elementwise `sum_i weights[i] * M_i`, accumulated in set order.
pub fn fuse<M: ClassScores>(set: &MatrixSet<M>, weights: &WeightVector) -> Result<FusedMatrix> {
    if weights.len() != set.len() {
        return Err(Error::invalid_input(format!(
            "{} weights for {} matrices",
            weights.len(),
            set.len()
        )));
    }
    let (rows, cols) = (set.rows(), set.cols());
    let mut data = vec![0.0; rows * cols];
    for (m, &w) in set.matrices.iter().zip(weights.as_slice()) {
        for i in 0..rows {
            for (acc, v) in data[i * cols..(i + 1) * cols].iter_mut().zip(m.row(i)) {
                *acc += w * v;
            }
        }
    }
    Ok(FusedMatrix { rows, cols, data })
}

/// Sum-rule labels: row-wise argmax of the weighted sum, ties to the lowest
/// class index.
pub fn sum_rule_combine<M: ClassScores>(set: &MatrixSet<M>, weights: &WeightVector) -> Result<Vec<usize>> {
    Ok(fuse(set, weights)?.argmax())
}

/// Cross-validated weights together with how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationWeights {
    pub weights: WeightVector,
    /// Folds actually used; lower than requested when a class is too small.
    pub folds_used: usize,
    pub models_fitted: usize,
}

/// Weight of lens `i` = stratified k-fold cross-validation accuracy of a lens
/// model built on it over the training data.
pub fn weights_validation(
    train: &[&[f64]],
    labels: &[usize],
    class_count: usize,
    lenses: &[Lens],
    forest: &ForestConfig,
    folds: usize,
    seed: u64,
) -> Result<ValidationWeights> {
    if folds < 2 {
        return Err(Error::invalid_input(format!(
            "cross-validation needs >= 2 folds, got {folds}"
        )));
    }
    if lenses.is_empty() {
        return Err(Error::invalid_input("no lenses to weight"));
    }
    if train.len() != labels.len() {
        return Err(Error::invalid_input(format!(
            "{} series but {} labels",
            train.len(),
            labels.len()
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &l) in labels.iter().enumerate() {
        by_class
            .get_mut(l)
            .ok_or_else(|| Error::invalid_input(format!("label {l} outside {class_count} classes")))?
            .push(i);
    }
    by_class.retain(|members| !members.is_empty());
    if by_class.len() < 2 {
        return Err(Error::degenerate("cross-validation needs at least two classes"));
    }
    let smallest = by_class.iter().map(Vec::len).min().expect("non-empty");
    let folds_used = folds.min(smallest);
    if folds_used < 2 {
        return Err(Error::degenerate(format!(
            "smallest class has {smallest} training sample(s); cross-validation needs 2"
        )));
    }
    if folds_used < folds {
        log::warn!(
            "smallest class has {smallest} samples; using {folds_used}-fold instead of {folds}-fold cross-validation"
        );
    }

    let mut rng = seed::rng(seed::derive_tagged(seed, seed::tag::VALIDATION, u64::MAX));
    let mut fold_of = vec![0usize; train.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = next % folds_used;
            next += 1;
        }
    }

    let jobs: Vec<(usize, usize)> = (0..lenses.len())
        .flat_map(|li| (0..folds_used).map(move |f| (li, f)))
        .collect();
    let correct = jobs
        .par_iter()
        .map(|&(li, fold)| {
            let (mut fit_x, mut fit_y, mut held_x, mut held_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (i, (&s, &l)) in train.iter().zip(labels).enumerate() {
                if fold_of[i] == fold {
                    held_x.push(s);
                    held_y.push(l);
                } else {
                    fit_x.push(s);
                    fit_y.push(l);
                }
            }
            let model_seed = seed::derive(seed::derive_tagged(seed, seed::tag::VALIDATION, li as u64), fold as u64);
            let model = fit_lens_model(&fit_x, &fit_y, class_count, lenses[li], forest, model_seed)?;
            let predicted = model.predict(&held_x)?;
            Ok(predicted.iter().zip(&held_y).filter(|(p, y)| p == y).count())
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut accuracy = vec![0.0; lenses.len()];
    for (&(li, _), c) in jobs.iter().zip(correct) {
        accuracy[li] += c as f64;
    }
    accuracy.iter_mut().for_each(|a| *a /= train.len() as f64);
    let weights = if accuracy.iter().all(|&a| a == 0.0) {
        log::warn!("every lens scored zero cross-validation accuracy; falling back to uniform weights");
        vec![1.0; lenses.len()]
    } else {
        accuracy
    };
    Ok(ValidationWeights {
        weights: WeightVector(weights),
        folds_used,
        models_fitted: jobs.len(),
    })
}
