//! Per-lens base classifier: a random forest over symbolic words.
//!
//! Word symbols are fed to the forest as ordinal features, one per word
//! position. Trees are CART classifiers on Gini impurity, trained on
//! bootstrap samples with `ceil(sqrt(w))` candidate features per split and
//! grown until their leaves are pure (or no feature can separate the
//! remaining samples).

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed;
use crate::symbolic::{FittedTransform, Lens};
use crate::voting;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub trees: usize,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            bootstrap: true,
        }
    }
}

/// Row-major matrix of ordinal features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid_input("feature rows differ in length"));
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }
}

/// An `m x n` matrix of class probabilities, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ProbabilityMatrix {
    /// Builds a matrix from rows; every entry must be in `[0, 1]` and every
    /// row must sum to one within `1e-9`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::invalid_input("probability matrix must be non-empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid_input(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid_input(format!("row {i} has entries outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid_input(format!("row {i} sums to {sum}")));
            }
        }
        Ok(ProbabilityMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub(crate) fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        ProbabilityMatrix { rows, cols, data }
    }

    /// Number of samples (m).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of classes (n).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Row-wise argmax, ties to the lowest class index.
    pub fn argmax(&self) -> Vec<usize> {
        (0..self.rows).map(|i| voting::argmax(self.row(i))).collect()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        distribution: Box<[f64]>,
    },
    Split {
        feature: usize,
        /// Samples with `value <= threshold` go left.
        threshold: u32,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    fn leaf_distribution(&self, row: &[u32]) -> &[f64] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    /// Scratch table of `(value, class)` counts.
    counts: Vec<f64>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, samples: Vec<usize>, rng: &mut seed::Rng) -> DecisionTree {
        let mut nodes = vec![Node::Leaf {
            distribution: Box::new([]),
        }];
        let mut stack = vec![(0usize, samples)];
        let mut features: Vec<usize> = (0..self.x.cols()).collect();
        while let Some((id, samples)) = stack.pop() {
            let class_counts = self.class_counts(&samples);
            let pure = class_counts.iter().filter(|&&c| c > 0.0).count() <= 1;
            let split = if pure {
                None
            } else {
                features.shuffle(rng);
                self.best_split(&samples, &features)
            };
            match split {
                None => {
                    let total = samples.len() as f64;
                    nodes[id] = Node::Leaf {
                        distribution: class_counts.iter().map(|c| c / total).collect(),
                    };
                }
                Some((feature, threshold)) => {
                    let (left_samples, right_samples): (Vec<usize>, Vec<usize>) =
                        samples.iter().partition(|&&s| self.x.get(s, feature) <= threshold);
                    let (left, right) = (nodes.len(), nodes.len() + 1);
                    let placeholder = || Node::Leaf {
                        distribution: Box::new([]),
                    };
                    nodes.push(placeholder());
                    nodes.push(placeholder());
                    nodes[id] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    stack.push((right, right_samples));
                    stack.push((left, left_samples));
                }
            }
        }
        DecisionTree { nodes }
    }

    fn class_counts(&self, samples: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_classes];
        for &s in samples {
            counts[self.y[s]] += 1.0;
        }
        counts
    }

    /// Scans features in the given order until `mtry` of them that are not
    /// constant on `samples` have been evaluated, and returns the split with
    /// the lowest weighted Gini impurity.
    fn best_split(&mut self, samples: &[usize], features: &[usize]) -> Option<(usize, u32)> {
        let mut best: Option<(f64, usize, u32)> = None;
        let mut evaluated = 0;
        for &feature in features {
            if evaluated == self.mtry {
                break;
            }
            if let Some((score, threshold)) = self.best_threshold(samples, feature) {
                evaluated += 1;
                if best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    /// Best threshold on one feature, scored by `sum over children of
    /// sum_c count_c^2 / child_size` (larger is purer). `None` when the
    /// feature is constant on `samples`.
    fn best_threshold(&mut self, samples: &[usize], feature: usize) -> Option<(f64, u32)> {
        let max_value = samples.iter().map(|&s| self.x.get(s, feature)).max()? as usize;
        let k = self.n_classes;
        self.counts.clear();
        self.counts.resize((max_value + 1) * k, 0.0);
        for &s in samples {
            self.counts[self.x.get(s, feature) as usize * k + self.y[s]] += 1.0;
        }

        let mut total = vec![0.0; k];
        for row in self.counts.chunks_exact(k) {
            for (t, c) in total.iter_mut().zip(row) {
                *t += c;
            }
        }
        let n = samples.len() as f64;
        let mut left = vec![0.0; k];
        let mut left_n = 0.0;
        let mut best: Option<(f64, u32)> = None;
        for v in 0..max_value {
            let row = &self.counts[v * k..(v + 1) * k];
            let here: f64 = row.iter().sum();
            if here == 0.0 {
                continue;
            }
            for c in 0..k {
                left[c] += row[c];
            }
            left_n += here;
            let right_n = n - left_n;
            if right_n == 0.0 {
                break;
            }
            let mut left_sq = 0.0;
            let mut right_sq = 0.0;
            for c in 0..k {
                left_sq += left[c] * left[c];
                let r = total[c] - left[c];
                right_sq += r * r;
            }
            let score = left_sq / left_n + right_sq / right_n;
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, v as u32));
            }
        }
        best
    }
}

/// Random forest of CART trees over ordinal features.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_features: usize,
    n_classes: usize,
}

impl RandomForest {
    /// Fits `config.trees` trees; tree `t` draws its randomness from a seed
    /// derived from `(seed, t)` so the result does not depend on scheduling.
    pub fn fit(x: &FeatureMatrix, y: &[usize], n_classes: usize, config: &ForestConfig, seed: u64) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::invalid_input(format!(
                "{} rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::invalid_input("cannot fit a forest on an empty matrix"));
        }
        if config.trees == 0 {
            return Err(Error::invalid_input("forest needs at least one tree"));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::invalid_input(format!("label {bad} outside {n_classes} classes")));
        }
        let mtry = (x.cols() as f64).sqrt().ceil() as usize;
        let trees = (0..config.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(seed::derive(seed, t as u64));
                let samples: Vec<usize> = if config.bootstrap {
                    (0..x.rows()).map(|_| rng.gen_range(0..x.rows())).collect()
                } else {
                    (0..x.rows()).collect()
                };
                TreeBuilder {
                    x,
                    y,
                    n_classes,
                    mtry,
                    counts: Vec::new(),
                }
                .build(samples, &mut rng)
            })
            .collect();
        Ok(RandomForest {
            trees,
            n_features: x.cols(),
            n_classes,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Mean of the trees' leaf class distributions.
    pub fn predict_proba_row(&self, row: &[u32]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (o, p) in out.iter_mut().zip(tree.leaf_distribution(row)) {
                *o += p;
            }
        }
        let t = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= t);
        out
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityMatrix> {
        if x.cols() != self.n_features {
            return Err(Error::invalid_input(format!(
                "{} features given, forest expects {}",
                x.cols(),
                self.n_features
            )));
        }
        let data = (0..x.rows()).flat_map(|i| self.predict_proba_row(x.row(i))).collect();
        Ok(ProbabilityMatrix::from_flat(x.rows(), self.n_classes, data))
    }
}

/// A fitted lens: its transform state plus the forest trained on the
/// transformed training set.
#[derive(Debug, Clone)]
pub struct LensModel {
    transform: FittedTransform,
    forest: RandomForest,
    series_length: usize,
}

impl LensModel {
    pub fn lens(&self) -> &Lens {
        self.transform.lens()
    }

    pub fn forest(&self) -> &RandomForest {
        &self.forest
    }

    pub fn class_count(&self) -> usize {
        self.forest.n_classes()
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    /// One probability row per test series.
    pub fn predict_prob_matrix(&self, test: &[&[f64]]) -> Result<ProbabilityMatrix> {
        if test.is_empty() {
            return Err(Error::invalid_input("no test series"));
        }
        if let Some(bad) = test.iter().find(|s| s.len() != self.series_length) {
            return Err(Error::invalid_input(format!(
                "test series of length {} but model was trained on length {}",
                bad.len(),
                self.series_length
            )));
        }
        self.forest.predict_proba(&words(&self.transform, test)?)
    }

    pub fn predict(&self, test: &[&[f64]]) -> Result<Vec<usize>> {
        Ok(self.predict_prob_matrix(test)?.argmax())
    }
}

fn words(transform: &FittedTransform, series: &[&[f64]]) -> Result<FeatureMatrix> {
    let rows = series
        .par_iter()
        .map(|s| transform.transform(s).map(|w| w.symbols().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::from_rows(&rows)
}

/// Fits `lens` on the training series, then a forest on their words.
pub fn fit_lens_model(
    train: &[&[f64]],
    labels: &[usize],
    class_count: usize,
    lens: Lens,
    config: &ForestConfig,
    seed: u64,
) -> Result<LensModel> {
    if train.len() != labels.len() {
        return Err(Error::invalid_input(format!(
            "{} series but {} labels",
            train.len(),
            labels.len()
        )));
    }
    if train.len() < 2 {
        return Err(Error::degenerate("need at least two training samples"));
    }
    let first = labels[0];
    if labels.iter().all(|&l| l == first) {
        return Err(Error::degenerate("training data contains a single class"));
    }
    let transform = FittedTransform::fit(lens, train)?;
    let forest = RandomForest::fit(&words(&transform, train)?, labels, class_count, config, seed)?;
    Ok(LensModel {
        transform,
        forest,
        series_length: train[0].len(),
    })
}
