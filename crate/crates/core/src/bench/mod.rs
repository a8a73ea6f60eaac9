//! Evaluation harness: archive parsing, the resampling protocol, results
//! files, rank statistics and the command-line front end.

pub mod cli;
pub mod results;
pub mod stats;
pub mod ts_format;

use rayon::prelude::*;

use crate::data::{stratified_resample, Dataset};
use crate::error::{Error, Result};
use crate::multivariate::{self, PipelineConfig, Variant};

pub use results::{read_results, write_results, ResultRow};
pub use stats::{compare, friedman_ranks, holm_cliques, wilcoxon_signed_rank, Clique, RankTable};
pub use ts_format::{parse_ts, read_ts_file};

/// Per-resample test accuracies of one variant on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub dataset: String,
    pub variant_id: u8,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Seed of resample 0; resample `i` runs with `base_seed + i`.
    pub base_seed: u64,
    pub config: PipelineConfig,
}

impl BenchmarkResult {
    pub fn new(dataset: impl Into<String>, variant_id: u8, accuracies: Vec<f64>, config: PipelineConfig) -> Self {
        let mean_accuracy = if accuracies.is_empty() {
            0.0
        } else {
            accuracies.iter().sum::<f64>() / accuracies.len() as f64
        };
        BenchmarkResult {
            dataset: dataset.into(),
            variant_id,
            accuracies,
            mean_accuracy,
            base_seed: config.seed,
            config,
        }
    }

    pub fn resample_seed(&self, resample: usize) -> u64 {
        resample_seed(self.base_seed, resample)
    }
}

/// Master seed of resample `resample`: the resample number itself, offset by
/// the configured base seed.
pub fn resample_seed(base_seed: u64, resample: usize) -> u64 {
    base_seed.wrapping_add(resample as u64)
}

pub fn accuracy(predicted: &[usize], actual: &[usize]) -> f64 {
    if actual.is_empty() {
        return 0.0;
    }
    let correct = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    correct as f64 / actual.len() as f64
}

/// Test accuracy of `variant` on resample `resample` of the pooled data.
pub fn evaluate_resample(
    train: &Dataset,
    test: &Dataset,
    variant: Variant,
    resample: usize,
    config: &PipelineConfig,
) -> Result<f64> {
    let plan = stratified_resample(train, test, resample)?;
    let (train, test) = plan.apply(train, test);
    let config = PipelineConfig {
        seed: resample_seed(config.seed, resample),
        ..*config
    };
    let report = multivariate::run(variant, &train, &test, &config)?;
    let acc = accuracy(&report.labels, test.labels());
    log::info!("{} {variant} resample {resample}: accuracy {acc:.4}", train.name());
    Ok(acc)
}

/// Evaluates `variant_id` on resamples `0..resample_count`.
pub fn run_benchmark(
    train: &Dataset,
    test: &Dataset,
    variant_id: u8,
    resample_count: usize,
    config: &PipelineConfig,
) -> Result<BenchmarkResult> {
    if resample_count == 0 {
        return Err(Error::invalid_input("need at least one resample"));
    }
    let variant = Variant::from_id(variant_id)?;
    let outcomes: Vec<Result<f64>> = (0..resample_count)
        .into_par_iter()
        .map(|i| evaluate_resample(train, test, variant, i, config))
        .collect();
    let accuracies = outcomes
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Resample {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BenchmarkResult::new(train.name(), variant_id, accuracies, *config))
}
