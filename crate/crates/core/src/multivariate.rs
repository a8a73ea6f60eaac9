//! Multivariate pipelines and the nine numbered variants.
//!
//! The univariate foundation draws a random lens set, fits one
//! [`LensModel`](crate::forest::LensModel) per lens and fuses their
//! probability matrices with the sum rule. Multivariate data reaches it in
//! one of two ways:
//!
//! * **Concatenating**: the dimensions of each instance are laid end to end
//!   and the foundation runs once on the joint series. The number of lenses
//!   is still sized from the per-dimension length.
//! * **Ensembling**: the foundation runs once per dimension. Approach 1 pools
//!   every per-dimension matrix into one set and votes once; approach 2 fuses
//!   each dimension's matrices first and votes again over the fused matrices.
//!
//! Both SAX and SFA z-normalize their input, so the concatenating pipeline
//! normalizes the joint series while ensembling normalizes each dimension.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{fit_lens_model, ForestConfig, ProbabilityMatrix};
use crate::lenses::{draw_lenses_for, Lens, LensSelectionConfig};
use crate::seed::{self, tag};
use crate::voting::{self, FusedMatrix, MatrixSet, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VotingMethod {
    Uniform,
    MeanMax,
    Validation,
}

impl fmt::Display for VotingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VotingMethod::Uniform => "uniform",
            VotingMethod::MeanMax => "meanmax",
            VotingMethod::Validation => "validation",
        })
    }
}

impl FromStr for VotingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(VotingMethod::Uniform),
            "meanmax" | "mean-max" => Ok(VotingMethod::MeanMax),
            "validation" => Ok(VotingMethod::Validation),
            other => Err(Error::invalid_input(format!(
                "unknown voting method {other:?} (expected uniform, meanmax or validation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approach {
    Concatenating,
    Ensembling1,
    Ensembling2,
}

/// One of the nine approach/voting combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    id: u8,
    pub approach: Approach,
    pub voting_1: VotingMethod,
    pub voting_2: Option<VotingMethod>,
}

impl Variant {
    pub const IDS: std::ops::RangeInclusive<u8> = 1..=9;

    pub fn from_id(id: u8) -> Result<Self> {
        use Approach::*;
        use VotingMethod::*;
        let (approach, voting_1, voting_2) = match id {
            1 => (Concatenating, Uniform, None),
            2 => (Concatenating, MeanMax, None),
            3 => (Concatenating, Validation, None),
            4 => (Ensembling1, Uniform, None),
            5 => (Ensembling1, MeanMax, None),
            6 => (Ensembling2, Uniform, Some(Uniform)),
            7 => (Ensembling2, Uniform, Some(MeanMax)),
            8 => (Ensembling2, MeanMax, Some(MeanMax)),
            9 => (Ensembling2, MeanMax, Some(Uniform)),
            _ => {
                return Err(Error::invalid_input(format!("variant {id} outside 1..=9")));
            }
        };
        Ok(Variant {
            id,
            approach,
            voting_1,
            voting_2,
        })
    }

    pub fn all() -> Vec<Variant> {
        Self::IDS.map(|id| Variant::from_id(id).expect("in range")).collect()
    }

    pub fn id(&self) -> u8 {
        self.id
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RED CoMETS-{}", self.id)
    }
}

/// Everything a pipeline run needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Lens proportion and alphabet/word bounds; its `seed` is ignored in
    /// favour of [`PipelineConfig::seed`].
    pub lenses: LensSelectionConfig,
    pub forest: ForestConfig,
    pub folds: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lenses: LensSelectionConfig::default(),
            forest: ForestConfig::default(),
            folds: 5,
            seed: 0,
        }
    }
}

/// Predictions plus what it took to make them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub labels: Vec<usize>,
    /// Final fused class scores, one row per test instance.
    pub scores: FusedMatrix,
    /// Lenses of every ensemble member, dimension-major for ensembling runs.
    pub lenses: Vec<Lens>,
    /// Lens models fitted for the ensemble itself.
    pub lens_models_fitted: usize,
    /// Extra lens models fitted for cross-validated weights.
    pub validation_models_fitted: usize,
}

#[derive(Default)]
struct Counters {
    lens_models: AtomicUsize,
    validation_models: AtomicUsize,
}

/// Seed of the independent pipeline for dimension `dim`. The concatenating
/// pipeline and a univariate run both use dimension 0.
fn group_seed(master: u64, dim: usize) -> u64 {
    seed::derive_tagged(master, tag::DIMENSION, dim as u64)
}

/// One univariate lens ensemble: lenses, their matrices on the test set, and
/// their stage weights.
struct Member {
    lenses: Vec<Lens>,
    set: MatrixSet,
    weights: WeightVector,
}

#[allow(clippy::too_many_arguments)]
fn univariate_member(
    train: &[&[f64]],
    labels: &[usize],
    class_count: usize,
    test: &[&[f64]],
    count_length: usize,
    voting: VotingMethod,
    config: &PipelineConfig,
    group: u64,
    counters: &Counters,
) -> Result<Member> {
    let selection = LensSelectionConfig {
        seed: seed::derive_tagged(group, tag::LENS_DRAW, 0),
        ..config.lenses
    };
    let series_length = train
        .first()
        .ok_or_else(|| Error::invalid_input("no training series"))?
        .len();
    let lenses = draw_lenses_for(&selection, count_length, series_length)?;
    let matrices = lenses
        .par_iter()
        .enumerate()
        .map(|(i, &lens)| {
            let model_seed = seed::derive_tagged(group, tag::LENS_MODEL, i as u64);
            let model = fit_lens_model(train, labels, class_count, lens, &config.forest, model_seed)?;
            counters.lens_models.fetch_add(1, Ordering::Relaxed);
            model.predict_prob_matrix(test)
        })
        .collect::<Result<Vec<ProbabilityMatrix>>>()?;
    let set = MatrixSet::new(matrices)?;
    let weights = match voting {
        VotingMethod::Uniform => voting::weights_uniform(&set),
        VotingMethod::MeanMax => voting::weights_meanmax(&set)?,
        VotingMethod::Validation => {
            let out = voting::weights_validation(
                train,
                labels,
                class_count,
                &lenses,
                &config.forest,
                config.folds,
                seed::derive_tagged(group, tag::VALIDATION, 0),
            )?;
            counters
                .validation_models
                .fetch_add(out.models_fitted, Ordering::Relaxed);
            out.weights
        }
    };
    Ok(Member { lenses, set, weights })
}

fn check_compatible(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.dims() != test.dims() || train.series_length() != test.series_length() {
        return Err(Error::invalid_input(format!(
            "train is {}x{} but test is {}x{} (dimensions x length)",
            train.dims(),
            train.series_length(),
            test.dims(),
            test.series_length()
        )));
    }
    if train.encoding() != test.encoding() {
        return Err(Error::invalid_input("train and test use different class sets"));
    }
    Ok(())
}

fn report(labels: Vec<usize>, scores: FusedMatrix, lenses: Vec<Lens>, counters: Counters) -> RunReport {
    RunReport {
        labels,
        scores,
        lenses,
        lens_models_fitted: counters.lens_models.into_inner(),
        validation_models_fitted: counters.validation_models.into_inner(),
    }
}

/// The univariate foundation on raw series.
pub fn classify_univariate(
    train: &[&[f64]],
    labels: &[usize],
    class_count: usize,
    test: &[&[f64]],
    voting: VotingMethod,
    config: &PipelineConfig,
) -> Result<RunReport> {
    let length = train
        .first()
        .ok_or_else(|| Error::invalid_input("no training series"))?
        .len();
    let counters = Counters::default();
    let member = univariate_member(
        train,
        labels,
        class_count,
        test,
        length,
        voting,
        config,
        group_seed(config.seed, 0),
        &counters,
    )?;
    let scores = voting::fuse(&member.set, &member.weights)?;
    Ok(report(scores.argmax(), scores, member.lenses, counters))
}

/// The dimensions of one instance laid end to end.
pub fn concatenate_dimensions(instance: &[Vec<f64>]) -> Vec<f64> {
    instance.concat()
}

pub fn classify_concatenating(
    train: &Dataset,
    test: &Dataset,
    voting: VotingMethod,
    config: &PipelineConfig,
) -> Result<RunReport> {
    check_compatible(train, test)?;
    // Instances are stored dimension after dimension, so each instance slice
    // already is its concatenation.
    let train_series: Vec<&[f64]> = (0..train.len()).map(|i| train.instance(i)).collect();
    let test_series: Vec<&[f64]> = (0..test.len()).map(|i| test.instance(i)).collect();
    let counters = Counters::default();
    let member = univariate_member(
        &train_series,
        train.labels(),
        train.class_count(),
        &test_series,
        train.series_length(),
        voting,
        config,
        group_seed(config.seed, 0),
        &counters,
    )?;
    let scores = voting::fuse(&member.set, &member.weights)?;
    Ok(report(scores.argmax(), scores, member.lenses, counters))
}

fn per_dimension_members(
    train: &Dataset,
    test: &Dataset,
    voting: VotingMethod,
    config: &PipelineConfig,
    counters: &Counters,
) -> Result<Vec<Member>> {
    check_compatible(train, test)?;
    (0..train.dims())
        .into_par_iter()
        .map(|dim| {
            univariate_member(
                &train.dimension(dim),
                train.labels(),
                train.class_count(),
                &test.dimension(dim),
                train.series_length(),
                voting,
                config,
                group_seed(config.seed, dim),
                counters,
            )
        })
        .collect()
}

/// Ensembling approach 1: every dimension's matrices pooled into one set and
/// fused with a single sum-rule vote.
pub fn classify_ensembling_1(
    train: &Dataset,
    test: &Dataset,
    voting: VotingMethod,
    config: &PipelineConfig,
) -> Result<RunReport> {
    let counters = Counters::default();
    let members = per_dimension_members(train, test, voting, config, &counters)?;
    let mut lenses = Vec::new();
    let mut matrices = Vec::new();
    let mut weights = Vec::new();
    for m in members {
        lenses.extend(m.lenses);
        weights.extend_from_slice(m.weights.as_slice());
        matrices.extend(m.set.into_matrices());
    }
    let all = MatrixSet::new(matrices)?;
    // Uniform and mean-max weights are per matrix, so weighting each
    // dimension's set and concatenating equals weighting the pooled set.
    let weights = WeightVector::new(weights)?;
    let scores = voting::fuse(&all, &weights)?;
    Ok(report(scores.argmax(), scores, lenses, counters))
}

/// Ensembling approach 2: each dimension's matrices fused with `voting_1`,
/// then the fused matrices voted on again with `voting_2`.
pub fn classify_ensembling_2(
    train: &Dataset,
    test: &Dataset,
    voting_1: VotingMethod,
    voting_2: VotingMethod,
    config: &PipelineConfig,
) -> Result<RunReport> {
    if voting_2 == VotingMethod::Validation {
        return Err(Error::invalid_input("second-stage voting must be uniform or meanmax"));
    }
    let counters = Counters::default();
    let members = per_dimension_members(train, test, voting_1, config, &counters)?;
    let mut lenses = Vec::new();
    let mut fused = Vec::with_capacity(members.len());
    for m in members {
        fused.push(voting::fuse(&m.set, &m.weights)?);
        lenses.extend(m.lenses);
    }
    let stage_two = MatrixSet::new(fused)?;
    let weights = match voting_2 {
        VotingMethod::Uniform => voting::weights_uniform(&stage_two),
        _ => voting::weights_meanmax(&stage_two)?,
    };
    let scores = voting::fuse(&stage_two, &weights)?;
    Ok(report(scores.argmax(), scores, lenses, counters))
}

pub fn run(variant: Variant, train: &Dataset, test: &Dataset, config: &PipelineConfig) -> Result<RunReport> {
    match variant.approach {
        Approach::Concatenating => classify_concatenating(train, test, variant.voting_1, config),
        Approach::Ensembling1 => classify_ensembling_1(train, test, variant.voting_1, config),
        Approach::Ensembling2 => classify_ensembling_2(
            train,
            test,
            variant.voting_1,
            variant.voting_2.expect("ensembling 2 has a second stage"),
            config,
        ),
    }
}

pub fn run_variant(variant_id: u8, train: &Dataset, test: &Dataset, config: &PipelineConfig) -> Result<RunReport> {
    run(Variant::from_id(variant_id)?, train, test, config)
}
