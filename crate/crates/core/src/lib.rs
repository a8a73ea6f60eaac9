//! Multivariate time-series classification with ensembles of symbolic
//! "lenses".
//!
//! Every lens turns a series into a short word, either through SAX
//! (piecewise aggregation in the time domain) or SFA (binned Fourier
//! coefficients). A random forest is trained per lens, and the per-lens
//! class-probability matrices are fused with a weighted sum rule. Multivariate
//! input is handled either by concatenating the dimensions into one long
//! series or by building one lens ensemble per dimension and fusing across
//! dimensions in one or two voting stages. Nine combinations of approach and
//! voting method are exposed as numbered variants, see [`multivariate::Variant`].
//!
//! The [`bench`] module holds the evaluation harness: `.ts` archive parsing,
//! seeded stratified resampling, results files and rank statistics.

pub mod bench;
pub mod data;
pub mod error;
pub mod forest;
pub mod lenses;
pub mod multivariate;
pub mod seed;
pub mod symbolic;
pub mod voting;

pub use data::{Dataset, LabelEncoding, ResamplePlan, TimeSeries};
pub use error::{Error, Result};
pub use lenses::{Lens, LensSelectionConfig, Representation};
pub use multivariate::{Approach, PipelineConfig, RunReport, Variant, VotingMethod};
