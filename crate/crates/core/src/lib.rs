//! Neighborhood cumulative distribution function (NCDF) transform and
//! anomaly scoring.
//!
//! Every observation of a dataset normalized to the unit cube is mapped to a
//! staircase curve: the fraction of the dataset enclosed by an L^p
//! neighborhood around the observation as a function of the (normalized)
//! neighborhood radius. Outliers produce curves that stand apart from the
//! rest of the family, which the scoring methods in [`scoring`] turn into
//! anomaly scores in `[0, 1]`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! execution and the command line live in the companion `ncdf` crate.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod eval;
pub mod family;
pub mod geometry;
mod math;
pub mod scoring;
pub mod simulate;

pub use dataset::{minmax_normalize, slice_windows, subsample_prevalence, Dataset, MinMax};
pub use error::{Error, Result};
pub use eval::{
    confusion_at_threshold, mann_whitney_auc, roc_curve, windowed_eval, Confusion, Detector,
    EvalConfig, EvalReport, RocPoint,
};
pub use family::{
    build_family, curve_value, intercepts_at_level, score_test_observation, DistanceMatrix,
    InterceptMatrix, NcdfCurve, NcdfFamily, ReferenceModel,
};
pub use geometry::{
    epsilon_max, in_neighborhood, log10_volume_ratio, log_volume, lp_distance, NeighborhoodSpec,
    NormParam,
};
pub use scoring::{
    gaps_score_at_level, hist_score_at_level, knn_baseline_score, score_family, Method,
    ScoreReport, ScoringConfig, ScoringContext,
};
