//! Sampling strategies for multi-class scatterplots, plus the tooling used
//! to compare them: outlier oracles, quality metrics and rank tests.
//!
//! The seven strategies ([`StrategyId`]) all share one contract: a pure,
//! seeded function from a normalized [`LabeledDataset`] to a
//! [`SampleIndexSet`]. Everything downstream consumes index sets, so
//! question truths and outlier ground truth always come from the full
//! dataset.
//!
//! k-NN scoring, KDE lattices and benchmark cells run on rayon when the `parallel` feature is enabled, which it is by
//! default. See [`par::Parallelism`].

// NaN-rejecting checks are written as `!(x >= 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod outliers;
pub mod par;
pub mod rng;
pub mod sampling;
pub mod spatial;
pub mod stats;
pub mod strategy;

pub use dataset::{class_ratios, normalize_points, LabeledDataset, PointSet, Rect, SampleIndexSet};
pub use error::{Error, Result};
pub use rng::Seed;
pub use sampling::{sample, SamplingParams};
pub use strategy::{capabilities, StrategyCapabilities, StrategyId};
