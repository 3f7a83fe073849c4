//! Stimulus generation and the strategy benchmark: sampling-size ladders,
//! synthetic datasets, density questions and the metric sweep.

mod bench;
mod generate;
mod questions;

pub use bench::{
    bootstrap_mean_ci, load_config, run_benchmark, BenchmarkConfig, BenchmarkReport, CellMetrics, CellResult,
    DatasetInfo, DatasetSpec, MetricSummary, MetricTest, SizeSpec, StrategySummary, METRIC_NAMES,
};
pub use generate::{gen_gaussian_mixture, gen_two_density, MixtureSpec, TwoDensitySpec};
pub use questions::{gen_region_questions, QuestionKind, MAX_PLACEMENT_ATTEMPTS, QUESTION_SIDE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderSpec {
    pub base: usize,
    pub factor: f64,
    pub levels: usize,
    pub cutoff_rate: f64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec {
            base: 500,
            factor: 1.5,
            levels: 7,
            cutoff_rate: 0.5,
        }
    }
}

impl LadderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.base == 0 || !(self.factor > 1.0) || !self.factor.is_finite() || self.levels == 0 {
            return Err(Error::invalid(format!(
                "ladder needs base >= 1, factor > 1 and levels >= 1 (got {}, {}, {})",
                self.base, self.factor, self.levels
            )));
        }
        if !(self.cutoff_rate > 0.0) {
            return Err(Error::invalid("cutoff_rate must be positive"));
        }
        Ok(())
    }
}

/// `floor(base * factor^i)` for each level, keeping only sizes whose rate
/// against `dataset_size` does not exceed the cutoff.
pub fn sample_size_ladder(spec: &LadderSpec, dataset_size: usize) -> Result<Vec<usize>> {
    spec.validate()?;
    if dataset_size == 0 {
        return Err(Error::Empty("dataset"));
    }
    Ok((0..spec.levels)
        .map(|i| (spec.base as f64 * spec.factor.powi(i as i32)).floor() as usize)
        .filter(|&n| n as f64 / dataset_size as f64 <= spec.cutoff_rate)
        .collect())
}
