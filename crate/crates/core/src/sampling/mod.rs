//! The seven sampling strategies.
//!
//! Each strategy is a deterministic function of the dataset, the
//! [`SamplingParams`] and its seed. [`sample`] dispatches by
//! [`StrategyId`].

mod blue_noise;
mod density;
mod random;
mod subdivision;
mod zorder;

pub use blue_noise::{
    blue_noise_with_radius, multiclass_blue_noise_with_radii, sample_blue_noise,
    sample_multiclass_blue_noise, BlueNoiseParams, MultiClassBlueNoise,
};
pub use density::{
    density_weights, outlier_biased_weights, sample_density_biased,
    sample_outlier_biased_density, GridDensityParams, OutlierBiasParams,
};
pub use random::{sample_random, weighted_sample_without_replacement};
pub use subdivision::{sample_recursive_subdivision, subdivision_with_tree, KdLeaf, SubdivisionResult};
pub use zorder::{
    greedy_set_cover, morton_key, morton_key_bits, sample_multiview_zorder, zorder_cover,
    MortonKey, ZOrderCover,
};

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, SampleIndexSet};
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::strategy::StrategyId;

/// Shared parameters plus the strategy-specific bags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub target_n: usize,
    pub seed: Seed,
    /// Allowed relative deviation of the result size for strategies that
    /// cannot hit the target exactly (MVZS, RSBS).
    pub rate_tolerance: f64,
    pub blue_noise: BlueNoiseParams,
    pub grid: GridDensityParams,
    pub outlier_bias: OutlierBiasParams,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            target_n: 0,
            seed: Seed(0),
            rate_tolerance: 0.01,
            blue_noise: BlueNoiseParams::default(),
            grid: GridDensityParams::default(),
            outlier_bias: OutlierBiasParams::default(),
        }
    }
}

impl SamplingParams {
    pub fn new(target_n: usize, seed: impl Into<Seed>) -> Self {
        SamplingParams {
            target_n,
            seed: seed.into(),
            ..Default::default()
        }
    }

    pub(crate) fn check_target(&self, n: usize) -> Result<()> {
        if self.target_n > n {
            return Err(Error::TooManyRequested {
                requested: self.target_n,
                available: n,
            });
        }
        if !(self.rate_tolerance >= 0.0) {
            return Err(Error::invalid("rate_tolerance must be nonnegative"));
        }
        Ok(())
    }

    /// Largest absolute size deviation allowed by `rate_tolerance`.
    pub fn allowed_deviation(&self) -> usize {
        (self.rate_tolerance * self.target_n as f64 + 1e-9).floor() as usize
    }
}

/// Runs `strategy` on `ds`.
pub fn sample(strategy: StrategyId, ds: &LabeledDataset, params: &SamplingParams) -> Result<SampleIndexSet> {
    match strategy {
        StrategyId::Rs => sample_random(ds, params),
        StrategyId::Bns => sample_blue_noise(ds, params, &params.blue_noise),
        StrategyId::Dbs => sample_density_biased(ds, params, &params.grid),
        StrategyId::Mcbns => sample_multiclass_blue_noise(ds, params, &params.blue_noise),
        StrategyId::Obdbs => {
            sample_outlier_biased_density(ds, params, &params.grid, &params.outlier_bias)
        }
        StrategyId::Mvzs => sample_multiview_zorder(ds, params),
        StrategyId::Rsbs => sample_recursive_subdivision(ds, params),
    }
}
