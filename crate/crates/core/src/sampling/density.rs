//! Density biased sampling and its outlier-biased variant.
//!
//! Points are binned on a `g × g` grid; a point in a bin holding `n_b`
//! points gets weight `n_b^(alpha - 1)`, so `alpha < 1` over-samples sparse
//! bins. The outlier-biased variant blends that (normalized) weight with
//! normalized per-point outlier scores.

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, PointSet, SampleIndexSet};
use crate::error::{Error, Result};
use crate::outliers;

use super::{weighted_sample_without_replacement, SamplingParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridDensityParams {
    pub grid_g: usize,
    pub alpha: f64,
}

impl Default for GridDensityParams {
    fn default() -> Self {
        GridDensityParams { grid_g: 32, alpha: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutlierBiasParams {
    pub lambda: f64,
    /// Normalized per-point outlier scores in `[0, 1]`. When absent,
    /// normalized LOF scores with `k = 20` are computed.
    pub outlier_scores: Option<Vec<f64>>,
}

impl Default for OutlierBiasParams {
    fn default() -> Self {
        OutlierBiasParams {
            lambda: 0.5,
            outlier_scores: None,
        }
    }
}

const DEFAULT_LOF_K: usize = 20;

/// Per-point `n_b^(alpha - 1)` weights.
pub fn density_weights(points: &PointSet, gp: &GridDensityParams) -> Result<Vec<f64>> {
    if gp.grid_g == 0 {
        return Err(Error::invalid("grid_g must be at least 1"));
    }
    if !(0.0..=1.0).contains(&gp.alpha) {
        return Err(Error::invalid(format!("alpha {} outside [0, 1]", gp.alpha)));
    }
    let g = gp.grid_g;
    let bin = |v: f64| ((v * g as f64) as usize).min(g - 1);
    let bins: Vec<usize> = points.iter().map(|p| bin(p[1]) * g + bin(p[0])).collect();
    let mut counts = vec![0u32; g * g];
    for &b in &bins {
        counts[b] += 1;
    }
    let e = gp.alpha - 1.0;
    Ok(bins.iter().map(|&b| (counts[b] as f64).powf(e)).collect())
}

/// `(1 - lambda) * d_i / sum(d) + lambda * o_i / sum(o)`. A score vector
/// that is identically zero contributes nothing.
pub fn outlier_biased_weights(points: &PointSet, gp: &GridDensityParams, lambda: f64, scores: &[f64]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda {lambda} outside [0, 1]")));
    }
    if scores.len() != points.len() {
        return Err(Error::LengthMismatch {
            what: "outlier scores/points",
            left: scores.len(),
            right: points.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::invalid(format!("outlier score {i} outside [0, 1]")));
    }
    let density = density_weights(points, gp)?;
    let zd: f64 = density.iter().sum();
    let zo: f64 = scores.iter().sum();
    Ok(density
        .iter()
        .zip(scores)
        .map(|(&d, &o)| {
            let dt = if zd > 0.0 { d / zd } else { 0.0 };
            let ot = if zo > 0.0 { o / zo } else { 0.0 };
            (1.0 - lambda) * dt + lambda * ot
        })
        .collect())
}

pub fn sample_density_biased(ds: &LabeledDataset, p: &SamplingParams, gp: &GridDensityParams) -> Result<SampleIndexSet> {
    p.check_target(ds.len())?;
    let w = density_weights(ds.points(), gp)?;
    weighted_sample_without_replacement(&w, p.target_n, p.seed)
}

pub fn sample_outlier_biased_density(
    ds: &LabeledDataset,
    p: &SamplingParams,
    gp: &GridDensityParams,
    ob: &OutlierBiasParams,
) -> Result<SampleIndexSet> {
    p.check_target(ds.len())?;
    let computed;
    let scores = match &ob.outlier_scores {
        Some(s) => s.as_slice(),
        None => {
            computed = if ds.len() > 1 {
                outliers::lof_scores(ds.points(), DEFAULT_LOF_K.min(ds.len() - 1))?.into_vec()
            } else {
                vec![0.0; ds.len()]
            };
            &computed
        }
    };
    let w = outlier_biased_weights(ds.points(), gp, ob.lambda, scores)?;
    weighted_sample_without_replacement(&w, p.target_n, p.seed)
}
