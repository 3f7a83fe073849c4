//! Blue noise by dart throwing over the data points.
//!
//! Candidates are visited in a seeded random order and accepted when no
//! previously accepted point lies closer than the disk radius. The radius
//! is found by bisection: the largest radius (to within the iteration
//! budget) whose dart pass still accepts at least the requested number of
//! points. The surplus is then trimmed uniformly at random, which keeps the
//! empty-disk property at that radius.

use std::f64::consts::SQRT_2;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{class_ratios, quotas_with_floor, LabeledDataset, PointSet, SampleIndexSet};
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::spatial::DartGrid;

use super::SamplingParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlueNoiseParams {
    pub r_lo: f64,
    pub r_hi: f64,
    pub max_radius_iters: usize,
}

impl Default for BlueNoiseParams {
    fn default() -> Self {
        BlueNoiseParams {
            r_lo: 1e-7,
            r_hi: SQRT_2,
            max_radius_iters: 30,
        }
    }
}

impl BlueNoiseParams {
    fn validate(&self) -> Result<()> {
        if !(self.r_lo > 0.0 && self.r_lo < self.r_hi && self.r_hi.is_finite()) {
            return Err(Error::invalid(format!(
                "blue-noise radius bounds must satisfy 0 < r_lo < r_hi (got {}, {})",
                self.r_lo, self.r_hi
            )));
        }
        Ok(())
    }
}

const MAX_HALVINGS: usize = 10;

/// One dart pass at radius `r` over `order`; returns accepted indices in
/// acceptance order.
fn dart_pass(points: &PointSet, order: &[usize], r: f64) -> Vec<usize> {
    let r2 = r * r;
    let mut grid = DartGrid::new(r / SQRT_2);
    let mut accepted = Vec::new();
    for &i in order {
        let p = points.point(i);
        if !grid.any_near(p, r, |_, d2| d2 < r2) {
            grid.insert(p, i);
            accepted.push(i);
        }
    }
    accepted
}

/// Bisection for the largest radius whose dart pass yields >= `target`.
fn search_radius(points: &PointSet, order: &[usize], target: usize, bp: &BlueNoiseParams) -> Result<(f64, Vec<usize>)> {
    bp.validate()?;
    let hi_set = dart_pass(points, order, bp.r_hi);
    if hi_set.len() >= target {
        return Ok((bp.r_hi, hi_set));
    }
    let mut lo_set = dart_pass(points, order, bp.r_lo);
    if lo_set.len() < target {
        return Err(Error::RadiusSearch(format!(
            "only {} points accepted at r_lo = {:e}, need {target}",
            lo_set.len(),
            bp.r_lo
        )));
    }
    let (mut lo, mut hi) = (bp.r_lo, bp.r_hi);
    for _ in 0..bp.max_radius_iters {
        let mid = 0.5 * (lo + hi);
        let set = dart_pass(points, order, mid);
        if set.len() >= target {
            lo = mid;
            lo_set = set;
        } else {
            hi = mid;
        }
    }
    Ok((lo, lo_set))
}

fn shuffled(mut v: Vec<usize>, seed: Seed) -> Vec<usize> {
    v.shuffle(&mut seed.rng());
    v
}

fn trim(mut set: Vec<usize>, target: usize, seed: Seed) -> Vec<usize> {
    if set.len() > target {
        set.sort_unstable();
        let (picked, _) = set.partial_shuffle(&mut seed.rng(), target);
        picked.to_vec()
    } else {
        set
    }
}

/// Blue noise sample and the final disk radius `r*`: no two selected points
/// are closer than `r*`.
pub fn blue_noise_with_radius(ds: &LabeledDataset, p: &SamplingParams, bp: &BlueNoiseParams) -> Result<(SampleIndexSet, f64)> {
    p.check_target(ds.len())?;
    bp.validate()?;
    if p.target_n == 0 {
        return Ok((SampleIndexSet::default(), bp.r_hi));
    }
    let order = shuffled((0..ds.len()).collect(), p.seed.derive(1));
    let (r, set) = search_radius(ds.points(), &order, p.target_n, bp)?;
    let picked = trim(set, p.target_n, p.seed.derive(2));
    Ok((SampleIndexSet::from_unsorted(picked), r))
}

pub fn sample_blue_noise(ds: &LabeledDataset, p: &SamplingParams, bp: &BlueNoiseParams) -> Result<SampleIndexSet> {
    blue_noise_with_radius(ds, p, bp).map(|(s, _)| s)
}

/// Result of multi-class blue noise sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiClassBlueNoise {
    pub indices: SampleIndexSet,
    /// Per-class disk radii of the final round. Same-class points are at
    /// least `class_radii[c]` apart; points of classes `a` and `b` at least
    /// `min(class_radii[a], class_radii[b])`.
    pub class_radii: Vec<f64>,
    pub quotas: Vec<usize>,
    /// Number of radius halvings that were needed.
    pub halvings: usize,
}

/// Per-class quotas by largest remainder, per-class radii from a
/// single-class radius search, then a joint dart pass with cross-class
/// conflict radius `min(r_a, r_b)`. Classes left short after a pass get
/// another pass with every radius halved.
pub fn multiclass_blue_noise_with_radii(ds: &LabeledDataset, p: &SamplingParams, bp: &BlueNoiseParams) -> Result<MultiClassBlueNoise> {
    p.check_target(ds.len())?;
    bp.validate()?;
    let k = ds.num_classes();
    if p.target_n == 0 {
        return Ok(MultiClassBlueNoise {
            indices: SampleIndexSet::default(),
            class_radii: vec![bp.r_hi; k],
            quotas: vec![0; k],
            halvings: 0,
        });
    }
    if p.target_n < k {
        return Err(Error::invalid(format!(
            "multi-class blue noise needs at least one slot per class ({} < {k})",
            p.target_n
        )));
    }
    let points = ds.points();
    let quotas = quotas_with_floor(p.target_n, &class_ratios(ds)?);
    let members = ds.class_members();

    let mut radii = Vec::with_capacity(k);
    for (c, m) in members.iter().enumerate() {
        let order = shuffled(m.clone(), p.seed.derive(100 + c as u64));
        let (r, _) = search_radius(points, &order, quotas[c], bp)?;
        radii.push(r);
    }

    let order = shuffled((0..ds.len()).collect(), p.seed.derive(1));
    let mut selected = vec![false; ds.len()];
    let mut chosen: Vec<usize> = Vec::with_capacity(p.target_n);
    let mut filled = vec![0usize; k];
    let mut halvings = 0;
    loop {
        let r_max = radii.iter().cloned().fold(0.0, f64::max);
        let mut grid = DartGrid::new(r_max / SQRT_2);
        for &j in &chosen {
            grid.insert(points.point(j), j);
        }
        for &i in &order {
            let c = ds.label(i);
            if selected[i] || filled[c] == quotas[c] {
                continue;
            }
            let pt = points.point(i);
            let rc = radii[c];
            let conflict = grid.any_near(pt, rc, |j, d2| {
                let cj = ds.label(j);
                let r = if cj == c { rc } else { rc.min(radii[cj]) };
                d2 < r * r
            });
            if !conflict {
                grid.insert(pt, i);
                selected[i] = true;
                chosen.push(i);
                filled[c] += 1;
            }
        }
        if filled == quotas {
            break;
        }
        if halvings == MAX_HALVINGS {
            return Err(Error::RadiusSearch(format!(
                "class quotas {quotas:?} still unfilled ({filled:?}) after {MAX_HALVINGS} halvings"
            )));
        }
        halvings += 1;
        radii.iter_mut().for_each(|r| *r *= 0.5);
    }
    Ok(MultiClassBlueNoise {
        indices: SampleIndexSet::from_unsorted(chosen),
        class_radii: radii,
        quotas,
        halvings,
    })
}

pub fn sample_multiclass_blue_noise(ds: &LabeledDataset, p: &SamplingParams, bp: &BlueNoiseParams) -> Result<SampleIndexSet> {
    multiclass_blue_noise_with_radii(ds, p, bp).map(|r| r.indices)
}
