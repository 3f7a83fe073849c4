use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{normalize_points, quotas_with_floor, LabeledDataset, PointSet};
use crate::error::{Error, Result};
use crate::rng::{self, Seed};

pub const MIN_CLASSES: usize = 3;
pub const MAX_CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub classes: usize,
    pub n: usize,
    #[serde(default)]
    pub seed: Seed,
}

/// Isotropic Gaussian blobs, one per class. Means are uniform in
/// `[0.15, 0.85]²`, standard deviations uniform in `[0.02, 0.1]`, class
/// sizes follow Dirichlet(1) weights. Coordinates are clipped to the unit
/// square and then min-max normalized.
pub fn gen_gaussian_mixture(spec: &MixtureSpec) -> Result<LabeledDataset> {
    let k = spec.classes;
    if !(MIN_CLASSES..=MAX_CLASSES).contains(&k) {
        return Err(Error::invalid(format!("classes must be in {MIN_CLASSES}..={MAX_CLASSES}, got {k}")));
    }
    if spec.n < k {
        return Err(Error::invalid(format!("n = {} is smaller than the class count {k}", spec.n)));
    }
    let mut rng = spec.seed.rng();
    let comps: Vec<([f64; 2], f64)> = (0..k)
        .map(|_| {
            let m = [rng.random_range(0.15..=0.85), rng.random_range(0.15..=0.85)];
            (m, rng.random_range(0.02..=0.1))
        })
        .collect();
    let weights: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
    let counts = quotas_with_floor(spec.n, &weights);

    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for (c, (&(mean, sd), &count)) in comps.iter().zip(&counts).enumerate() {
        let nx = Normal::new(mean[0], sd).expect("positive sd");
        let ny = Normal::new(mean[1], sd).expect("positive sd");
        for _ in 0..count {
            xs.push(nx.sample(&mut rng).clamp(0.0, 1.0));
            ys.push(ny.sample(&mut rng).clamp(0.0, 1.0));
            labels.push(c as u32);
        }
    }
    LabeledDataset::new(normalize_points(&xs, &ys)?, labels)
}

/// A dense square and a sparse rectangle of evenly spread points, labelled
/// 0 and 1. Coordinates are already in the unit square and are not
/// renormalized, so the two regions keep their areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoDensitySpec {
    pub n: usize,
    /// Share of the points in the sparse region.
    pub sparse_fraction: f64,
    /// `[x0, y0, x1, y1]`.
    pub dense_rect: [f64; 4],
    pub sparse_rect: [f64; 4],
    pub seed: Seed,
}

impl Default for TwoDensitySpec {
    fn default() -> Self {
        TwoDensitySpec {
            n: 10_000,
            sparse_fraction: 0.04,
            dense_rect: [0.05, 0.05, 0.45, 0.45],
            sparse_rect: [0.55, 0.05, 0.95, 0.95],
            seed: Seed(0),
        }
    }
}

/// Jittered grid: `m` distinct cells of a near-square lattice over the
/// rectangle, one uniform point per cell.
fn jittered(rect: [f64; 4], m: usize, rng: &mut rng::Rng, xs: &mut Vec<f64>, ys: &mut Vec<f64>) {
    if m == 0 {
        return;
    }
    let (w, h) = (rect[2] - rect[0], rect[3] - rect[1]);
    let cols = ((m as f64 * w / h).sqrt().ceil() as usize).max(1);
    let rows = m.div_ceil(cols);
    let (cw, ch) = (w / cols as f64, h / rows as f64);
    let mut cells = index::sample(rng, cols * rows, m).into_vec();
    cells.sort_unstable();
    for cell in cells {
        let (cx, cy) = ((cell % cols) as f64, (cell / cols) as f64);
        xs.push(rect[0] + (cx + rng.random::<f64>()) * cw);
        ys.push(rect[1] + (cy + rng.random::<f64>()) * ch);
    }
}

pub fn gen_two_density(spec: &TwoDensitySpec) -> Result<LabeledDataset> {
    if spec.n < 2 {
        return Err(Error::invalid("two-density data needs at least 2 points"));
    }
    if !(spec.sparse_fraction > 0.0 && spec.sparse_fraction < 1.0) {
        return Err(Error::invalid("sparse_fraction must be in (0, 1)"));
    }
    for r in [spec.dense_rect, spec.sparse_rect] {
        let ok = r.iter().all(|v| (0.0..=1.0).contains(v)) && r[0] < r[2] && r[1] < r[3];
        if !ok {
            return Err(Error::invalid(format!("region {r:?} is not a rectangle inside the unit square")));
        }
    }
    let sparse = ((spec.n as f64 * spec.sparse_fraction).round() as usize).clamp(1, spec.n - 1);
    let dense = spec.n - sparse;
    let mut rng = spec.seed.rng();
    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    jittered(spec.dense_rect, dense, &mut rng, &mut xs, &mut ys);
    jittered(spec.sparse_rect, sparse, &mut rng, &mut xs, &mut ys);
    // the top cell edge can round a hair past 1
    xs.iter_mut().chain(ys.iter_mut()).for_each(|v| *v = v.clamp(0.0, 1.0));
    let labels = (0..spec.n).map(|i| u32::from(i >= dense)).collect();
    LabeledDataset::new(PointSet::new(xs, ys)?, labels)
}
