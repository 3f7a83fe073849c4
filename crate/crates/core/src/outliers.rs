//! Ground-truth outlier scoring.
//!
//! Two detectors, matching the two kinds of outlier a reader looks for in
//! a multi-class scatterplot:
//!
//! * label-free: the local outlier factor (LOF) of each point, min-max
//!   normalized over the dataset;
//! * label-aware: class purity, the fraction of a point's k nearest
//!   neighbors that carry a different label.
//!
//! Neighbors are exact and ordered by (distance, index), so both scores are
//! permutation-equivariant up to exact distance ties.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, PointSet, SampleIndexSet};
use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::spatial::{KnnGrid, Neighbor};

/// Distances below this are treated as this, so duplicate points do not
/// produce infinite densities.
pub const DISTANCE_FLOOR: f64 = 1e-12;

/// Per-point scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutlierScoreVector(Vec<f64>);

impl OutlierScoreVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "neighbor count k = {k} must satisfy 1 <= k <= N - 1 (N = {n})"
        )));
    }
    Ok(())
}

fn all_knn(ps: &PointSet, k: usize, exec: Parallelism) -> Vec<Vec<Neighbor>> {
    let grid = KnnGrid::new(ps);
    exec.map_range(ps.len(), |i| grid.knn(ps.point(i), k, Some(i)))
}

/// Raw LOF values (about 1 for points in homogeneous density).
pub fn lof_raw(ps: &PointSet, k: usize) -> Result<Vec<f64>> {
    lof_raw_with(ps, k, Parallelism::default())
}

pub fn lof_raw_with(ps: &PointSet, k: usize, exec: Parallelism) -> Result<Vec<f64>> {
    check_k(k, ps.len())?;
    let nbrs = all_knn(ps, k, exec);
    let k_dist: Vec<f64> = nbrs.iter().map(|n| n.last().unwrap().dist).collect();
    let lrd: Vec<f64> = exec.map_slice(&nbrs, |nb| {
        let mean_reach = nb
            .iter()
            .map(|o| k_dist[o.index].max(o.dist))
            .sum::<f64>()
            / nb.len() as f64;
        1.0 / mean_reach.max(DISTANCE_FLOOR)
    });
    Ok(exec.map_range(ps.len(), |i| {
        let nb = &nbrs[i];
        nb.iter().map(|o| lrd[o.index]).sum::<f64>() / (nb.len() as f64 * lrd[i])
    }))
}

fn min_max(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(hi > lo) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|&x| (x - lo) / (hi - lo)).collect()
}

/// LOF min-max normalized to `[0, 1]`.
pub fn lof_scores(ps: &PointSet, k: usize) -> Result<OutlierScoreVector> {
    lof_scores_with(ps, k, Parallelism::default())
}

pub fn lof_scores_with(ps: &PointSet, k: usize, exec: Parallelism) -> Result<OutlierScoreVector> {
    Ok(OutlierScoreVector(min_max(&lof_raw_with(ps, k, exec)?)))
}

/// Fraction of each point's `k` nearest neighbors with a different label.
pub fn class_purity_scores(ds: &LabeledDataset, k: usize) -> Result<OutlierScoreVector> {
    class_purity_scores_with(ds, k, Parallelism::default())
}

pub fn class_purity_scores_with(ds: &LabeledDataset, k: usize, exec: Parallelism) -> Result<OutlierScoreVector> {
    check_k(k, ds.len())?;
    let nbrs = all_knn(ds.points(), k, exec);
    Ok(OutlierScoreVector(
        nbrs.iter()
            .enumerate()
            .map(|(i, nb)| {
                let other = nb.iter().filter(|o| ds.label(o.index) != ds.label(i)).count();
                other as f64 / k as f64
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthParams {
    pub k_lof: usize,
    pub k_purity: usize,
    pub lof_thresh: f64,
    pub purity_thresh: f64,
}

impl Default for GroundTruthParams {
    fn default() -> Self {
        GroundTruthParams {
            k_lof: 20,
            k_purity: 10,
            lof_thresh: 0.5,
            purity_thresh: 0.8,
        }
    }
}

impl GroundTruthParams {
    /// Same thresholds with neighbor counts capped for a dataset of `n`
    /// points.
    pub fn capped_for(&self, n: usize) -> Self {
        let cap = n.saturating_sub(1).max(1);
        GroundTruthParams {
            k_lof: self.k_lof.min(cap),
            k_purity: self.k_purity.min(cap),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierSource {
    Purity,
    Lof,
    Both,
}

/// The set of true outliers and which detector flagged each one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierGroundTruth {
    pub indices: SampleIndexSet,
    /// Parallel to `indices`.
    pub sources: Vec<OutlierSource>,
}

impl OutlierGroundTruth {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Union of `{lof_norm >= lof_thresh}` and `{purity >= purity_thresh}`.
pub fn ground_truth_outliers(ds: &LabeledDataset, gp: &GroundTruthParams) -> Result<OutlierGroundTruth> {
    ground_truth_outliers_with(ds, gp, Parallelism::default())
}

pub fn ground_truth_outliers_with(ds: &LabeledDataset, gp: &GroundTruthParams, exec: Parallelism) -> Result<OutlierGroundTruth> {
    for (name, t) in [("lof_thresh", gp.lof_thresh), ("purity_thresh", gp.purity_thresh)] {
        if !(t >= 0.0) || t.is_nan() {
            return Err(Error::invalid(format!("{name} must be nonnegative, got {t}")));
        }
    }
    let lof = lof_scores_with(ds.points(), gp.k_lof, exec)?;
    let pur = class_purity_scores_with(ds, gp.k_purity, exec)?;
    let mut indices = Vec::new();
    let mut sources = Vec::new();
    for i in 0..ds.len() {
        let by_lof = lof.0[i] >= gp.lof_thresh;
        let by_pur = pur.0[i] >= gp.purity_thresh;
        let src = match (by_lof, by_pur) {
            (true, true) => OutlierSource::Both,
            (true, false) => OutlierSource::Lof,
            (false, true) => OutlierSource::Purity,
            (false, false) => continue,
        };
        indices.push(i);
        sources.push(src);
    }
    Ok(OutlierGroundTruth {
        indices: SampleIndexSet::from_unsorted(indices),
        sources,
    })
}

/// Outliers found by running the ground-truth detectors on the sampled
/// points alone, reported as indices into the full dataset. Neighbor counts
/// are capped for small samples.
pub fn outliers_in_sample(ds: &LabeledDataset, sample: &SampleIndexSet, gp: &GroundTruthParams) -> Result<SampleIndexSet> {
    outliers_in_sample_with(ds, sample, gp, Parallelism::default())
}

pub fn outliers_in_sample_with(
    ds: &LabeledDataset,
    sample: &SampleIndexSet,
    gp: &GroundTruthParams,
    exec: Parallelism,
) -> Result<SampleIndexSet> {
    if let Some(&last) = sample.as_slice().last() {
        if last >= ds.len() {
            return Err(Error::IndexOutOfRange { index: last, len: ds.len() });
        }
    }
    if sample.len() < 2 {
        return Ok(SampleIndexSet::default());
    }
    let mut remap = HashMap::new();
    let labels: Vec<u32> = sample
        .iter()
        .map(|i| {
            let next = remap.len() as u32;
            *remap.entry(ds.label(i)).or_insert(next)
        })
        .collect();
    let sub = LabeledDataset::new(ds.points().select(sample.as_slice()), labels)?;
    let found = ground_truth_outliers_with(&sub, &gp.capped_for(sub.len()), exec)?;
    let idx = sample.as_slice();
    Ok(SampleIndexSet::from_unsorted(found.indices.iter().map(|j| idx[j]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng;

    /// LOF straight from its definition with O(n^2) neighbor search.
    fn lof_oracle(ps: &PointSet, k: usize) -> Vec<f64> {
        let n = ps.len();
        let knn: Vec<Vec<(f64, usize)>> = (0..n)
            .map(|i| {
                let mut d: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (ps.dist2(i, j).sqrt(), j)).collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                d.truncate(k);
                d
            })
            .collect();
        let kd: Vec<f64> = knn.iter().map(|v| v[k - 1].0).collect();
        let lrd: Vec<f64> = knn
            .iter()
            .map(|v| {
                let s: f64 = v.iter().map(|&(d, j)| d.max(kd[j])).sum();
                1.0 / (s / k as f64).max(DISTANCE_FLOOR)
            })
            .collect();
        (0..n)
            .map(|i| knn[i].iter().map(|&(_, j)| lrd[j] / lrd[i]).sum::<f64>() / k as f64)
            .collect()
    }

    fn grid_points(side: usize) -> PointSet {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..side {
            for j in 0..side {
                xs.push(i as f64 / (side - 1) as f64);
                ys.push(j as f64 / (side - 1) as f64);
            }
        }
        PointSet::new(xs, ys).unwrap()
    }

    #[test]
    fn lof_matches_oracle() {
        let mut rng = Seed(12).rng();
        let xs: Vec<f64> = (0..300).map(|_| rng.random::<f64>().powi(2)).collect();
        let ys: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let ps = PointSet::new(xs, ys).unwrap();
        for k in [1, 5, 20] {
            let got = lof_raw(&ps, k).unwrap();
            let want = lof_oracle(&ps, k);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "k={k}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn grid_interior_is_homogeneous() {
        let ps = grid_points(30);
        // k = 4 gives every interior point the same four axis neighbors
        let raw = lof_raw(&ps, 4).unwrap();
        let norm = lof_scores(&ps, 4).unwrap();
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(0.0, f64::max);
        let interior = (1.0 - lo) / (hi - lo);
        for i in 3..27 {
            for j in 3..27 {
                let idx = i * 30 + j;
                assert!((raw[idx] - 1.0).abs() < 1e-9, "{}", raw[idx]);
                assert!((norm.as_slice()[idx] - interior).abs() < 1e-9);
            }
        }
        // a corner stands out more than the interior
        assert!(norm.as_slice()[0] > interior);
    }

    #[test]
    fn far_point_has_max_lof() {
        // 100-point cluster of diameter ~0.09, one point 10 diameters away
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                xs.push(0.01 * i as f64);
                ys.push(0.01 * j as f64);
            }
        }
        xs.push(0.9);
        ys.push(0.9);
        let ps = PointSet::new(xs, ys).unwrap();
        let raw = lof_raw(&ps, 5).unwrap();
        let want = lof_oracle(&ps, 5);
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert_eq!(argmax(&want), 100);
        assert_eq!(argmax(&raw), 100);
    }

    #[test]
    fn k_bounds() {
        let ps = grid_points(3);
        assert!(lof_scores(&ps, 9).is_err());
        assert!(lof_scores(&ps, 0).is_err());
        assert!(lof_scores(&ps, 8).is_ok());
    }

    #[test]
    fn duplicates_stay_finite() {
        let ps = PointSet::new(vec![0.5; 30].into_iter().chain([0.0, 1.0]).collect(), vec![0.5; 32]).unwrap();
        let raw = lof_raw(&ps, 5).unwrap();
        assert!(raw.iter().all(|v| v.is_finite()));
    }

    fn labeled(points: &[(f64, f64, u32)]) -> LabeledDataset {
        let ps = PointSet::new(points.iter().map(|p| p.0).collect(), points.iter().map(|p| p.1).collect()).unwrap();
        LabeledDataset::new(ps, points.iter().map(|p| p.2).collect()).unwrap()
    }

    #[test]
    fn purity_cases() {
        let ps = grid_points(5);
        let single = LabeledDataset::unlabeled(ps.clone());
        assert!(class_purity_scores(&single, 10).unwrap().as_slice().iter().all(|&s| s == 0.0));

        // one B point in the middle of 24 A points
        let labels: Vec<u32> = (0..25).map(|i| u32::from(i == 12)).collect();
        let ds = LabeledDataset::new(ps, labels).unwrap();
        assert_eq!(class_purity_scores(&ds, 10).unwrap().as_slice()[12], 1.0);

        // point 0 at the origin; neighbors alternate labels at increasing distance
        let mut pts = vec![(0.0, 0.0, 0u32)];
        for i in 1..=10 {
            pts.push((0.01 * i as f64, 0.0, (i % 2) as u32));
        }
        pts.push((1.0, 1.0, 0));
        let ds = labeled(&pts);
        assert_eq!(class_purity_scores(&ds, 10).unwrap().as_slice()[0], 0.5);
    }

    #[test]
    fn ground_truth_is_union() {
        let mut rng = Seed(2).rng();
        let n = 400;
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u32> = (0..n).map(|i| u32::from(xs[i] + 0.2 * rng.random::<f64>() > 0.3)).collect();
        let ds = LabeledDataset::new(PointSet::new(xs, ys).unwrap(), labels).unwrap();
        let gp = GroundTruthParams::default();
        let gt = ground_truth_outliers(&ds, &gp).unwrap();
        let lof = lof_scores(ds.points(), gp.k_lof).unwrap();
        let pur = class_purity_scores(&ds, gp.k_purity).unwrap();
        let expect: Vec<usize> = (0..n)
            .filter(|&i| lof.as_slice()[i] >= gp.lof_thresh || pur.as_slice()[i] >= gp.purity_thresh)
            .collect();
        assert_eq!(gt.indices.as_slice(), expect.as_slice());
        assert!(!gt.is_empty());

        let vacuous = GroundTruthParams { lof_thresh: 1.0 + 1e-9, purity_thresh: 1.0 + 1e-9, ..gp };
        assert!(ground_truth_outliers(&ds, &vacuous).unwrap().is_empty());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let ps = grid_points(20);
        assert_eq!(
            lof_raw_with(&ps, 7, Parallelism::Sequential).unwrap(),
            lof_raw_with(&ps, 7, Parallelism::Parallel).unwrap()
        );
    }

    #[test]
    fn sample_detection_maps_back() {
        // two tight clusters of different classes, sample keeps a lone
        // class-1 point inside the class-0 cluster
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            xs.push(0.1 + 0.005 * (i % 6) as f64);
            ys.push(0.1 + 0.005 * (i / 6) as f64);
            labels.push(0);
        }
        for i in 0..30 {
            xs.push(0.8 + 0.005 * (i % 6) as f64);
            ys.push(0.8 + 0.005 * (i / 6) as f64);
            labels.push(1);
        }
        xs.push(0.112);
        ys.push(0.112);
        labels.push(1);
        let ds = LabeledDataset::new(PointSet::new(xs, ys).unwrap(), labels).unwrap();
        let sample: Vec<usize> = (0..30).step_by(2).chain((30..60).step_by(2)).chain([60]).collect();
        let sample = SampleIndexSet::new(sample, ds.len()).unwrap();
        let gp = GroundTruthParams { k_lof: 5, k_purity: 5, lof_thresh: 2.0, purity_thresh: 0.8 };
        let found = outliers_in_sample(&ds, &sample, &gp).unwrap();
        assert_eq!(found.as_slice(), &[60]);
        assert!(outliers_in_sample(&ds, &SampleIndexSet::new(vec![3], 61).unwrap(), &gp).unwrap().is_empty());
        let bad = SampleIndexSet::new(vec![3, 70], 100).unwrap();
        assert!(outliers_in_sample(&ds, &bad, &gp).is_err());
    }
}
