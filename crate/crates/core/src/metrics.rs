//! Objective quality measures for a sample against its full dataset.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, PointSet, Rect, SampleIndexSet};
use crate::error::{Error, Result};
use crate::outliers::OutlierGroundTruth;
use crate::par::Parallelism;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    /// `None` when nothing was marked.
    pub precision: Option<f64>,
    pub recall: f64,
    pub m_size: usize,
    pub n_size: usize,
    pub overlap: usize,
    /// True when the truth set is empty and recall was set to 0 by
    /// convention.
    pub empty_truth: bool,
}

fn check_range(set: &SampleIndexSet, universe: usize) -> Result<()> {
    match set.as_slice().last() {
        Some(&last) if last >= universe => Err(Error::IndexOutOfRange {
            index: last,
            len: universe,
        }),
        _ => Ok(()),
    }
}

/// Precision `|N ∩ M| / |M|` and recall `|N ∩ M| / |N|` of the marked set
/// `M` against the true outliers `N`, both over a dataset of `universe`
/// points.
pub fn precision_recall(marked: &SampleIndexSet, truth: &OutlierGroundTruth, universe: usize) -> Result<PrecisionRecall> {
    check_range(marked, universe)?;
    check_range(&truth.indices, universe)?;
    let overlap = marked.intersection_len(&truth.indices);
    let (m, n) = (marked.len(), truth.len());
    Ok(PrecisionRecall {
        precision: (m > 0).then(|| overlap as f64 / m as f64),
        recall: if n > 0 { overlap as f64 / n as f64 } else { 0.0 },
        m_size: m,
        n_size: n,
        overlap,
        empty_truth: n == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRecall {
    pub values: Vec<f64>,
    /// Every input was zero; values are all zero.
    pub degenerate: bool,
}

/// Divides each recall by the largest one.
pub fn normalized_recall(recalls: &[f64]) -> Result<NormalizedRecall> {
    if recalls.is_empty() {
        return Err(Error::Empty("recall list"));
    }
    if let Some(r) = recalls.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::invalid(format!("recall {r} is negative or not finite")));
    }
    let max = recalls.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(NormalizedRecall {
            values: vec![0.0; recalls.len()],
            degenerate: true,
        });
    }
    Ok(NormalizedRecall {
        values: recalls.iter().map(|r| r / max).collect(),
        degenerate: false,
    })
}

/// `|truth ∩ sample| / |truth|`.
pub fn outlier_preservation_ratio(sample: &SampleIndexSet, truth: &OutlierGroundTruth) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Empty("outlier ground truth"));
    }
    Ok(sample.intersection_len(&truth.indices) as f64 / truth.len() as f64)
}

/// Answer to a two-way density comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityOrder {
    First,
    Second,
    Tie,
}

impl From<Ordering> for DensityOrder {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Greater => DensityOrder::First,
            Ordering::Less => DensityOrder::Second,
            Ordering::Equal => DensityOrder::Tie,
        }
    }
}

fn count_in(ps: &PointSet, subset: Option<&[usize]>, r: &Rect) -> usize {
    match subset {
        Some(idx) => idx.iter().filter(|&&i| r.contains(ps.point(i))).count(),
        None => ps.iter().filter(|&p| r.contains(p)).count(),
    }
}

fn class_counts_in(ds: &LabeledDataset, subset: Option<&[usize]>, r: &Rect, c1: usize, c2: usize) -> (usize, usize) {
    let mut counts = (0, 0);
    let mut tally = |i: usize| {
        if r.contains(ds.points().point(i)) {
            let l = ds.label(i);
            if l == c1 {
                counts.0 += 1;
            } else if l == c2 {
                counts.1 += 1;
            }
        }
    };
    match subset {
        Some(idx) => idx.iter().for_each(|&i| tally(i)),
        None => (0..ds.len()).for_each(&mut tally),
    }
    counts
}

fn compare_density(count_a: usize, area_a: f64, count_b: usize, area_b: f64) -> DensityOrder {
    (count_a as f64 * area_b).total_cmp(&(count_b as f64 * area_a)).into()
}

/// Which rectangle holds more points per unit area.
pub fn region_density_order(ps: &PointSet, a: &Rect, b: &Rect) -> Result<DensityOrder> {
    region_density_order_in(ps, None, a, b)
}

/// As [`region_density_order`], counting only the points in `subset`.
pub fn region_density_order_in(ps: &PointSet, subset: Option<&[usize]>, a: &Rect, b: &Rect) -> Result<DensityOrder> {
    a.validate()?;
    b.validate()?;
    Ok(compare_density(count_in(ps, subset, a), a.area(), count_in(ps, subset, b), b.area()))
}

/// Which of two classes has more points inside `r`.
pub fn class_density_order(ds: &LabeledDataset, r: &Rect, c1: usize, c2: usize) -> Result<DensityOrder> {
    class_density_order_in(ds, None, r, c1, c2)
}

pub fn class_density_order_in(ds: &LabeledDataset, subset: Option<&[usize]>, r: &Rect, c1: usize, c2: usize) -> Result<DensityOrder> {
    r.validate()?;
    if c1 == c2 {
        return Err(Error::invalid("class comparison needs two distinct classes"));
    }
    let k = ds.num_classes();
    if c1 >= k || c2 >= k {
        return Err(Error::invalid(format!("class id out of range (K = {k})")));
    }
    let (a, b) = class_counts_in(ds, subset, r, c1, c2);
    Ok(a.cmp(&b).into())
}

/// A density comparison question. The truth is always computed on the
/// full dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityQuestion {
    RegionPair { a: Rect, b: Rect, truth: DensityOrder },
    ClassPair { rect: Rect, class_a: usize, class_b: usize, truth: DensityOrder },
}

impl DensityQuestion {
    pub fn truth(&self) -> DensityOrder {
        match self {
            DensityQuestion::RegionPair { truth, .. } | DensityQuestion::ClassPair { truth, .. } => *truth,
        }
    }

    /// The answer given by the points in `subset` (or all points).
    pub fn answer(&self, ds: &LabeledDataset, subset: Option<&[usize]>) -> Result<DensityOrder> {
        match self {
            DensityQuestion::RegionPair { a, b, .. } => region_density_order_in(ds.points(), subset, a, b),
            DensityQuestion::ClassPair { rect, class_a, class_b, .. } => {
                class_density_order_in(ds, subset, rect, *class_a, *class_b)
            }
        }
    }
}

/// Fraction of questions the sample answers like the full dataset. A tied
/// answer never counts as correct.
pub fn question_accuracy(ds: &LabeledDataset, sample: &SampleIndexSet, questions: &[DensityQuestion]) -> Result<f64> {
    if questions.is_empty() {
        return Err(Error::Empty("question list"));
    }
    let mut correct = 0;
    for q in questions {
        let got = q.answer(ds, Some(sample.as_slice()))?;
        if got != DensityOrder::Tie && got == q.truth() {
            correct += 1;
        }
    }
    Ok(correct as f64 / questions.len() as f64)
}

pub const DEFAULT_KDE_BANDWIDTH: f64 = 0.02;
pub const DEFAULT_KDE_GRID: usize = 64;

/// Gaussian KDE of `ps` at the centers of a `grid × grid` lattice over the
/// unit square, normalized to unit mass. Returned row-major (y, then x).
pub fn kde_field(ps: &PointSet, bandwidth: f64, grid: usize, exec: Parallelism) -> Result<Vec<f64>> {
    if ps.is_empty() {
        return Err(Error::Empty("point set"));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::invalid(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if grid == 0 {
        return Err(Error::invalid("grid must be at least 1"));
    }
    let inv = -0.5 / (bandwidth * bandwidth);
    let centers: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect();
    // separable kernel: K(p, c) = gx(p.x, c.x) * gy(p.y, c.y)
    let n = ps.len();
    let gx: Vec<f64> = (0..grid)
        .flat_map(|a| ps.xs().iter().map(move |&x| (x, a)))
        .map(|(x, a)| {
            let d = x - centers[a];
            (d * d * inv).exp()
        })
        .collect();
    let gy: Vec<f64> = (0..grid)
        .flat_map(|b| ps.ys().iter().map(move |&y| (y, b)))
        .map(|(y, b)| {
            let d = y - centers[b];
            (d * d * inv).exp()
        })
        .collect();
    let rows: Vec<Vec<f64>> = exec.map_range(grid, |b| {
        let wy = &gy[b * n..(b + 1) * n];
        (0..grid)
            .map(|a| {
                let wx = &gx[a * n..(a + 1) * n];
                wx.iter().zip(wy).map(|(u, v)| u * v).sum::<f64>()
            })
            .collect()
    });
    let mut field: Vec<f64> = rows.into_iter().flatten().collect();
    let total: f64 = field.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("density field underflowed to zero".into()));
    }
    field.iter_mut().for_each(|v| *v /= total);
    Ok(field)
}

/// L1 distance between the normalized KDE fields of `full` and `sample`
/// (in `[0, 2]`).
pub fn kde_error(full: &PointSet, sample: &PointSet, bandwidth: f64, grid: usize) -> Result<f64> {
    kde_error_with(full, sample, bandwidth, grid, Parallelism::default())
}

pub fn kde_error_with(full: &PointSet, sample: &PointSet, bandwidth: f64, grid: usize, exec: Parallelism) -> Result<f64> {
    let f = kde_field(full, bandwidth, grid, exec)?;
    let g = kde_field(sample, bandwidth, grid, exec)?;
    Ok(kde_field_distance(&f, &g))
}

/// L1 distance of two fields from [`kde_field`].
pub fn kde_field_distance(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum()
}

/// Points for a tied ranking of `n` items: rank `r` earns `n + 1 - r`,
/// tied items share the mean of the positions they span.
///
/// Ranks use competition style: an item's rank is one more than the number
/// of items strictly ahead of it, e.g. `[1, 1, 3, 4, 5, 6, 7]`.
pub fn ranking_scores(ranks: &[usize]) -> Result<Vec<f64>> {
    let n = ranks.len();
    if n == 0 {
        return Err(Error::Empty("ranking"));
    }
    for &r in ranks {
        let ahead = ranks.iter().filter(|&&o| o < r).count();
        if r == 0 || r > n || ahead != r - 1 {
            return Err(Error::invalid(format!("malformed tied ranking {ranks:?}")));
        }
    }
    Ok(ranks
        .iter()
        .map(|&r| {
            let tied = ranks.iter().filter(|&&o| o == r).count();
            // positions r..r+tied-1 earn n+1-pos points
            let first = (n + 1 - r) as f64;
            let last = (n + 2 - r - tied) as f64;
            0.5 * (first + last)
        })
        .collect())
}
