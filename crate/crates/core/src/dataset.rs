//! Point sets, labeled datasets and the index sets every strategy returns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2-D points stored column-wise. After [`normalize_points`] every
/// coordinate lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointSet {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PointSet {
    /// Wraps coordinates that are already normalized.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                what: "xs/ys",
                left: xs.len(),
                right: ys.len(),
            });
        }
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::invalid(format!(
                    "point {i} = ({x}, {y}) lies outside the unit square"
                )));
            }
        }
        Ok(PointSet { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    #[inline]
    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.xs[i], self.ys[i]]
    }

    #[inline]
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        let dx = self.xs[i] - self.xs[j];
        let dy = self.ys[i] - self.ys[j];
        dx * dx + dy * dy
    }

    pub fn iter(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.xs.iter().zip(&self.ys).map(|(&x, &y)| [x, y])
    }

    /// The points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        PointSet {
            xs: indices.iter().map(|&i| self.xs[i]).collect(),
            ys: indices.iter().map(|&i| self.ys[i]).collect(),
        }
    }
}

/// Min-max maps each axis onto `[0, 1]`. An axis with zero extent maps to
/// 0.5.
pub fn normalize_points(raw_xs: &[f64], raw_ys: &[f64]) -> Result<PointSet> {
    if raw_xs.len() != raw_ys.len() {
        return Err(Error::LengthMismatch {
            what: "xs/ys",
            left: raw_xs.len(),
            right: raw_ys.len(),
        });
    }
    if raw_xs.is_empty() {
        return Err(Error::Empty("point list"));
    }
    if let Some(i) = raw_xs
        .iter()
        .zip(raw_ys)
        .position(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::NonFinite(i));
    }
    Ok(PointSet {
        xs: normalize_axis(raw_xs),
        ys: normalize_axis(raw_ys),
    })
}

fn normalize_axis(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if hi == lo {
        return vec![0.5; v.len()];
    }
    let span = hi - lo;
    v.iter()
        .map(|&x| ((x - lo) / span).clamp(0.0, 1.0))
        .collect()
}

/// Normalized points with dense class ids `0..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    points: PointSet,
    labels: Vec<u32>,
    num_classes: usize,
    /// Original label names by class id, when loaded from text.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    class_names: Vec<String>,
}

impl LabeledDataset {
    /// `K` is inferred as `max(label) + 1`; every id below it must occur.
    pub fn new(points: PointSet, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch {
                what: "labels/points",
                left: labels.len(),
                right: points.len(),
            });
        }
        let num_classes = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::invalid(format!(
                "class ids must be dense: class {missing} of {num_classes} has no points"
            )));
        }
        Ok(LabeledDataset {
            points,
            labels,
            num_classes,
            class_names: Vec::new(),
        })
    }

    /// Single-class dataset.
    pub fn unlabeled(points: PointSet) -> Self {
        let n = points.len();
        LabeledDataset {
            points,
            labels: vec![0; n],
            num_classes: usize::from(n > 0),
            class_names: Vec::new(),
        }
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_classes {
            return Err(Error::LengthMismatch {
                what: "class names/classes",
                left: names.len(),
                right: self.num_classes,
            });
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Point indices of each class, ascending.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l as usize].push(i);
        }
        members
    }
}

/// `count(c) / N` for every class.
pub fn class_ratios(ds: &LabeledDataset) -> Result<Vec<f64>> {
    if ds.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let n = ds.len() as f64;
    Ok(ds.class_counts().into_iter().map(|c| c as f64 / n).collect())
}

/// Strictly increasing point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleIndexSet(Vec<usize>);

impl SampleIndexSet {
    /// Sorts and checks for duplicates and range.
    pub fn new(mut indices: Vec<usize>, universe: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= universe {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    len: universe,
                });
            }
        }
        Ok(SampleIndexSet(indices))
    }

    /// For indices produced internally that are known unique and in range.
    pub(crate) fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SampleIndexSet(indices)
    }

    pub fn all(n: usize) -> Self {
        SampleIndexSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn intersection_len(&self, other: &SampleIndexSet) -> usize {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        let mut n = 0;
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    n += 1;
                    a.next();
                    b.next();
                }
            }
        }
        n
    }
}

/// Axis-aligned rectangle inside the unit square. Containment is half-open:
/// `[x0, x0 + w) × [y0, y0 + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
}

const RECT_EPS: f64 = 1e-12;

impl Rect {
    pub fn new(x0: f64, y0: f64, w: f64, h: f64) -> Result<Self> {
        let r = Rect { x0, y0, w, h };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let Rect { x0, y0, w, h } = *self;
        let finite = [x0, y0, w, h].iter().all(|v| v.is_finite());
        if !finite || w <= 0.0 || h <= 0.0 {
            return Err(Error::invalid(format!("rect {self:?} has zero or invalid area")));
        }
        if x0 < 0.0 || y0 < 0.0 || w > 1.0 || h > 1.0 || x0 + w > 1.0 + RECT_EPS || y0 + h > 1.0 + RECT_EPS {
            return Err(Error::invalid(format!("rect {self:?} leaves the unit square")));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    #[inline]
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] < self.x0 + self.w && p[1] >= self.y0 && p[1] < self.y0 + self.h
    }
}

/// Splits `total` into integer parts proportional to `weights` by the
/// largest-remainder method. Ties in the remainder go to the lower index.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if sum <= 0.0 {
        let mut out = vec![0; weights.len()];
        out[0] = total;
        return out;
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

/// Largest-remainder quotas where every class with a nonzero weight gets at
/// least one slot, provided `total` is at least the number of such classes.
/// Slots for the bump are taken from the currently largest quota.
pub fn quotas_with_floor(total: usize, weights: &[f64]) -> Vec<usize> {
    let mut q = largest_remainder(total, weights);
    let present = weights.iter().filter(|&&w| w > 0.0).count();
    if total < present {
        return q;
    }
    for c in 0..weights.len() {
        if weights[c] > 0.0 && q[c] == 0 {
            let donor = (0..q.len())
                .filter(|&d| q[d] > 1)
                .max_by(|&a, &b| q[a].cmp(&q[b]).then(b.cmp(&a)))
                .expect("total >= present classes leaves a donor");
            q[donor] -= 1;
            q[c] = 1;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_affine() {
        let ps = normalize_points(&[0.0, 5.0, 10.0], &[2.0, 2.0, 4.0]).unwrap();
        assert_eq!(ps.xs(), &[0.0, 0.5, 1.0]);
        assert_eq!(ps.ys(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn normalize_degenerate_axis() {
        let ps = normalize_points(&[3.0, 3.0], &[0.0, 1.0]).unwrap();
        assert_eq!(ps.xs(), &[0.5, 0.5]);
        assert_eq!(ps.ys(), &[0.0, 1.0]);
    }

    #[test]
    fn normalize_rejects_nan_and_empty() {
        assert!(matches!(
            normalize_points(&[0.0, f64::NAN], &[0.0, 1.0]),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(normalize_points(&[], &[]), Err(Error::Empty(_))));
        assert!(normalize_points(&[0.0], &[0.0, 1.0]).is_err());
    }

    fn ds(labels: &[u32]) -> LabeledDataset {
        let n = labels.len();
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / n.max(1) as f64).collect();
        LabeledDataset::new(PointSet::new(xs.clone(), xs).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn ratios() {
        assert_eq!(class_ratios(&ds(&[0, 0, 1, 1])).unwrap(), vec![0.5, 0.5]);
        assert_eq!(class_ratios(&ds(&[0, 0, 0, 1])).unwrap(), vec![0.75, 0.25]);
        assert!(matches!(class_ratios(&ds(&[])), Err(Error::Empty(_))));
    }

    #[test]
    fn sparse_labels_rejected() {
        let ps = PointSet::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(LabeledDataset::new(ps, vec![0, 2]).is_err());
    }

    #[test]
    fn index_set_validation() {
        assert!(SampleIndexSet::new(vec![3, 1, 3], 5).is_err());
        assert!(SampleIndexSet::new(vec![5], 5).is_err());
        assert_eq!(SampleIndexSet::new(vec![3, 1], 5).unwrap().as_slice(), &[1, 3]);
    }

    #[test]
    fn rect_bounds() {
        assert!(Rect::new(0.8, 0.8, 0.2, 0.2).is_ok());
        assert!(Rect::new(0.9, 0.0, 0.2, 0.2).is_err());
        assert!(Rect::new(0.0, 0.0, 0.0, 0.2).is_err());
        let r = Rect::new(0.0, 0.0, 0.5, 0.5).unwrap();
        assert!(r.contains([0.0, 0.0]));
        assert!(!r.contains([0.5, 0.2]));
    }

    #[test]
    fn largest_remainder_sums() {
        assert_eq!(largest_remainder(100, &[0.5, 0.5]), vec![50, 50]);
        assert_eq!(largest_remainder(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(quotas_with_floor(10, &[0.99, 0.01]), vec![9, 1]);
    }

    proptest! {
        #[test]
        fn normalize_idempotent(raw in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..60)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
            let once = normalize_points(&xs, &ys).unwrap();
            let twice = normalize_points(once.xs(), once.ys()).unwrap();
            for (a, b) in once.iter().zip(twice.iter()) {
                prop_assert!((a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
            }
            prop_assert!(once.iter().all(|p| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])));
        }

        #[test]
        fn ratios_sum_to_one(labels in prop::collection::vec(0u32..6, 1..200)) {
            // remap to dense ids first
            let mut ids: Vec<u32> = labels.clone();
            ids.sort_unstable();
            ids.dedup();
            let dense: Vec<u32> = labels.iter().map(|l| ids.binary_search(l).unwrap() as u32).collect();
            let r = class_ratios(&ds(&dense)).unwrap();
            prop_assert!(r.iter().all(|&v| v >= 0.0));
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn quotas_exact_total(total in 0usize..500, w in prop::collection::vec(0.0f64..10.0, 1..12)) {
            let q = largest_remainder(total, &w);
            prop_assert_eq!(q.iter().sum::<usize>(), total);
            let qf = quotas_with_floor(total, &w);
            prop_assert_eq!(qf.iter().sum::<usize>(), total);
        }
    }
}
