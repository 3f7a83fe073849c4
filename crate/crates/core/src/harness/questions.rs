use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, Rect};
use crate::error::{Error, Result};
use crate::metrics::{class_density_order, region_density_order, DensityQuestion};
use crate::rng::Seed;

/// Side of every question rectangle, in normalized units.
pub const QUESTION_SIDE: f64 = 0.2;
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    /// Which of two rectangles is denser, ignoring labels.
    Region,
    /// Which of two classes has more points in one rectangle.
    Class,
}

fn random_rect(rng: &mut impl Rng) -> Rect {
    let span = 1.0 - QUESTION_SIDE;
    Rect::new(rng.random::<f64>() * span, rng.random::<f64>() * span, QUESTION_SIDE, QUESTION_SIDE)
        .expect("inside the unit square")
}

fn count_in(ds: &LabeledDataset, r: &Rect, class: Option<usize>) -> usize {
    (0..ds.len())
        .filter(|&i| class.is_none_or(|c| ds.label(i) == c) && r.contains(ds.points().point(i)))
        .count()
}

/// Accepts a pair of counts (equal areas) when they differ by at least
/// `margin` of the larger one; a positive margin also rejects ties.
fn separated(a: usize, b: usize, margin: f64) -> bool {
    let diff = a.abs_diff(b) as f64;
    diff >= margin * a.max(b) as f64 && (margin <= 0.0 || diff > 0.0)
}

/// Random density questions whose truths, taken from the full dataset,
/// are separated by the relative `margin`.
pub fn gen_region_questions(
    ds: &LabeledDataset,
    count: usize,
    seed: Seed,
    kind: QuestionKind,
    margin: f64,
) -> Result<Vec<DensityQuestion>> {
    if count == 0 {
        return Err(Error::invalid("question count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&margin) {
        return Err(Error::invalid(format!("margin {margin} outside [0, 1]")));
    }
    if ds.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if kind == QuestionKind::Class && ds.num_classes() < 2 {
        return Err(Error::invalid("class questions need at least two classes"));
    }
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let q = match kind {
                QuestionKind::Region => {
                    let (a, b) = (random_rect(&mut rng), random_rect(&mut rng));
                    if !separated(count_in(ds, &a, None), count_in(ds, &b, None), margin) {
                        continue;
                    }
                    let truth = region_density_order(ds.points(), &a, &b)?;
                    DensityQuestion::RegionPair { a, b, truth }
                }
                QuestionKind::Class => {
                    let rect = random_rect(&mut rng);
                    let pair = index::sample(&mut rng, ds.num_classes(), 2);
                    let (ca, cb) = (pair.index(0), pair.index(1));
                    if !separated(count_in(ds, &rect, Some(ca)), count_in(ds, &rect, Some(cb)), margin) {
                        continue;
                    }
                    let truth = class_density_order(ds, &rect, ca, cb)?;
                    DensityQuestion::ClassPair { rect, class_a: ca, class_b: cb, truth }
                }
            };
            placed = Some(q);
            break;
        }
        match placed {
            Some(q) => out.push(q),
            None => {
                return Err(Error::QuestionPlacement(format!(
                    "no placement met margin {margin} within {MAX_PLACEMENT_ATTEMPTS} attempts"
                )))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;
    use crate::harness::{gen_gaussian_mixture, MixtureSpec};
    use crate::metrics::DensityOrder;

    fn blobs() -> LabeledDataset {
        gen_gaussian_mixture(&MixtureSpec { classes: 3, n: 3000, seed: Seed(5) }).unwrap()
    }

    #[test]
    fn rect_sides_and_truths() {
        let ds = blobs();
        let qs = gen_region_questions(&ds, 50, Seed(1), QuestionKind::Region, 0.2).unwrap();
        assert_eq!(qs.len(), 50);
        for q in &qs {
            let DensityQuestion::RegionPair { a, b, truth } = q else { panic!() };
            for r in [a, b] {
                assert_eq!((r.w, r.h), (QUESTION_SIDE, QUESTION_SIDE));
            }
            // brute-force counts over every point
            let ca = ds.points().iter().filter(|p| p[0] >= a.x0 && p[0] < a.x0 + a.w && p[1] >= a.y0 && p[1] < a.y0 + a.h).count();
            let cb = ds.points().iter().filter(|p| p[0] >= b.x0 && p[0] < b.x0 + b.w && p[1] >= b.y0 && p[1] < b.y0 + b.h).count();
            assert_eq!(*truth, DensityOrder::from(ca.cmp(&cb)));
            assert!(ca.abs_diff(cb) as f64 >= 0.2 * ca.max(cb) as f64 && ca != cb);
        }
    }

    #[test]
    fn class_truths() {
        let ds = blobs();
        let qs = gen_region_questions(&ds, 30, Seed(2), QuestionKind::Class, 0.2).unwrap();
        for q in &qs {
            let DensityQuestion::ClassPair { rect, class_a, class_b, truth } = q else { panic!() };
            assert_ne!(class_a, class_b);
            let count = |c: usize| (0..ds.len()).filter(|&i| ds.label(i) == c && rect.contains(ds.points().point(i))).count();
            assert_eq!(*truth, DensityOrder::from(count(*class_a).cmp(&count(*class_b))));
        }
    }

    #[test]
    fn zero_margin_takes_first_placement() {
        let ds = blobs();
        let qs = gen_region_questions(&ds, 1, Seed(3), QuestionKind::Region, 0.0).unwrap();
        let mut rng = Seed(3).rng();
        let (a, b) = (random_rect(&mut rng), random_rect(&mut rng));
        assert!(matches!(&qs[0], DensityQuestion::RegionPair { a: qa, b: qb, .. } if *qa == a && *qb == b));
    }

    #[test]
    fn impossible_margin() {
        // an even grid leaves no rectangle empty, so margin 1 is unreachable
        let n = 40;
        let xs: Vec<f64> = (0..n * n).map(|i| (i % n) as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = (0..n * n).map(|i| (i / n) as f64 / (n - 1) as f64).collect();
        let ds = LabeledDataset::unlabeled(PointSet::new(xs, ys).unwrap());
        let err = gen_region_questions(&ds, 1, Seed(0), QuestionKind::Region, 1.0);
        assert!(matches!(err, Err(Error::QuestionPlacement(_))));
        assert!(gen_region_questions(&ds, 1, Seed(0), QuestionKind::Class, 0.2).is_err());
        assert!(gen_region_questions(&ds, 0, Seed(0), QuestionKind::Region, 0.2).is_err());
    }
}
