//! Multi-view Z-order sampling.
//!
//! Every view (the whole dataset and each class on its own) is ordered
//! along the Morton curve and cut into contiguous, equal-count segments.
//! A greedy set cover then picks points until every segment of every view
//! holds a selected point. The result size depends on how well the views'
//! segments overlap, so the number of segments is searched until the size
//! lands within the rate tolerance of the target.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::dataset::{class_ratios, largest_remainder, LabeledDataset, SampleIndexSet};
use crate::error::{Error, Result};

use super::SamplingParams;

const QUANT_BITS: u32 = 16;
const QUANT_MAX: f64 = ((1u32 << QUANT_BITS) - 1) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MortonKey(pub u32);

/// Spreads the low 16 bits of `v` onto even bit positions.
#[inline]
fn spread(v: u32) -> u32 {
    let mut v = v & 0x0000_FFFF;
    v = (v | (v << 8)) & 0x00FF_00FF;
    v = (v | (v << 4)) & 0x0F0F_0F0F;
    v = (v | (v << 2)) & 0x3333_3333;
    v = (v | (v << 1)) & 0x5555_5555;
    v
}

/// Interleaves already-quantized coordinates: x on even bits, y on odd.
pub fn morton_key_bits(xbits: u16, ybits: u16) -> MortonKey {
    MortonKey(spread(xbits as u32) | (spread(ybits as u32) << 1))
}

pub fn morton_key(x: f64, y: f64) -> Result<MortonKey> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!("({x}, {y}) outside the unit square")));
    }
    let q = |v: f64| (v * QUANT_MAX).floor() as u16;
    Ok(morton_key_bits(q(x), q(y)))
}

/// Greedy set cover. `covers[e]` lists the sets element `e` belongs to;
/// repeatedly picks the element covering the most still-uncovered sets,
/// lowest index on ties, until every set that has any element is covered.
pub fn greedy_set_cover(num_sets: usize, covers: &[Vec<u32>]) -> Vec<usize> {
    let mut covered = vec![false; num_sets];
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = covers
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(e, s)| (s.len(), Reverse(e)))
        .collect();
    let mut picked = Vec::new();
    while let Some((gain, Reverse(e))) = heap.pop() {
        let fresh = covers[e].iter().filter(|&&s| !covered[s as usize]).count();
        if fresh == 0 {
            continue;
        }
        if fresh < gain {
            // stale priority; gains only ever shrink
            heap.push((fresh, Reverse(e)));
            continue;
        }
        for &s in &covers[e] {
            covered[s as usize] = true;
        }
        picked.push(e);
    }
    picked
}

/// One set-cover solve for a fixed number of whole-view segments.
#[derive(Debug, Clone)]
pub struct ZOrderCover {
    pub selected: SampleIndexSet,
    /// Point indices of each segment, whole-view segments first, then the
    /// segments of class 0, class 1, ...
    pub segments: Vec<Vec<usize>>,
    pub whole_segments: usize,
    pub class_segments: Vec<usize>,
}

struct ZOrderViews {
    whole: Vec<usize>,
    classes: Vec<Vec<usize>>,
    ratios: Vec<f64>,
}

impl ZOrderViews {
    fn new(ds: &LabeledDataset) -> Result<Self> {
        let keys: Vec<MortonKey> = ds
            .points()
            .iter()
            .map(|p| morton_key(p[0], p[1]))
            .collect::<Result<_>>()?;
        let mut whole: Vec<usize> = (0..ds.len()).collect();
        whole.sort_by_key(|&i| (keys[i], i));
        let mut classes = vec![Vec::new(); ds.num_classes()];
        for &i in &whole {
            classes[ds.label(i)].push(i);
        }
        Ok(ZOrderViews {
            whole,
            classes,
            ratios: class_ratios(ds)?,
        })
    }

    fn cover(&self, segments: usize) -> ZOrderCover {
        let n = self.whole.len();
        let mut covers: Vec<Vec<u32>> = vec![Vec::with_capacity(2); n];
        let mut seg_members: Vec<Vec<usize>> = Vec::new();
        let mut cut = |order: &[usize], count: usize, covers: &mut Vec<Vec<u32>>| {
            let len = order.len();
            for j in 0..count {
                let id = seg_members.len() as u32;
                let part = &order[j * len / count..(j + 1) * len / count];
                for &i in part {
                    covers[i].push(id);
                }
                seg_members.push(part.to_vec());
            }
        };
        cut(&self.whole, segments, &mut covers);
        let class_segments: Vec<usize> = largest_remainder(segments, &self.ratios)
            .into_iter()
            .zip(&self.classes)
            .map(|(q, members)| q.min(members.len()))
            .collect();
        for (members, &q) in self.classes.iter().zip(&class_segments) {
            cut(members, q, &mut covers);
        }
        let picked = greedy_set_cover(seg_members.len(), &covers);
        ZOrderCover {
            selected: SampleIndexSet::from_unsorted(picked),
            segments: seg_members,
            whole_segments: segments,
            class_segments,
        }
    }
}

/// The cover obtained with `segments` whole-view segments.
pub fn zorder_cover(ds: &LabeledDataset, segments: usize) -> Result<ZOrderCover> {
    if segments == 0 || segments > ds.len() {
        return Err(Error::invalid(format!(
            "segment count {segments} must be in 1..={}",
            ds.len()
        )));
    }
    Ok(ZOrderViews::new(ds)?.cover(segments))
}

pub fn sample_multiview_zorder(ds: &LabeledDataset, p: &SamplingParams) -> Result<SampleIndexSet> {
    p.check_target(ds.len())?;
    let target = p.target_n;
    if target == 0 {
        return Ok(SampleIndexSet::default());
    }
    let views = ZOrderViews::new(ds)?;
    let dev = p.allowed_deviation();
    let within = |size: usize| size.abs_diff(target) <= dev;

    // the cover never has fewer points than whole-view segments, so the
    // largest feasible segment count is at most the target
    let (mut lo, mut hi) = (1usize, target);
    let mut best: Option<ZOrderCover> = None;
    let consider = |c: ZOrderCover, best: &mut Option<ZOrderCover>| {
        let better = match best {
            None => true,
            Some(b) => c.selected.len().abs_diff(target) < b.selected.len().abs_diff(target),
        };
        if better {
            *best = Some(c);
        }
    };
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        let c = views.cover(mid);
        let size = c.selected.len();
        consider(c, &mut best);
        if size <= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    consider(views.cover(lo), &mut best);
    if !within(best.as_ref().unwrap().selected.len()) {
        // the size is not strictly monotone in the segment count; probe nearby
        for s in lo.saturating_sub(32).max(1)..=(lo + 32).min(target) {
            let c = views.cover(s);
            let hit = within(c.selected.len());
            consider(c, &mut best);
            if hit {
                break;
            }
        }
    }
    let best = best.unwrap();
    if within(best.selected.len()) {
        Ok(best.selected)
    } else {
        Err(Error::RateTolerance {
            target,
            best: best.selected.len(),
            tolerance: p.rate_tolerance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;
    use crate::rng::Seed;
    use rand::Rng;

    #[test]
    fn morton_examples() {
        assert_eq!(morton_key(0.0, 0.0).unwrap(), MortonKey(0));
        assert_eq!(morton_key_bits(0b11, 0b10), MortonKey(13));
        assert_eq!(morton_key(1.0, 1.0).unwrap(), MortonKey(u32::MAX));
        assert!(morton_key(1.5, 0.0).is_err());
        let mut prev = MortonKey(0);
        for i in 0..=1000 {
            let k = morton_key(i as f64 / 1000.0, 0.0).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn morton_interleave_against_bit_loop() {
        for (x, y) in [(0u16, 0u16), (1, 0), (0, 1), (0xFFFF, 0), (0x1234, 0xABCD), (0xFFFF, 0xFFFF)] {
            let mut expect = 0u32;
            for b in 0..16 {
                expect |= (((x >> b) & 1) as u32) << (2 * b);
                expect |= (((y >> b) & 1) as u32) << (2 * b + 1);
            }
            assert_eq!(morton_key_bits(x, y).0, expect);
        }
    }

    #[test]
    fn greedy_prefers_wide_then_low_index() {
        // sets 0..3; element 2 covers three of them
        let covers = vec![vec![0], vec![3], vec![0, 1, 2], vec![1, 2, 3]];
        assert_eq!(greedy_set_cover(4, &covers), vec![2, 1]);
    }

    fn mixture(n: usize, seed: u64) -> LabeledDataset {
        let mut rng = Seed(seed).rng();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = (i % 3) as u32;
            let cx = 0.25 + 0.25 * c as f64;
            xs.push((cx + 0.2 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0));
            ys.push(rng.random::<f64>());
            labels.push(c);
        }
        LabeledDataset::new(PointSet::new(xs, ys).unwrap(), labels).unwrap()
    }

    #[test]
    fn every_segment_covered() {
        let ds = mixture(3000, 4);
        let cover = zorder_cover(&ds, 300).unwrap();
        assert_eq!(cover.segments.len(), 600);
        for seg in &cover.segments {
            assert!(seg.iter().any(|&i| cover.selected.contains(i)));
        }
    }

    #[test]
    fn exhaustive_request() {
        let ds = mixture(200, 1);
        let s = sample_multiview_zorder(&ds, &SamplingParams::new(200, 0)).unwrap();
        assert_eq!(s, SampleIndexSet::all(200));
    }

    #[test]
    fn size_within_tolerance() {
        let ds = mixture(5000, 2);
        let s = sample_multiview_zorder(&ds, &SamplingParams::new(500, 0)).unwrap();
        assert!(s.len().abs_diff(500) <= 5, "{}", s.len());
    }
}
