//! Recursive subdivision sampling.
//!
//! The unit square is split into a KD-tree: the most populated leaf is cut
//! at the median of its points along their wider-extent axis until there
//! are as many leaves as requested samples. Each leaf contributes one
//! point. Which class a leaf contributes is decided by a top-down
//! backtracking pass: the root's slots are apportioned to classes in
//! proportion to class counts, and every split hands each child a share of
//! its parent's per-class quota that tracks the child's own class counts,
//! bounded by how many of the child's leaves actually contain each class.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::dataset::{quotas_with_floor, LabeledDataset, SampleIndexSet};
use crate::error::Result;

use super::SamplingParams;

/// A leaf of the subdivision and the point it contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct KdLeaf {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub points: Vec<usize>,
    pub assigned_class: usize,
    pub representative: usize,
}

#[derive(Debug, Clone)]
pub struct SubdivisionResult {
    pub indices: SampleIndexSet,
    pub leaves: Vec<KdLeaf>,
    pub root_quotas: Vec<usize>,
}

struct Node {
    lo: [f64; 2],
    hi: [f64; 2],
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

struct Tree<'a> {
    ds: &'a LabeledDataset,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> Tree<'a> {
    fn build(ds: &'a LabeledDataset, leaves_wanted: usize) -> Self {
        let mut tree = Tree {
            ds,
            perm: (0..ds.len()).collect(),
            nodes: vec![Node {
                lo: [0.0, 0.0],
                hi: [1.0, 1.0],
                start: 0,
                end: ds.len(),
                children: None,
            }],
        };
        let mut heap = BinaryHeap::new();
        heap.push((ds.len(), Reverse(0usize)));
        let mut leaves = 1;
        while leaves < leaves_wanted {
            let Some((count, Reverse(id))) = heap.pop() else { break };
            if count < 2 {
                break;
            }
            let (a, b) = tree.split(id);
            heap.push((tree.nodes[a].end - tree.nodes[a].start, Reverse(a)));
            heap.push((tree.nodes[b].end - tree.nodes[b].start, Reverse(b)));
            leaves += 1;
        }
        tree
    }

    fn split(&mut self, id: usize) -> (usize, usize) {
        let (start, end, lo, hi) = {
            let n = &self.nodes[id];
            (n.start, n.end, n.lo, n.hi)
        };
        let pts = self.ds.points();
        let slice = &mut self.perm[start..end];
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for &i in slice.iter() {
            let p = pts.point(i);
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        let axis = usize::from(max[1] - min[1] > max[0] - min[0]);
        let half = slice.len() / 2;
        slice.select_nth_unstable_by(half, |&a, &b| {
            pts.point(a)[axis].total_cmp(&pts.point(b)[axis]).then(a.cmp(&b))
        });
        let cut = pts.point(slice[half])[axis];
        let mut left_hi = hi;
        left_hi[axis] = cut;
        let mut right_lo = lo;
        right_lo[axis] = cut;
        let a = self.nodes.len();
        self.nodes.push(Node { lo, hi: left_hi, start, end: start + half, children: None });
        self.nodes.push(Node { lo: right_lo, hi, start: start + half, end, children: None });
        self.nodes[id].children = Some((a, a + 1));
        (a, a + 1)
    }
}

/// Per-node summaries for the quota pass.
struct Summary {
    leaves: usize,
    counts: Vec<usize>,
    /// Leaves in the subtree that contain each class.
    capacity: Vec<usize>,
}

fn summarize(tree: &Tree, id: usize, k: usize, out: &mut Vec<Option<Summary>>) {
    let node = &tree.nodes[id];
    let s = match node.children {
        None => {
            let mut counts = vec![0; k];
            for &i in &tree.perm[node.start..node.end] {
                counts[tree.ds.label(i)] += 1;
            }
            let capacity = counts.iter().map(|&c| usize::from(c > 0)).collect();
            Summary { leaves: 1, counts, capacity }
        }
        Some((a, b)) => {
            summarize(tree, a, k, out);
            summarize(tree, b, k, out);
            let (sa, sb) = (out[a].as_ref().unwrap(), out[b].as_ref().unwrap());
            Summary {
                leaves: sa.leaves + sb.leaves,
                counts: sa.counts.iter().zip(&sb.counts).map(|(x, y)| x + y).collect(),
                capacity: sa.capacity.iter().zip(&sb.capacity).map(|(x, y)| x + y).collect(),
            }
        }
    };
    out[id] = Some(s);
}

/// Moves `x` (started at `ideal` clamped into `[lo, hi]`) to sum `total`,
/// one unit at a time, always adjusting the class furthest from its ideal.
fn fit(ideal: &[usize], lo: &[usize], hi: &[usize], total: usize) -> Option<Vec<usize>> {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return None;
    }
    let mut x: Vec<usize> = (0..ideal.len()).map(|c| ideal[c].clamp(lo[c], hi[c])).collect();
    let mut sum: usize = x.iter().sum();
    while sum < total {
        let c = (0..x.len())
            .filter(|&c| x[c] < hi[c])
            .max_by_key(|&c| (ideal[c] as i64 - x[c] as i64, Reverse(c)))?;
        x[c] += 1;
        sum += 1;
    }
    while sum > total {
        let c = (0..x.len())
            .filter(|&c| x[c] > lo[c])
            .max_by_key(|&c| (x[c] as i64 - ideal[c] as i64, Reverse(c)))?;
        x[c] -= 1;
        sum -= 1;
    }
    Some(x)
}

fn ideal_quotas(s: &Summary) -> Vec<usize> {
    let w: Vec<f64> = s.counts.iter().map(|&c| c as f64).collect();
    quotas_with_floor(s.leaves, &w)
}

fn standalone(s: &Summary) -> Vec<usize> {
    let zeros = vec![0; s.counts.len()];
    fit(&ideal_quotas(s), &zeros, &s.capacity, s.leaves).unwrap_or_else(|| ideal_quotas(s))
}

fn assign(tree: &Tree, sums: &[Option<Summary>], id: usize, quota: Vec<usize>, leaves: &mut Vec<KdLeaf>) {
    let node = &tree.nodes[id];
    match node.children {
        None => {
            let members = &tree.perm[node.start..node.end];
            let wanted = quota.iter().position(|&q| q > 0).unwrap_or(0);
            let center = [(node.lo[0] + node.hi[0]) * 0.5, (node.lo[1] + node.hi[1]) * 0.5];
            let pts = tree.ds.points();
            let nearest = |filter: &dyn Fn(usize) -> bool| {
                members
                    .iter()
                    .copied()
                    .filter(|&i| filter(i))
                    .min_by(|&a, &b| {
                        let da = dist2(pts.point(a), center);
                        let db = dist2(pts.point(b), center);
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
            };
            let representative = nearest(&|i| tree.ds.label(i) == wanted)
                .or_else(|| nearest(&|_| true))
                .expect("leaves are never empty");
            let mut points = members.to_vec();
            points.sort_unstable();
            leaves.push(KdLeaf {
                lo: node.lo,
                hi: node.hi,
                points,
                assigned_class: tree.ds.label(representative),
                representative,
            });
        }
        Some((a, b)) => {
            let (sa, sb) = (sums[a].as_ref().unwrap(), sums[b].as_ref().unwrap());
            let lower: Vec<usize> = quota.iter().zip(&sb.capacity).map(|(&q, &cap)| q.saturating_sub(cap)).collect();
            let upper: Vec<usize> = quota.iter().zip(&sa.capacity).map(|(&q, &cap)| q.min(cap)).collect();
            let (qa, qb) = match fit(&ideal_quotas(sa), &lower, &upper, sa.leaves) {
                Some(qa) => {
                    let qb = quota.iter().zip(&qa).map(|(q, x)| q - x).collect();
                    (qa, qb)
                }
                // parent quota cannot be honored below this node
                None => (standalone(sa), standalone(sb)),
            };
            assign(tree, sums, a, qa, leaves);
            assign(tree, sums, b, qb, leaves);
        }
    }
}

#[inline]
fn dist2(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    dx * dx + dy * dy
}

/// Subdivision sample together with the leaves that produced it.
pub fn subdivision_with_tree(ds: &LabeledDataset, p: &SamplingParams) -> Result<SubdivisionResult> {
    p.check_target(ds.len())?;
    if p.target_n == 0 {
        return Ok(SubdivisionResult {
            indices: SampleIndexSet::default(),
            leaves: Vec::new(),
            root_quotas: vec![0; ds.num_classes()],
        });
    }
    let tree = Tree::build(ds, p.target_n);
    let k = ds.num_classes();
    let mut sums: Vec<Option<Summary>> = (0..tree.nodes.len()).map(|_| None).collect();
    summarize(&tree, 0, k, &mut sums);
    let root_quotas = standalone(sums[0].as_ref().unwrap());
    let mut leaves = Vec::with_capacity(p.target_n);
    assign(&tree, &sums, 0, root_quotas.clone(), &mut leaves);
    let indices = SampleIndexSet::from_unsorted(leaves.iter().map(|l| l.representative).collect());
    Ok(SubdivisionResult {
        indices,
        leaves,
        root_quotas,
    })
}

pub fn sample_recursive_subdivision(ds: &LabeledDataset, p: &SamplingParams) -> Result<SampleIndexSet> {
    subdivision_with_tree(ds, p).map(|r| r.indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;
    use crate::rng::Seed;
    use rand::Rng;

    fn imbalanced(n_major: usize, n_minor: usize, seed: u64) -> LabeledDataset {
        let mut rng = Seed(seed).rng();
        let n = n_major + n_minor;
        let xs = (0..n).map(|_| rng.random::<f64>()).collect();
        let ys = (0..n).map(|_| rng.random::<f64>()).collect();
        let labels = (0..n).map(|i| u32::from(i >= n_major)).collect();
        LabeledDataset::new(PointSet::new(xs, ys).unwrap(), labels).unwrap()
    }

    #[test]
    fn exhaustive_request() {
        let ds = imbalanced(40, 10, 1);
        let s = sample_recursive_subdivision(&ds, &SamplingParams::new(50, 0)).unwrap();
        assert_eq!(s, SampleIndexSet::all(50));
    }

    #[test]
    fn one_point_per_leaf_and_leaves_partition() {
        let ds = imbalanced(900, 100, 3);
        let r = subdivision_with_tree(&ds, &SamplingParams::new(128, 0)).unwrap();
        assert_eq!(r.leaves.len(), 128);
        assert_eq!(r.indices.len(), 128);
        let mut all: Vec<usize> = r.leaves.iter().flat_map(|l| l.points.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        for leaf in &r.leaves {
            assert!(leaf.points.contains(&leaf.representative));
            for &i in &leaf.points {
                let p = ds.points().point(i);
                assert!(p[0] >= leaf.lo[0] && p[0] <= leaf.hi[0] && p[1] >= leaf.lo[1] && p[1] <= leaf.hi[1]);
            }
        }
    }

    #[test]
    fn class_counts_follow_root_quotas() {
        let ds = imbalanced(700, 300, 5);
        let r = subdivision_with_tree(&ds, &SamplingParams::new(100, 0)).unwrap();
        assert_eq!(r.root_quotas, vec![70, 30]);
        let minority = r.indices.iter().filter(|&i| ds.label(i) == 1).count();
        assert_eq!(minority, 30);
    }

    #[test]
    fn fit_respects_bounds() {
        assert_eq!(fit(&[3, 1], &[0, 0], &[2, 5], 4), Some(vec![2, 2]));
        assert_eq!(fit(&[3, 1], &[0, 0], &[1, 1], 4), None);
    }
}
