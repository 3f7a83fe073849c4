//! Uniform-grid spatial indexes over the unit square.
//!
//! [`KnnGrid`] answers exact k-nearest-neighbor queries on a static point
//! set. [`DartGrid`] is the incremental background grid used by dart
//! throwing: points are inserted one at a time and queried for conflicts.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::dataset::PointSet;

const EMPTY: u32 = u32::MAX;

#[inline]
fn cell_coord(v: f64, dim: usize) -> usize {
    ((v * dim as f64) as usize).min(dim - 1)
}

/// Static bucket grid for exact k-NN.
#[derive(Debug, Clone)]
pub struct KnnGrid<'a> {
    points: &'a PointSet,
    dim: usize,
    cell: f64,
    /// CSR layout: points of cell `c` are `order[start[c]..start[c + 1]]`.
    start: Vec<u32>,
    order: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
}

#[derive(PartialEq)]
struct Cand(f64, usize);

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl<'a> KnnGrid<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        let n = points.len();
        // about two points per cell on uniform data
        let dim = ((n as f64 / 2.0).sqrt().round() as usize).clamp(1, 1024);
        let cells = dim * dim;
        let mut counts = vec![0u32; cells + 1];
        let cell_of: Vec<usize> = points
            .iter()
            .map(|p| cell_coord(p[1], dim) * dim + cell_coord(p[0], dim))
            .collect();
        for &c in &cell_of {
            counts[c + 1] += 1;
        }
        for c in 0..cells {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; n];
        for (i, &c) in cell_of.iter().enumerate() {
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        KnnGrid {
            points,
            dim,
            cell: 1.0 / dim as f64,
            start: counts,
            order,
        }
    }

    pub fn points(&self) -> &PointSet {
        self.points
    }

    /// The `k` nearest points to `query`, ascending by (distance, index).
    /// `exclude` drops one index (the query point itself).
    pub fn knn(&self, query: [f64; 2], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let dim = self.dim as isize;
        let cx = cell_coord(query[0].clamp(0.0, 1.0), self.dim) as isize;
        let cy = cell_coord(query[1].clamp(0.0, 1.0), self.dim) as isize;
        let mut heap: BinaryHeap<Cand> = BinaryHeap::with_capacity(k + 1);
        let xs = self.points.xs();
        let ys = self.points.ys();
        let visit = |gx: isize, gy: isize, heap: &mut BinaryHeap<Cand>| {
            if gx < 0 || gy < 0 || gx >= dim || gy >= dim {
                return;
            }
            let c = gy as usize * self.dim + gx as usize;
            for &j in &self.order[self.start[c] as usize..self.start[c + 1] as usize] {
                let j = j as usize;
                if Some(j) == exclude {
                    continue;
                }
                let dx = xs[j] - query[0];
                let dy = ys[j] - query[1];
                let cand = Cand(dx * dx + dy * dy, j);
                if heap.len() < k {
                    heap.push(cand);
                } else if cand < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(cand);
                }
            }
        };
        let max_ring = dim;
        for ring in 0..=max_ring {
            if ring == 0 {
                visit(cx, cy, &mut heap);
            } else {
                for gx in (cx - ring)..=(cx + ring) {
                    visit(gx, cy - ring, &mut heap);
                    visit(gx, cy + ring, &mut heap);
                }
                for gy in (cy - ring + 1)..(cy + ring) {
                    visit(cx - ring, gy, &mut heap);
                    visit(cx + ring, gy, &mut heap);
                }
            }
            if heap.len() == k {
                // unvisited cells are at least `ring` whole cells away
                let reach = ring as f64 * self.cell;
                if heap.peek().unwrap().0 < reach * reach {
                    break;
                }
            }
        }
        let mut out: Vec<Neighbor> = heap
            .into_sorted_vec()
            .into_iter()
            .map(|Cand(d2, index)| Neighbor {
                index,
                dist: d2.sqrt(),
            })
            .collect();
        out.truncate(k);
        out
    }
}

/// Incremental grid with linked-list buckets. Dense storage for moderate
/// resolutions, hashed otherwise.
#[derive(Debug)]
pub struct DartGrid {
    cell: f64,
    dim: usize,
    heads: Heads,
    next: Vec<u32>,
    items: Vec<[f64; 2]>,
    ids: Vec<u32>,
}

#[derive(Debug)]
enum Heads {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

const DENSE_LIMIT: usize = 1 << 20;

impl DartGrid {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite());
        let dim = (1.0 / cell).ceil().clamp(1.0, 1e9) as usize;
        let heads = match dim.checked_mul(dim) {
            Some(cells) if cells <= DENSE_LIMIT => Heads::Dense(vec![EMPTY; cells]),
            _ => Heads::Sparse(HashMap::new()),
        };
        DartGrid {
            cell,
            dim,
            heads,
            next: Vec::new(),
            items: Vec::new(),
            ids: Vec::new(),
        }
    }

    fn key(&self, gx: usize, gy: usize) -> usize {
        gy * self.dim + gx
    }

    fn head(&self, key: usize) -> u32 {
        match &self.heads {
            Heads::Dense(v) => v[key],
            Heads::Sparse(m) => m.get(&(key as u64)).copied().unwrap_or(EMPTY),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn insert(&mut self, p: [f64; 2], id: usize) {
        let key = self.key(cell_coord(p[0], self.dim), cell_coord(p[1], self.dim));
        let slot = self.items.len() as u32;
        let prev = match &mut self.heads {
            Heads::Dense(v) => std::mem::replace(&mut v[key], slot),
            Heads::Sparse(m) => m.insert(key as u64, slot).unwrap_or(EMPTY),
        };
        self.next.push(prev);
        self.items.push(p);
        self.ids.push(id as u32);
    }

    /// Calls `conflict(id, dist2)` for every stored point within `reach`
    /// grid-distance of `p` (a superset of those within Euclidean `reach`)
    /// and returns true as soon as one call does.
    pub fn any_near(&self, p: [f64; 2], reach: f64, mut conflict: impl FnMut(usize, f64) -> bool) -> bool {
        let rings = (reach / self.cell).ceil() as isize;
        let cx = cell_coord(p[0], self.dim) as isize;
        let cy = cell_coord(p[1], self.dim) as isize;
        let dim = self.dim as isize;
        for gy in (cy - rings).max(0)..=(cy + rings).min(dim - 1) {
            for gx in (cx - rings).max(0)..=(cx + rings).min(dim - 1) {
                let mut slot = self.head(self.key(gx as usize, gy as usize));
                while slot != EMPTY {
                    let q = self.items[slot as usize];
                    let dx = q[0] - p[0];
                    let dy = q[1] - p[1];
                    if conflict(self.ids[slot as usize] as usize, dx * dx + dy * dy) {
                        return true;
                    }
                    slot = self.next[slot as usize];
                }
            }
        }
        false
    }
}
