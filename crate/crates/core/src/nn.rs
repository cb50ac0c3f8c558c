//! Exact Euclidean k-nearest-neighbor and radius queries over an
//! append-only point set.
//!
//! Points go into a small unsorted buffer; full buffers are frozen into
//! static kd-trees, and trees of equal size are merged (the logarithmic
//! method), so there are at most `O(log n)` trees to search. Results are
//! ordered by `(distance, id)` and match a linear scan exactly.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::geometry::distance;

const BUFFER_CAP: usize = 32;
const LEAF_SIZE: usize = 8;
// Relative slack on pruning tests; floating-point distances are never pruned early.
const PRUNE_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Neighbor) -> Ordering {
        self.distance.total_cmp(&other.distance).then(self.id.cmp(&other.id))
    }
}

// Max-heap entry so the worst of the current k sits on top.
struct HeapEntry(Neighbor);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

enum KdNode {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree over a set of slots of the owning index.
struct KdTree {
    slots: Vec<usize>,
    nodes: Vec<KdNode>,
}

impl KdTree {
    fn build(mut slots: Vec<usize>, coords: &[f64], dim: usize) -> Self {
        let mut nodes = Vec::new();
        let len = slots.len();
        Self::build_rec(&mut slots, 0, len, coords, dim, &mut nodes);
        KdTree { slots, nodes }
    }

    fn build_rec(
        slots: &mut [usize],
        start: usize,
        end: usize,
        coords: &[f64],
        dim: usize,
        nodes: &mut Vec<KdNode>,
    ) -> usize {
        let me = nodes.len();
        if end - start <= LEAF_SIZE {
            nodes.push(KdNode::Leaf { start, end });
            return me;
        }
        // split on the axis of widest spread
        let part = &mut slots[start..end];
        let mut axis = 0;
        let mut widest = -1.0;
        for a in 0..dim {
            let (lo, hi) = part.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                let v = coords[s * dim + a];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        let mid = part.len() / 2;
        part.select_nth_unstable_by(mid, |&x, &y| coords[x * dim + axis].total_cmp(&coords[y * dim + axis]));
        let value = coords[part[mid] * dim + axis];
        nodes.push(KdNode::Leaf { start: 0, end: 0 });
        let left = Self::build_rec(slots, start, start + mid, coords, dim, nodes);
        let right = Self::build_rec(slots, start + mid, end, coords, dim, nodes);
        nodes[me] = KdNode::Split {
            axis,
            value,
            left,
            right,
        };
        me
    }
}

/// Append-only exact nearest-neighbor index.
pub struct NeighborIndex {
    dim: usize,
    coords: Vec<f64>,
    ids: Vec<usize>,
    known: HashSet<usize>,
    trees: Vec<KdTree>,
    buffer: Vec<usize>,
}

impl NeighborIndex {
    pub fn new(dim: usize) -> Self {
        NeighborIndex {
            dim,
            coords: Vec::new(),
            ids: Vec::new(),
            known: HashSet::new(),
            trees: Vec::new(),
            buffer: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn insert(&mut self, id: usize, q: &[f64]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::usage(format!(
                "point has {} coordinates, index dimension is {}",
                q.len(),
                self.dim
            )));
        }
        if !self.known.insert(id) {
            return Err(Error::usage(format!("duplicate id {id}")));
        }
        let slot = self.ids.len();
        self.ids.push(id);
        self.coords.extend_from_slice(q);
        self.buffer.push(slot);
        if self.buffer.len() >= BUFFER_CAP {
            let mut slots = std::mem::take(&mut self.buffer);
            while let Some(last) = self.trees.last() {
                if last.slots.len() > slots.len() {
                    break;
                }
                let last = self.trees.pop().expect("checked");
                slots.extend(last.slots);
            }
            self.trees.push(KdTree::build(slots, &self.coords, self.dim));
        }
        Ok(())
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    fn check_query(&self, q: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::usage("query on an empty index"));
        }
        if q.len() != self.dim {
            return Err(Error::usage("query dimension mismatch"));
        }
        Ok(())
    }

    /// The `min(k, len)` nearest points, ascending by distance then id.
    pub fn k_nearest(&self, q: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        self.check_query(q)?;
        if k == 0 {
            return Err(Error::usage("k must be at least 1"));
        }
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
        for &slot in &self.buffer {
            self.offer(&mut heap, k, q, slot);
        }
        for tree in &self.trees {
            self.knn_rec(tree, 0, q, k, &mut heap);
        }
        let mut out: Vec<Neighbor> = heap.into_iter().map(|e| e.0).collect();
        out.sort_by(Neighbor::key_cmp);
        Ok(out)
    }

    /// Single nearest neighbor.
    pub fn nearest(&self, q: &[f64]) -> Result<Neighbor> {
        Ok(self.k_nearest(q, 1)?[0])
    }

    fn offer(&self, heap: &mut BinaryHeap<HeapEntry>, k: usize, q: &[f64], slot: usize) {
        let cand = Neighbor {
            id: self.ids[slot],
            distance: distance(q, self.point(slot)),
        };
        if heap.len() < k {
            heap.push(HeapEntry(cand));
        } else if let Some(top) = heap.peek() {
            if cand.key_cmp(&top.0) == Ordering::Less {
                heap.pop();
                heap.push(HeapEntry(cand));
            }
        }
    }

    fn knn_rec(&self, tree: &KdTree, node: usize, q: &[f64], k: usize, heap: &mut BinaryHeap<HeapEntry>) {
        match tree.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &slot in &tree.slots[start..end] {
                    self.offer(heap, k, q, slot);
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(tree, near, q, k, heap);
                let visit_far = heap.len() < k
                    || heap
                        .peek()
                        .map(|top| diff.abs() <= top.0.distance * (1.0 + PRUNE_SLACK) + f64::MIN_POSITIVE)
                        .unwrap_or(true);
                if visit_far {
                    self.knn_rec(tree, far, q, k, heap);
                }
            }
        }
    }

    /// Nearest point under a caller-supplied metric, ties on the lower id.
    ///
    /// `metric(q, p)` must never be smaller than `|q[a] - p[a]|` on any axis
    /// `a` (true for every norm and for sums of norms over coordinate blocks);
    /// the search prunes with that bound and stays exact.
    pub fn nearest_by(&self, q: &[f64], metric: impl Fn(&[f64], &[f64]) -> f64) -> Result<Neighbor> {
        self.check_query(q)?;
        let mut best = Neighbor {
            id: usize::MAX,
            distance: f64::INFINITY,
        };
        for &slot in &self.buffer {
            self.offer_by(&mut best, q, slot, &metric);
        }
        for tree in &self.trees {
            self.nearest_by_rec(tree, 0, q, &mut best, &metric);
        }
        Ok(best)
    }

    fn offer_by(&self, best: &mut Neighbor, q: &[f64], slot: usize, metric: &impl Fn(&[f64], &[f64]) -> f64) {
        let cand = Neighbor {
            id: self.ids[slot],
            distance: metric(q, self.point(slot)),
        };
        if cand.key_cmp(best) == Ordering::Less {
            *best = cand;
        }
    }

    fn nearest_by_rec(
        &self,
        tree: &KdTree,
        node: usize,
        q: &[f64],
        best: &mut Neighbor,
        metric: &impl Fn(&[f64], &[f64]) -> f64,
    ) {
        match tree.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &slot in &tree.slots[start..end] {
                    self.offer_by(best, q, slot, metric);
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.nearest_by_rec(tree, near, q, best, metric);
                if diff.abs() <= best.distance * (1.0 + PRUNE_SLACK) + f64::MIN_POSITIVE {
                    self.nearest_by_rec(tree, far, q, best, metric);
                }
            }
        }
    }

    /// All points with distance `<= r`, ascending by distance then id.
    pub fn within_radius(&self, q: &[f64], r: f64) -> Result<Vec<Neighbor>> {
        self.check_query(q)?;
        if !(r > 0.0) {
            return Err(Error::usage("radius must be positive"));
        }
        let mut out = Vec::new();
        for &slot in &self.buffer {
            self.collect(&mut out, q, r, slot);
        }
        for tree in &self.trees {
            self.radius_rec(tree, 0, q, r, &mut out);
        }
        out.sort_by(Neighbor::key_cmp);
        Ok(out)
    }

    fn collect(&self, out: &mut Vec<Neighbor>, q: &[f64], r: f64, slot: usize) {
        let d = distance(q, self.point(slot));
        if d <= r {
            out.push(Neighbor {
                id: self.ids[slot],
                distance: d,
            });
        }
    }

    fn radius_rec(&self, tree: &KdTree, node: usize, q: &[f64], r: f64, out: &mut Vec<Neighbor>) {
        match tree.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &slot in &tree.slots[start..end] {
                    self.collect(out, q, r, slot);
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.radius_rec(tree, near, q, r, out);
                if diff.abs() <= r * (1.0 + PRUNE_SLACK) + f64::MIN_POSITIVE {
                    self.radius_rec(tree, far, q, r, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_index() -> NeighborIndex {
        let mut idx = NeighborIndex::new(2);
        idx.insert(0, &[0.0, 0.0]).unwrap();
        idx.insert(1, &[1.0, 0.0]).unwrap();
        idx.insert(2, &[2.0, 0.0]).unwrap();
        idx
    }

    #[test]
    fn insert_then_query() {
        let mut idx = NeighborIndex::new(2);
        idx.insert(17, &[0.3, 0.4]).unwrap();
        let n = idx.nearest(&[0.3, 0.4]).unwrap();
        assert_eq!((n.id, n.distance), (17, 0.0));
        idx.insert(5, &[0.0, 0.0]).unwrap();
        let all = idx.k_nearest(&[0.0, 0.1], 2).unwrap();
        assert_eq!(all.iter().map(|n| n.id).collect::<Vec<_>>(), vec![5, 17]);
        assert!(matches!(idx.insert(5, &[1.0, 1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn knn_examples() {
        let idx = line_index();
        let got = idx.k_nearest(&[0.9, 0.0], 2).unwrap();
        assert_eq!(got.iter().map(|n| n.id).collect::<Vec<_>>(), vec![1, 0]);
        assert_eq!(idx.k_nearest(&[0.9, 0.0], 10).unwrap().len(), 3);
        assert!(NeighborIndex::new(2).k_nearest(&[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn radius_examples() {
        let mut idx = NeighborIndex::new(2);
        idx.insert(0, &[0.0, 0.0]).unwrap();
        idx.insert(1, &[1.0, 0.0]).unwrap();
        let ids = |v: Vec<Neighbor>| v.iter().map(|n| n.id).collect::<Vec<_>>();
        assert_eq!(ids(idx.within_radius(&[0.0, 0.0], 0.5).unwrap()), vec![0]);
        assert_eq!(ids(idx.within_radius(&[0.0, 0.0], 1.0).unwrap()), vec![0, 1]);
        assert!(idx.within_radius(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn ties_break_by_id() {
        let mut idx = NeighborIndex::new(1);
        for (id, x) in [(9, 1.0), (3, -1.0), (4, 1.0), (1, -1.0)] {
            idx.insert(id, &[x]).unwrap();
        }
        let got = idx.k_nearest(&[0.0], 3).unwrap();
        assert_eq!(got.iter().map(|n| n.id).collect::<Vec<_>>(), vec![1, 3, 4]);
    }
}
