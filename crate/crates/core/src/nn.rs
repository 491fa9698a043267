//! Nearest-neighbour index over a [`StateSpace`] metric.
//!
//! Insert-only. Points go to a small unindexed buffer; full buffers are merged
//! into a logarithmic family of balanced kd-trees. Angle coordinates are
//! handled by wrap-aware cell bounds, so results match a linear scan under the
//! compound metric, with ties broken by the lower id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::spaces::{angle_difference, CoordKind, StateSpace};

const BUFFER: usize = 16;
const LEAF: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    d2: f64,
    id: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone)]
struct Tree {
    ids: Vec<u32>,
    /// Split coordinate of the node whose median sits at this position.
    split: Vec<u16>,
}

#[derive(Debug, Clone)]
pub struct NearestNeighbors {
    kinds: Vec<CoordKind>,
    scales: Vec<f64>,
    coords: Vec<f64>,
    buffer: Vec<u32>,
    trees: Vec<Option<Tree>>,
}

impl NearestNeighbors {
    pub fn new(space: &StateSpace) -> Self {
        NearestNeighbors {
            kinds: space.coord_kinds().to_vec(),
            scales: space.coord_scales().to_vec(),
            coords: Vec::new(),
            buffer: Vec::new(),
            trees: Vec::new(),
        }
    }

    fn dim(&self) -> usize {
        self.kinds.len()
    }

    pub fn len(&self) -> usize {
        if self.dim() == 0 {
            0
        } else {
            self.coords.len() / self.dim()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn point(&self, id: u32) -> &[f64] {
        let d = self.dim();
        &self.coords[id as usize * d..(id as usize + 1) * d]
    }

    #[inline]
    fn dist_sq(&self, q: &[f64], id: u32) -> f64 {
        let p = self.point(id);
        let mut acc = 0.0;
        for ((kind, w), (a, b)) in self.kinds.iter().zip(&self.scales).zip(q.iter().zip(p)) {
            let d = w * StateSpace::coord_delta(*kind, *a, *b);
            acc += d * d;
        }
        acc
    }

    /// Adds a point and returns its id (ids are consecutive from zero).
    pub fn insert(&mut self, values: &[f64]) -> usize {
        assert_eq!(values.len(), self.dim(), "point dimension mismatch");
        let id = self.len();
        self.coords.extend_from_slice(values);
        self.buffer.push(id as u32);
        if self.buffer.len() == BUFFER {
            let mut carry = std::mem::take(&mut self.buffer);
            let mut slot = 0;
            while let Some(t) = self.trees.get_mut(slot).and_then(Option::take) {
                carry.extend(t.ids);
                slot += 1;
            }
            if slot == self.trees.len() {
                self.trees.push(None);
            }
            self.trees[slot] = Some(self.build(carry));
        }
        id
    }

    fn build(&self, mut ids: Vec<u32>) -> Tree {
        let mut split = vec![0u16; ids.len()];
        self.build_range(&mut ids, &mut split);
        Tree { ids, split }
    }

    fn build_range(&self, ids: &mut [u32], split: &mut [u16]) {
        if ids.len() <= LEAF {
            return;
        }
        let dim = self.dim();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for c in 0..dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &id in ids.iter() {
                let v = self.coords[id as usize * dim + c];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let spread = (hi - lo) * self.scales[c];
            if spread > best.0 {
                best = (spread, c);
            }
        }
        let c = best.1;
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |a, b| {
            let va = self.coords[*a as usize * dim + c];
            let vb = self.coords[*b as usize * dim + c];
            va.total_cmp(&vb).then(a.cmp(b))
        });
        split[mid] = c as u16;
        let (left, rest) = ids.split_at_mut(mid);
        let (sl, srest) = split.split_at_mut(mid);
        self.build_range(left, sl);
        self.build_range(&mut rest[1..], &mut srest[1..]);
    }

    /// Nearest point as `(id, distance)`.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        self.k_nearest(q, 1).into_iter().next()
    }

    /// The `k` nearest points sorted by `(distance, id)`.
    pub fn k_nearest(&self, q: &[f64], k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        assert_eq!(q.len(), self.dim(), "query dimension mismatch");
        let mut heap = BinaryHeap::with_capacity(k + 1);
        for &id in &self.buffer {
            self.offer(&mut heap, k, q, id);
        }
        let dim = self.dim();
        let mut lo = vec![0.0; dim];
        let mut hi = vec![0.0; dim];
        for tree in self.trees.iter().flatten() {
            for (c, kind) in self.kinds.iter().enumerate() {
                (lo[c], hi[c]) = match *kind {
                    CoordKind::Real { lower, upper } => (lower.min(q[c]), upper.max(q[c])),
                    CoordKind::Angle => (-std::f64::consts::PI, std::f64::consts::PI),
                };
            }
            self.search(tree, 0, tree.ids.len(), q, &mut lo, &mut hi, 0.0, &mut heap, k);
        }
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter()
            .map(|c| (c.id as usize, c.d2.sqrt()))
            .collect()
    }

    #[inline]
    fn offer(&self, heap: &mut BinaryHeap<Candidate>, k: usize, q: &[f64], id: u32) {
        let cand = Candidate {
            d2: self.dist_sq(q, id),
            id,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().unwrap() {
            heap.pop();
            heap.push(cand);
        }
    }

    /// Weighted squared gap between `v` and the interval `[lo, hi]`.
    #[inline]
    fn gap_sq(&self, c: usize, v: f64, lo: f64, hi: f64) -> f64 {
        let g = match self.kinds[c] {
            CoordKind::Real { .. } => (lo - v).max(0.0).max(v - hi),
            CoordKind::Angle => {
                if (lo..=hi).contains(&v) {
                    0.0
                } else {
                    angle_difference(v, lo).abs().min(angle_difference(v, hi).abs())
                }
            }
        };
        let g = g * self.scales[c];
        g * g
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        tree: &Tree,
        start: usize,
        end: usize,
        q: &[f64],
        lo: &mut [f64],
        hi: &mut [f64],
        rd: f64,
        heap: &mut BinaryHeap<Candidate>,
        k: usize,
    ) {
        if end - start <= LEAF {
            for &id in &tree.ids[start..end] {
                self.offer(heap, k, q, id);
            }
            return;
        }
        let mid = start + (end - start) / 2;
        let id = tree.ids[mid];
        self.offer(heap, k, q, id);
        let c = tree.split[mid] as usize;
        let s = self.point(id)[c];
        let old = self.gap_sq(c, q[c], lo[c], hi[c]);
        let left_gap = self.gap_sq(c, q[c], lo[c], s.min(hi[c]));
        let right_gap = self.gap_sq(c, q[c], s.max(lo[c]), hi[c]);
        let rd_left = rd - old + left_gap;
        let rd_right = rd - old + right_gap;

        let order = if rd_left <= rd_right {
            [(true, rd_left), (false, rd_right)]
        } else {
            [(false, rd_right), (true, rd_left)]
        };
        for (is_left, child_rd) in order {
            if heap.len() == k {
                let worst = heap.peek().unwrap().d2;
                if child_rd > worst * (1.0 + 1e-12) {
                    continue;
                }
            }
            if is_left {
                let saved = hi[c];
                hi[c] = s.min(saved);
                self.search(tree, start, mid, q, lo, hi, child_rd, heap, k);
                hi[c] = saved;
            } else {
                let saved = lo[c];
                lo[c] = s.max(saved);
                self.search(tree, mid + 1, end, q, lo, hi, child_rd, heap, k);
                lo[c] = saved;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Component, State};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(space: &StateSpace, pts: &[State], q: &State, k: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (space.distance_sq(q, p), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(d, i)| (i, d.sqrt())).collect()
    }

    fn check_space(space: StateSpace, n: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nn = NearestNeighbors::new(&space);
        let mut pts = Vec::new();
        for i in 0..n {
            let p = space.sample_uniform(&mut rng);
            assert_eq!(nn.insert(p.values()), i);
            pts.push(p);
            if i % 37 == 0 {
                let q = space.sample_uniform(&mut rng);
                let k = rng.random_range(1..12);
                assert_eq!(nn.k_nearest(q.values(), k), brute(&space, &pts, &q, k));
            }
        }
    }

    #[test]
    fn matches_linear_scan_real() {
        check_space(StateSpace::cube(3, 0.0, 1.0).unwrap(), 1500, 1);
        check_space(StateSpace::cube(12, -2.0, 2.0).unwrap(), 600, 2);
    }

    #[test]
    fn matches_linear_scan_periodic() {
        let se2 = StateSpace::with_weights(
            vec![
                Component::SE2 {
                    lower: [0.0, 0.0],
                    upper: [2.0, 1.0],
                },
                Component::SO2,
            ],
            vec![1.0, 0.5],
        )
        .unwrap();
        check_space(se2, 1500, 3);
    }

    #[test]
    fn duplicate_points_tie_on_id() {
        let space = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let mut nn = NearestNeighbors::new(&space);
        for _ in 0..100 {
            nn.insert(&[0.5, 0.5]);
        }
        let got = nn.k_nearest(&[0.5, 0.5], 3);
        assert_eq!(got.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(nn.nearest(&[0.0, 0.0]).unwrap().0, 0);
    }

    #[test]
    fn empty_and_zero_k() {
        let space = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let mut nn = NearestNeighbors::new(&space);
        assert!(nn.nearest(&[0.0, 0.0]).is_none());
        nn.insert(&[0.1, 0.2]);
        assert!(nn.k_nearest(&[0.0, 0.0], 0).is_empty());
        assert_eq!(nn.k_nearest(&[0.0, 0.0], 5).len(), 1);
    }
}
