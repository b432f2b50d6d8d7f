//! Exact ℓ∞ neighbor queries in coordinate projections of a dataset.
//!
//! Two backends answer the same questions: a linear scan and a k-d tree with
//! per-node bounding boxes. Both evaluate the same floating-point predicate
//! `|p_c - q_c| <= r`, and the tree only prunes or accepts whole boxes when
//! the predicate is decided by the box corners, so their answers are
//! bit-identical.

use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    BruteForce,
    #[default]
    Tree,
}

/// Queryable projection of a dataset onto a list of columns.
#[derive(Debug, Clone)]
pub struct SubspaceIndex<'a, T> {
    dataset: &'a Dataset<T>,
    columns: Vec<usize>,
    dim: usize,
    /// Projected coordinates in row order.
    coords: Vec<T>,
    tree: Option<KdTree<T>>,
}

/// Builds an index over `columns` of `dataset`.
pub fn build_index<'a, T: Scalar>(
    dataset: &'a Dataset<T>,
    columns: &[usize],
    backend: Backend,
) -> Result<SubspaceIndex<'a, T>> {
    SubspaceIndex::build(dataset, columns, backend)
}

impl<'a, T: Scalar> SubspaceIndex<'a, T> {
    pub fn build(dataset: &'a Dataset<T>, columns: &[usize], backend: Backend) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("index needs at least one column".into()));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= dataset.n_cols()) {
            return Err(Error::InvalidArgument(format!("column {c} out of range")));
        }
        let dim = columns.len();
        let mut coords = Vec::with_capacity(dataset.n_rows() * dim);
        for r in 0..dataset.n_rows() {
            let row = dataset.row(r);
            coords.extend(columns.iter().map(|&c| row[c]));
        }
        let tree = match backend {
            Backend::BruteForce => None,
            Backend::Tree => Some(KdTree::build(&coords, dim)),
        };
        Ok(Self {
            dataset,
            columns: columns.to_vec(),
            dim,
            coords,
            tree,
        })
    }

    pub fn dataset(&self) -> &'a Dataset<T> {
        self.dataset
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.dataset.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn backend(&self) -> Backend {
        if self.tree.is_some() {
            Backend::Tree
        } else {
            Backend::BruteForce
        }
    }

    #[inline]
    fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// ℓ∞ distance between rows `i` and `j` in this projection.
    pub fn distance(&self, i: usize, j: usize) -> T {
        linf(self.point(i), self.point(j))
    }

    fn check_row(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "sample index {i} out of range for {} rows",
                self.len()
            )));
        }
        Ok(())
    }

    /// Distance from row `i` to its `k`-th nearest other row.
    pub fn knn_distance(&self, i: usize, k: usize) -> Result<T> {
        self.check_row(i)?;
        let n = self.len();
        if k == 0 || k >= n {
            return Err(Error::KOutOfRange { k, n });
        }
        Ok(self.knn_distance_unchecked(i, k))
    }

    pub(crate) fn knn_distance_unchecked(&self, i: usize, k: usize) -> T {
        let q = self.point(i);
        match &self.tree {
            Some(tree) => tree.kth_distance(q, i, k),
            None => {
                let mut d: Vec<T> = (0..self.len())
                    .filter(|&j| j != i)
                    .map(|j| linf(q, self.point(j)))
                    .collect();
                let (_, kth, _) = d.select_nth_unstable_by(k - 1, cmp_scalar);
                *kth
            }
        }
    }

    /// Number of rows `j != i` with `dist(i, j) <= r` (closed ball).
    pub fn count_within(&self, i: usize, r: T) -> Result<usize> {
        self.check_row(i)?;
        if !(r >= T::zero()) {
            return Err(Error::InvalidArgument(format!("radius {r} must be >= 0")));
        }
        Ok(self.count_within_unchecked(i, r))
    }

    pub(crate) fn count_within_unchecked(&self, i: usize, r: T) -> usize {
        let q = self.point(i);
        let with_self = match &self.tree {
            Some(tree) => tree.count_within(q, r),
            None => (0..self.len())
                .filter(|&j| within(q, self.point(j), r))
                .count(),
        };
        // the query row is always inside its own ball
        with_self - 1
    }
}

#[inline]
fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("finite distances")
}

#[inline]
fn linf<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

#[inline]
fn within<T: Scalar>(q: &[T], p: &[T], r: T) -> bool {
    q.iter().zip(p).all(|(&x, &y)| (y - x).abs() <= r)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    start: usize,
    end: usize,
    /// Index of the left child; the right child is `left + 1`. Zero for leaves.
    left: usize,
    /// Every point in the node is identical.
    flat: bool,
}

#[derive(Debug, Clone)]
struct KdTree<T> {
    dim: usize,
    /// Points in tree order.
    points: Vec<T>,
    /// Tree position of each row.
    slot: Vec<usize>,
    nodes: Vec<Node>,
    /// `2 * dim` entries per node: mins then maxes.
    bounds: Vec<T>,
}

impl<T: Scalar> KdTree<T> {
    fn build(coords: &[T], dim: usize) -> Self {
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        let mut tree = Self {
            dim,
            points: Vec::new(),
            slot: Vec::new(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            bounds: Vec::new(),
        };
        tree.nodes.push(Node {
            start: 0,
            end: n,
            left: 0,
            flat: false,
        });
        tree.bounds.resize(2 * dim, T::zero());
        tree.split(0, coords, &mut order);
        tree.points = order
            .iter()
            .flat_map(|&i| coords[i * dim..(i + 1) * dim].iter().copied())
            .collect();
        tree.slot = vec![0; n];
        for (pos, &row) in order.iter().enumerate() {
            tree.slot[row] = pos;
        }
        tree
    }

    fn split(&mut self, node: usize, coords: &[T], order: &mut [usize]) {
        let dim = self.dim;
        let Node { start, end, .. } = self.nodes[node];
        let slice = &mut order[start..end];
        let mut lo = coords[slice[0] * dim..(slice[0] + 1) * dim].to_vec();
        let mut hi = lo.clone();
        for &i in slice.iter() {
            for c in 0..dim {
                let v = coords[i * dim + c];
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        let (axis, spread) = (0..dim)
            .map(|c| (c, hi[c] - lo[c]))
            .fold((0, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        let base = 2 * dim * node;
        self.bounds[base..base + dim].copy_from_slice(&lo);
        self.bounds[base + dim..base + 2 * dim].copy_from_slice(&hi);
        if spread == T::zero() {
            self.nodes[node].flat = true;
            return;
        }
        if end - start <= LEAF_SIZE {
            return;
        }
        let mid = (end - start) / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            cmp_scalar(&coords[a * dim + axis], &coords[b * dim + axis])
        });
        let left = self.nodes.len();
        self.nodes.push(Node {
            start,
            end: start + mid,
            left: 0,
            flat: false,
        });
        self.nodes.push(Node {
            start: start + mid,
            end,
            left: 0,
            flat: false,
        });
        self.bounds.resize(self.bounds.len() + 4 * dim, T::zero());
        self.nodes[node].left = left;
        self.split(left, coords, order);
        self.split(left + 1, coords, order);
    }

    #[inline]
    fn node_bounds(&self, node: usize) -> (&[T], &[T]) {
        let base = 2 * self.dim * node;
        (
            &self.bounds[base..base + self.dim],
            &self.bounds[base + self.dim..base + 2 * self.dim],
        )
    }

    #[inline]
    fn point(&self, pos: usize) -> &[T] {
        &self.points[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Lower bound on the distance from `q` to any point in the node.
    #[inline]
    fn min_distance(&self, node: usize, q: &[T]) -> T {
        let (lo, hi) = self.node_bounds(node);
        let mut d = T::zero();
        for c in 0..self.dim {
            let below = lo[c] - q[c];
            let above = q[c] - hi[c];
            d = d.max(below).max(above);
        }
        d
    }

    fn count_within(&self, q: &[T], r: T) -> usize {
        let mut stack = vec![0usize];
        let mut count = 0;
        while let Some(node) = stack.pop() {
            let (lo, hi) = self.node_bounds(node);
            let mut contained = true;
            let mut disjoint = false;
            for c in 0..self.dim {
                let dlo = lo[c] - q[c];
                let dhi = hi[c] - q[c];
                if dlo > r || -dhi > r {
                    disjoint = true;
                    break;
                }
                if -dlo > r || dhi > r {
                    contained = false;
                }
            }
            if disjoint {
                continue;
            }
            let Node {
                start, end, left, ..
            } = self.nodes[node];
            if contained {
                count += end - start;
            } else if left == 0 {
                count += (start..end).filter(|&p| within(q, self.point(p), r)).count();
            } else {
                stack.push(left);
                stack.push(left + 1);
            }
        }
        count
    }

    fn kth_distance(&self, q: &[T], self_id: usize, k: usize) -> T {
        let mut best = KBest::new(k);
        self.knn_visit(0, q, self.slot[self_id], &mut best);
        best.worst()
    }

    fn knn_visit(&self, node: usize, q: &[T], me: usize, best: &mut KBest<T>) {
        let Node {
            start,
            end,
            left,
            flat,
        } = self.nodes[node];
        if left == 0 {
            if flat {
                let d = linf(q, self.point(start));
                let mut copies = end - start;
                if (start..end).contains(&me) {
                    copies -= 1;
                }
                for _ in 0..copies {
                    if !best.offer(d) {
                        break;
                    }
                }
            } else {
                for p in start..end {
                    if p != me {
                        if let Some(d) = linf_below(q, self.point(p), best.bound()) {
                            best.offer(d);
                        }
                    }
                }
            }
            return;
        }
        let (a, b) = (left, left + 1);
        let (da, db) = (self.min_distance(a, q), self.min_distance(b, q));
        let (first, d_first, second, d_second) = if da <= db { (a, da, b, db) } else { (b, db, a, da) };
        if !best.prunes(d_first) {
            self.knn_visit(first, q, me, best);
        }
        if !best.prunes(d_second) {
            self.knn_visit(second, q, me, best);
        }
    }
}

/// The `k` smallest distances seen so far, ascending.
struct KBest<T> {
    k: usize,
    dists: Vec<T>,
}

impl<T: Scalar> KBest<T> {
    fn new(k: usize) -> Self {
        Self {
            k,
            dists: Vec::with_capacity(k + 1),
        }
    }

    fn full(&self) -> bool {
        self.dists.len() == self.k
    }

    fn worst(&self) -> T {
        *self.dists.last().expect("k >= 1 neighbors")
    }

    /// Candidates at or beyond this distance cannot enter.
    #[inline]
    fn bound(&self) -> Option<T> {
        self.full().then(|| self.worst())
    }

    #[inline]
    fn prunes(&self, lower_bound: T) -> bool {
        self.full() && lower_bound >= self.worst()
    }

    /// Returns whether `d` was kept.
    #[inline]
    fn offer(&mut self, d: T) -> bool {
        if self.full() && d >= self.worst() {
            return false;
        }
        let pos = self.dists.partition_point(|&x| x <= d);
        self.dists.insert(pos, d);
        self.dists.truncate(self.k);
        true
    }
}

/// ℓ∞ distance, or `None` once it reaches `bound`.
#[inline]
fn linf_below<T: Scalar>(a: &[T], b: &[T], bound: Option<T>) -> Option<T> {
    let Some(bound) = bound else {
        return Some(linf(a, b));
    };
    let mut d = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let diff = (x - y).abs();
        if diff >= bound {
            return None;
        }
        if diff > d {
            d = diff;
        }
    }
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(points: &[f64]) -> Dataset<f64> {
        Dataset::new(points.to_vec(), 1, None).unwrap()
    }

    fn random_ds(n: usize, d: usize, seed: u64, discrete: bool) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * d)
            .map(|_| {
                if discrete {
                    f64::from(rng.gen_range(0..4u8))
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        Dataset::new(values, d, None).unwrap()
    }

    /// Sorted distances from row i to all other rows, computed from the raw
    /// dataset rather than an index.
    fn oracle_sorted(ds: &Dataset<f64>, cols: &[usize], i: usize) -> Vec<f64> {
        let mut d: Vec<f64> = (0..ds.n_rows())
            .filter(|&j| j != i)
            .map(|j| {
                cols.iter()
                    .map(|&c| (ds.get(j, c) - ds.get(i, c)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn line_examples() {
        let ds = line(&[0.0, 1.0, 3.0]);
        for backend in [Backend::BruteForce, Backend::Tree] {
            let idx = build_index(&ds, &[0], backend).unwrap();
            assert_eq!(idx.len(), 3);
            assert_eq!(idx.knn_distance(0, 2).unwrap(), 3.0);
            assert_eq!(idx.count_within(0, 1.0).unwrap(), 1);
            assert!(idx.knn_distance(0, 3).is_err());
            assert!(idx.knn_distance(0, 0).is_err());
        }
    }

    #[test]
    fn five_points_one_column() {
        let ds = Dataset::new((0..10).map(f64::from).collect(), 2, None).unwrap();
        assert_eq!(build_index(&ds, &[1], Backend::Tree).unwrap().len(), 5);
    }

    #[test]
    fn empty_column_list_rejected() {
        let ds = line(&[0.0, 1.0]);
        assert!(build_index(&ds, &[], Backend::Tree).is_err());
        assert!(build_index(&ds, &[3], Backend::Tree).is_err());
    }

    #[test]
    fn identical_points() {
        let ds = Dataset::new(vec![2.5; 200], 2, None).unwrap();
        for backend in [Backend::BruteForce, Backend::Tree] {
            let idx = build_index(&ds, &[0, 1], backend).unwrap();
            for i in [0, 37, 99] {
                assert_eq!(idx.knn_distance(i, 5).unwrap(), 0.0);
                assert_eq!(idx.knn_distance(i, 99).unwrap(), 0.0);
                assert_eq!(idx.count_within(i, 0.0).unwrap(), 99);
                assert_eq!(idx.distance(i, 3), 0.0);
            }
        }
    }

    #[test]
    fn knn_matches_sorted_oracle() {
        let ds = random_ds(100, 2, 3, false);
        let idx = build_index(&ds, &[0, 1], Backend::Tree).unwrap();
        for i in 0..100 {
            let sorted = oracle_sorted(&ds, &[0, 1], i);
            for k in [1, 2, 7, 50, 99] {
                assert_eq!(idx.knn_distance(i, k).unwrap(), sorted[k - 1]);
            }
        }
    }

    #[test]
    fn counts_match_oracle() {
        let ds = random_ds(150, 3, 5, true);
        let idx = build_index(&ds, &[0, 2], Backend::Tree).unwrap();
        for i in 0..150 {
            let sorted = oracle_sorted(&ds, &[0, 2], i);
            for r in [0.0, 0.5, 1.0, 2.0, 3.0] {
                let expect = sorted.iter().filter(|&&d| d <= r).count();
                assert_eq!(idx.count_within(i, r).unwrap(), expect);
            }
        }
    }

    #[test]
    fn backends_agree_on_random_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cont = random_ds(200, 3, 1, false);
        let disc = random_ds(200, 3, 2, true);
        let subsets: [&[usize]; 5] = [&[0], &[1, 2], &[0, 1, 2], &[2, 0], &[1]];
        for ds in [&cont, &disc] {
            for cols in subsets {
                let brute = build_index(ds, cols, Backend::BruteForce).unwrap();
                let tree = build_index(ds, cols, Backend::Tree).unwrap();
                for _ in 0..100 {
                    let i = rng.gen_range(0..200);
                    let k = rng.gen_range(1..200);
                    let r = tree.knn_distance(i, k).unwrap();
                    assert_eq!(brute.knn_distance(i, k).unwrap().to_bits(), r.to_bits());
                    let r2 = rng.gen::<f64>() * 0.5;
                    assert_eq!(brute.count_within(i, r).unwrap(), tree.count_within(i, r).unwrap());
                    assert_eq!(brute.count_within(i, r2).unwrap(), tree.count_within(i, r2).unwrap());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn projection_is_monotone(seed in 0u64..1000, i in 0usize..60, r in 0.0f64..0.6) {
            let ds = random_ds(60, 3, seed, seed % 2 == 0);
            let sub = build_index(&ds, &[1], Backend::Tree).unwrap();
            let mid = build_index(&ds, &[0, 1], Backend::Tree).unwrap();
            let full = build_index(&ds, &[0, 1, 2], Backend::Tree).unwrap();
            let (a, b, c) = (sub.count_within(i, r).unwrap(), mid.count_within(i, r).unwrap(), full.count_within(i, r).unwrap());
            prop_assert!(c <= b && b <= a);
        }

        #[test]
        fn ball_at_knn_radius_holds_k(seed in 0u64..1000, k in 1usize..40) {
            let ds = random_ds(40, 2, seed, seed % 3 == 0);
            let idx = build_index(&ds, &[0, 1], Backend::Tree).unwrap();
            for i in 0..40 {
                if k < 40 {
                    let rho = idx.knn_distance(i, k).unwrap();
                    prop_assert!(idx.count_within(i, rho).unwrap() >= k);
                }
            }
        }

        #[test]
        fn translation_and_power_of_two_scaling(seed in 0u64..1000, shift in -100i32..100, exp in -8i32..8) {
            // values on a dyadic grid so that integer shifts are exact
            let ds = random_ds(50, 2, seed, false).map_values(|_, v| (v * 64.0).floor() / 64.0).unwrap();
            let moved = ds.map_values(|c, v| if c == 0 { v + f64::from(shift) } else { v }).unwrap();
            let scale = 2f64.powi(exp);
            let scaled = ds.map_values(|_, v| v * scale).unwrap();
            let base = build_index(&ds, &[0, 1], Backend::Tree).unwrap();
            let m = build_index(&moved, &[0, 1], Backend::Tree).unwrap();
            let s = build_index(&scaled, &[0, 1], Backend::Tree).unwrap();
            for i in 0..50 {
                for k in [1, 3, 20] {
                    let rho = base.knn_distance(i, k).unwrap();
                    prop_assert_eq!(m.knn_distance(i, k).unwrap(), rho);
                    prop_assert_eq!(s.knn_distance(i, k).unwrap(), rho * scale);
                    prop_assert_eq!(m.count_within(i, rho).unwrap(), base.count_within(i, rho).unwrap());
                    prop_assert_eq!(s.count_within(i, rho * scale).unwrap(), base.count_within(i, rho).unwrap());
                }
            }
        }
    }
}
