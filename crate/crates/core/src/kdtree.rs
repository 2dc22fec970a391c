//! Insert-only k-d tree with exact radius and nearest-neighbor queries.
//!
//! Points are stored flat (`dim` coordinates each) and nodes split on
//! `depth % dim`. No rebalancing; random insertion order keeps the expected
//! depth logarithmic, which is what sampled states provide.

use crate::space::distance_squared;

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    left: u32,
    right: u32,
}

#[derive(Clone, Debug)]
pub struct KdTree<T> {
    dim: usize,
    coords: Vec<f64>,
    items: Vec<T>,
    nodes: Vec<Node>,
}

impl<T: Copy> KdTree<T> {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0);
        KdTree {
            dim,
            coords: Vec::new(),
            items: Vec::new(),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn clear(&mut self) {
        self.coords.clear();
        self.items.clear();
        self.nodes.clear();
    }

    fn point(&self, i: u32) -> &[f64] {
        let s = i as usize * self.dim;
        &self.coords[s..s + self.dim]
    }

    /// A tree over `points` with median splits. Later insertions append
    /// below the existing leaves.
    pub fn balanced<'a, I>(dim: usize, points: I) -> Self
    where
        I: IntoIterator<Item = (&'a [f64], T)>,
    {
        let mut coords = Vec::new();
        let mut items = Vec::new();
        for (p, item) in points {
            assert_eq!(p.len(), dim);
            coords.extend_from_slice(p);
            items.push(item);
        }
        let mut order: Vec<u32> = (0..items.len() as u32).collect();
        let mut tree = KdTree::new(dim);
        tree.coords.reserve(coords.len());
        tree.items.reserve(items.len());
        tree.nodes.reserve(items.len());
        tree.build(&coords, &items, &mut order, 0);
        tree
    }

    fn build(&mut self, coords: &[f64], items: &[T], order: &mut [u32], depth: usize) -> u32 {
        if order.is_empty() {
            return NIL;
        }
        let axis = depth % self.dim;
        let dim = self.dim;
        let key = |i: &u32| coords[*i as usize * dim + axis];
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        // equal keys must go right, as in `insert`
        let split = key(&order[mid]);
        let mut m = mid;
        if order[..mid].iter().any(|i| key(i) == split) {
            order[..=mid].sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
            m = order[..=mid].partition_point(|i| key(i) < split);
        }
        let pivot = order[m] as usize;
        let idx = self.items.len() as u32;
        self.coords.extend_from_slice(&coords[pivot * dim..(pivot + 1) * dim]);
        self.items.push(items[pivot]);
        self.nodes.push(Node { left: NIL, right: NIL });
        let (left, rest) = order.split_at_mut(m);
        let right = &mut rest[1..];
        let l = self.build(coords, items, left, depth + 1);
        let r = self.build(coords, items, right, depth + 1);
        self.nodes[idx as usize] = Node { left: l, right: r };
        idx
    }

    pub fn insert(&mut self, point: &[f64], item: T) {
        assert_eq!(point.len(), self.dim);
        let idx = self.items.len() as u32;
        self.coords.extend_from_slice(point);
        self.items.push(item);
        self.nodes.push(Node {
            left: NIL,
            right: NIL,
        });
        if idx == 0 {
            return;
        }
        let mut cur = 0u32;
        let mut depth = 0usize;
        loop {
            let axis = depth % self.dim;
            let go_left = point[axis] < self.point(cur)[axis];
            let node = &mut self.nodes[cur as usize];
            let next = if go_left { &mut node.left } else { &mut node.right };
            if *next == NIL {
                *next = idx;
                return;
            }
            cur = *next;
            depth += 1;
        }
    }

    /// Calls `f` for every item with `‖p − query‖² ≤ radius_squared`.
    pub fn for_each_within<F: FnMut(T, &[f64])>(&self, query: &[f64], radius_squared: f64, mut f: F) {
        if self.items.is_empty() {
            return;
        }
        let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
        while let Some((i, depth)) = stack.pop() {
            let p = self.point(i);
            if distance_squared(p, query) <= radius_squared {
                f(self.items[i as usize], p);
            }
            let axis = depth % self.dim;
            let diff = query[axis] - p[axis];
            let node = self.nodes[i as usize];
            let (near, far) = if diff < 0.0 {
                (node.left, node.right)
            } else {
                (node.right, node.left)
            };
            if near != NIL {
                stack.push((near, depth + 1));
            }
            if far != NIL && diff * diff <= radius_squared {
                stack.push((far, depth + 1));
            }
        }
    }

    pub fn within_radius(&self, query: &[f64], radius: f64) -> Vec<T> {
        let mut out = Vec::new();
        self.for_each_within(query, radius * radius, |t, _| out.push(t));
        out
    }

    /// Closest item and its squared distance. Ties keep the first found.
    pub fn nearest(&self, query: &[f64]) -> Option<(T, f64)> {
        if self.items.is_empty() {
            return None;
        }
        let mut best = (NIL, f64::INFINITY);
        self.nearest_rec(0, 0, query, &mut best);
        Some((self.items[best.0 as usize], best.1))
    }

    fn nearest_rec(&self, i: u32, depth: usize, query: &[f64], best: &mut (u32, f64)) {
        let p = self.point(i);
        let d = distance_squared(p, query);
        if d < best.1 {
            *best = (i, d);
        }
        let axis = depth % self.dim;
        let diff = query[axis] - p[axis];
        let node = self.nodes[i as usize];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if near != NIL {
            self.nearest_rec(near, depth + 1, query, best);
        }
        if far != NIL && diff * diff < best.1 {
            self.nearest_rec(far, depth + 1, query, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect()
    }

    #[test]
    fn radius_query_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..1000 {
            let dim = 1 + trial % 5;
            let n = rng.random_range(0..60);
            let pts = random_points(&mut rng, n, dim);
            let mut tree = KdTree::new(dim);
            for (i, p) in pts.iter().enumerate() {
                tree.insert(p, i);
            }
            let q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let r = rng.random::<f64>() * 0.7;
            let mut got = tree.within_radius(&q, r);
            got.sort_unstable();
            let want: Vec<usize> = (0..n)
                .filter(|&i| distance_squared(&pts[i], &q) <= r * r)
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let dim = rng.random_range(1..6);
            let n = rng.random_range(1..80);
            let pts = random_points(&mut rng, n, dim);
            let mut tree = KdTree::new(dim);
            for (i, p) in pts.iter().enumerate() {
                tree.insert(p, i);
            }
            let q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let (_, d) = tree.nearest(&q).unwrap();
            let want = pts
                .iter()
                .map(|p| distance_squared(p, &q))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(d, want);
        }
    }

    #[test]
    fn balanced_build_then_insert_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..300 {
            let dim = 1 + trial % 4;
            let n = rng.random_range(0..120);
            // coarse grid coordinates force many equal split keys
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| (rng.random::<f64>() * 4.0).floor() / 4.0).collect())
                .collect();
            let split = n / 2;
            let mut tree = KdTree::balanced(dim, pts[..split].iter().enumerate().map(|(i, p)| (p.as_slice(), i)));
            for (i, p) in pts.iter().enumerate().skip(split) {
                tree.insert(p, i);
            }
            assert_eq!(tree.len(), n);
            for _ in 0..5 {
                let q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
                let r = rng.random::<f64>() * 0.6;
                let mut got = tree.within_radius(&q, r);
                got.sort_unstable();
                let want: Vec<usize> = (0..n)
                    .filter(|&i| distance_squared(&pts[i], &q) <= r * r)
                    .collect();
                assert_eq!(got, want);
                if n > 0 {
                    let (_, d) = tree.nearest(&q).unwrap();
                    let best = pts.iter().map(|p| distance_squared(p, &q)).fold(f64::INFINITY, f64::min);
                    assert_eq!(d, best);
                }
            }
        }
    }

    #[test]
    fn empty_tree() {
        let tree: KdTree<u32> = KdTree::new(3);
        assert!(tree.nearest(&[0.0; 3]).is_none());
        assert!(tree.within_radius(&[0.0; 3], 10.0).is_empty());
    }
}
