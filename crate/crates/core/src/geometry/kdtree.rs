//! Static 3-d tree for exact nearest-neighbour queries.

use super::P3;

#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<P3>,
    /// Implicit balanced tree: `perm[lo..hi]` with the median at the midpoint.
    perm: Vec<usize>,
    axes: Vec<u8>,
}

impl KdTree {
    pub fn build(points: Vec<P3>) -> Self {
        let n = points.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut axes = vec![0u8; n];
        let mut stack = vec![(0usize, n)];
        while let Some((lo, hi)) = stack.pop() {
            if hi <= lo {
                continue;
            }
            let mut mn = [f64::INFINITY; 3];
            let mut mx = [f64::NEG_INFINITY; 3];
            for &i in &perm[lo..hi] {
                for k in 0..3 {
                    mn[k] = mn[k].min(points[i][k]);
                    mx[k] = mx[k].max(points[i][k]);
                }
            }
            let axis = (0..3)
                .max_by(|&a, &b| (mx[a] - mn[a]).total_cmp(&(mx[b] - mn[b])))
                .unwrap_or(0);
            let mid = (lo + hi) / 2;
            perm[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
            });
            axes[mid] = axis as u8;
            stack.push((lo, mid));
            stack.push((mid + 1, hi));
        }
        Self { points, perm, axes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &P3 {
        &self.points[i]
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest(&self, q: &P3) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.search(0, self.points.len(), q, &mut best);
        Some(best.1)
    }

    fn search(&self, lo: usize, hi: usize, q: &P3, best: &mut (f64, usize)) {
        if hi <= lo {
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.perm[mid];
        let p = &self.points[i];
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
        if d2 < best.0 || (d2 == best.0 && i < best.1) {
            *best = (d2, i);
        }
        let axis = self.axes[mid] as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, q, best);
        if diff * diff <= best.0 {
            self.search(far.0, far.1, q, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut pts: Vec<P3> = (0..500).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        pts.push(pts[10]);
        let tree = KdTree::build(pts.clone());
        for _ in 0..200 {
            let q: P3 = [rng.random(), rng.random(), rng.random()];
            let brute = (0..pts.len())
                .min_by(|&a, &b| {
                    let da = super::super::dist(&pts[a], &q);
                    let db = super::super::dist(&pts[b], &q);
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .unwrap();
            assert_eq!(tree.nearest(&q), Some(brute));
        }
        assert_eq!(tree.nearest(&pts[10]), Some(10));
    }
}
