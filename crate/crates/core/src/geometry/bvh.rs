//! Bounding-volume hierarchy over triangles: nearest-point and ray queries.

use super::{add, cross, dot, scale, sub, Aabb, P3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    bbox: Aabb,
    /// Leaf: `start..start+count` into `order`; inner: `left` child index, right is `left + 1`.
    start: usize,
    count: usize,
    left: usize,
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

/// Closest point on triangle `abc` to `p`.
pub fn closest_point_triangle(p: &P3, a: &P3, b: &P3, c: &P3) -> P3 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return add(a, &scale(&ab, v));
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return add(a, &scale(&ac, w));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return add(b, &scale(&sub(c, b), w));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    add(a, &add(&scale(&ab, v), &scale(&ac, w)))
}

/// Ray/triangle intersection parameter `t > 0`, if any.
fn ray_triangle(o: &P3, d: &P3, a: &P3, b: &P3, c: &P3) -> Option<f64> {
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let pv = cross(d, &e2);
    let det = dot(&e1, &pv);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = sub(o, a);
    let u = dot(&tv, &pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = cross(&tv, &e1);
    let v = dot(d, &qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = dot(&e2, &qv) * inv;
    (t > 0.0).then_some(t)
}

fn ray_hits_box(o: &P3, inv_d: &P3, b: &Aabb) -> bool {
    let mut t0: f64 = 0.0;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        let a = (b.min[k] - o[k]) * inv_d[k];
        let c = (b.max[k] - o[k]) * inv_d[k];
        let (lo, hi) = if a < c { (a, c) } else { (c, a) };
        t0 = t0.max(lo);
        t1 = t1.min(hi);
        if t0 > t1 {
            return false;
        }
    }
    true
}

impl Bvh {
    pub fn build(vertices: &[P3], triangles: &[[usize; 3]]) -> Self {
        let n = triangles.len();
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                let mut b = Aabb::empty();
                for &v in t {
                    b.grow(&vertices[v]);
                }
                b
            })
            .collect();
        let centers: Vec<P3> = boxes.iter().map(|b| b.center()).collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            order: (0..n).collect(),
        };
        bvh.nodes.push(Node {
            bbox: Aabb::empty(),
            start: 0,
            count: n,
            left: 0,
        });
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let (start, count) = (bvh.nodes[ni].start, bvh.nodes[ni].count);
            let mut bb = Aabb::empty();
            let mut cb = Aabb::empty();
            for &t in &bvh.order[start..start + count] {
                bb.merge(&boxes[t]);
                cb.grow(&centers[t]);
            }
            bvh.nodes[ni].bbox = bb;
            if count <= LEAF_SIZE {
                continue;
            }
            let ext = cb.extent();
            let axis = if ext[0] >= ext[1] && ext[0] >= ext[2] {
                0
            } else if ext[1] >= ext[2] {
                1
            } else {
                2
            };
            let slice = &mut bvh.order[start..start + count];
            slice.sort_by(|&a, &b| {
                centers[a][axis]
                    .total_cmp(&centers[b][axis])
                    .then(a.cmp(&b))
            });
            let half = count / 2;
            let left = bvh.nodes.len();
            bvh.nodes.push(Node {
                bbox: Aabb::empty(),
                start,
                count: half,
                left: 0,
            });
            bvh.nodes.push(Node {
                bbox: Aabb::empty(),
                start: start + half,
                count: count - half,
                left: 0,
            });
            bvh.nodes[ni].left = left;
            bvh.nodes[ni].count = 0;
            stack.push(left);
            stack.push(left + 1);
        }
        bvh
    }

    /// Nearest triangle to `p`: `(distance, triangle index, closest point)`.
    /// Ties resolve to the lowest triangle index.
    pub fn nearest(&self, vertices: &[P3], triangles: &[[usize; 3]], p: &P3) -> (f64, usize, P3) {
        let mut best = (f64::INFINITY, usize::MAX, *p);
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bbox.dist2(p) > best.0 {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start..node.start + node.count] {
                    let tri = &triangles[t];
                    let q = closest_point_triangle(p, &vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
                    let d = sub(p, &q);
                    let d2 = dot(&d, &d);
                    if d2 < best.0 || (d2 == best.0 && t < best.1) {
                        best = (d2, t, q);
                    }
                }
            } else {
                let (l, r) = (node.left, node.left + 1);
                let dl = self.nodes[l].bbox.dist2(p);
                let dr = self.nodes[r].bbox.dist2(p);
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        (best.0.sqrt(), best.1, best.2)
    }

    /// Number of triangles crossed by the ray `o + t d`, `t > 0`.
    pub fn ray_crossings(&self, vertices: &[P3], triangles: &[[usize; 3]], o: &P3, d: &P3) -> usize {
        let inv_d = [1.0 / d[0], 1.0 / d[1], 1.0 / d[2]];
        let mut hits = 0;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !ray_hits_box(o, &inv_d, &node.bbox) {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start..node.start + node.count] {
                    let tri = &triangles[t];
                    if ray_triangle(o, d, &vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]).is_some() {
                        hits += 1;
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        hits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closest_point_regions() {
        let a = [0.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        let q = closest_point_triangle(&[0.2, 0.2, 1.0], &a, &b, &c);
        assert!((q[0] - 0.2).abs() < 1e-15 && (q[1] - 0.2).abs() < 1e-15 && q[2] == 0.0);
        assert_eq!(closest_point_triangle(&[-1.0, -1.0, 0.0], &a, &b, &c), a);
        assert_eq!(closest_point_triangle(&[2.0, -0.5, 0.0], &a, &b, &c), b);
        let q = closest_point_triangle(&[1.0, 1.0, 0.0], &a, &b, &c);
        assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let verts: Vec<P3> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.sin() * 2.0, (t * 1.3).cos(), (t * 0.7).sin()]
            })
            .collect();
        let tris: Vec<[usize; 3]> = (0..38).map(|i| [i, i + 1, (i + 2) % 40]).collect();
        let bvh = Bvh::build(&verts, &tris);
        for k in 0..20 {
            let p = [k as f64 * 0.1 - 1.0, 0.3, -0.2 + 0.05 * k as f64];
            let (d, _, _) = bvh.nearest(&verts, &tris, &p);
            let brute = tris
                .iter()
                .map(|t| {
                    let q = closest_point_triangle(&p, &verts[t[0]], &verts[t[1]], &verts[t[2]]);
                    super::super::dist(&p, &q)
                })
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-14);
        }
    }
}
