//! Vertical prisms over simple polygons, with an exact boundary distance and a
//! column-wise count of Whitney cubes per depth.

use serde::Serialize;

use super::whitney::{d_sum_from_counts, DSumReport};
use super::{Aabb, Domain, P3};
use crate::error::{Error, Result};

pub type P2 = [f64; 2];

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug)]
struct Box2 {
    min: P2,
    max: P2,
}

impl Box2 {
    fn empty() -> Self {
        Self {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        }
    }

    fn grow(&mut self, p: &P2) {
        for k in 0..2 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    fn dist2(&self, p: &P2) -> f64 {
        let mut d = 0.0;
        for k in 0..2 {
            let v = (self.min[k] - p[k]).max(0.0).max(p[k] - self.max[k]);
            d += v * v;
        }
        d
    }
}

#[derive(Clone, Debug)]
struct Node {
    bbox: Box2,
    start: usize,
    count: usize,
    left: usize,
}

fn seg_dist2(p: &P2, a: &P2, b: &P2) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let w = [p[0] - a[0], p[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        ((w[0] * d[0] + w[1] * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let e = [w[0] - t * d[0], w[1] - t * d[1]];
    e[0] * e[0] + e[1] * e[1]
}

/// Closed polygon with a segment hierarchy for distance and parity queries.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<P2>,
    nodes: Vec<Node>,
    order: Vec<usize>,
    bbox: Box2,
}

impl Polygon {
    pub fn new(vertices: Vec<P2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidMesh("polygon needs at least three vertices".into()));
        }
        let n = vertices.len();
        let seg_box = |i: usize| {
            let mut b = Box2::empty();
            b.grow(&vertices[i]);
            b.grow(&vertices[(i + 1) % n]);
            b
        };
        let boxes: Vec<Box2> = (0..n).map(seg_box).collect();
        let centers: Vec<P2> = boxes
            .iter()
            .map(|b| [(b.min[0] + b.max[0]) / 2.0, (b.min[1] + b.max[1]) / 2.0])
            .collect();
        let mut nodes = vec![Node {
            bbox: Box2::empty(),
            start: 0,
            count: n,
            left: 0,
        }];
        let mut order: Vec<usize> = (0..n).collect();
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let (start, count) = (nodes[ni].start, nodes[ni].count);
            let mut bb = Box2::empty();
            let mut cb = Box2::empty();
            for &s in &order[start..start + count] {
                bb.grow(&boxes[s].min);
                bb.grow(&boxes[s].max);
                cb.grow(&centers[s]);
            }
            nodes[ni].bbox = bb;
            if count <= LEAF_SIZE {
                continue;
            }
            let axis = usize::from(cb.max[1] - cb.min[1] > cb.max[0] - cb.min[0]);
            order[start..start + count].sort_by(|&a, &b| centers[a][axis].total_cmp(&centers[b][axis]).then(a.cmp(&b)));
            let half = count / 2;
            let left = nodes.len();
            nodes.push(Node {
                bbox: Box2::empty(),
                start,
                count: half,
                left: 0,
            });
            nodes.push(Node {
                bbox: Box2::empty(),
                start: start + half,
                count: count - half,
                left: 0,
            });
            nodes[ni].left = left;
            nodes[ni].count = 0;
            stack.push(left);
            stack.push(left + 1);
        }
        let bbox = nodes[0].bbox;
        Ok(Self {
            vertices,
            nodes,
            order,
            bbox,
        })
    }

    pub fn vertices(&self) -> &[P2] {
        &self.vertices
    }

    fn segment(&self, i: usize) -> (&P2, &P2) {
        (&self.vertices[i], &self.vertices[(i + 1) % self.vertices.len()])
    }

    /// Distance from `p` to the polygon boundary.
    pub fn distance(&self, p: &P2) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bbox.dist2(p) >= best {
                continue;
            }
            if node.count > 0 {
                for &s in &self.order[node.start..node.start + node.count] {
                    let (a, b) = self.segment(s);
                    best = best.min(seg_dist2(p, a, b));
                }
            } else {
                let (l, r) = (node.left, node.left + 1);
                if self.nodes[l].bbox.dist2(p) <= self.nodes[r].bbox.dist2(p) {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best.sqrt()
    }

    /// Even-odd test with a ray in the `+x` direction.
    pub fn contains(&self, p: &P2) -> bool {
        let mut inside = false;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bbox.max[0] < p[0] || node.bbox.min[1] > p[1] || node.bbox.max[1] < p[1] {
                continue;
            }
            if node.count > 0 {
                for &s in &self.order[node.start..node.start + node.count] {
                    let (a, b) = self.segment(s);
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if x > p[0] {
                            inside = !inside;
                        }
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        inside
    }
}

/// The prism `P × (0, height)`.
#[derive(Clone, Debug)]
pub struct ExtrudedPolygon {
    pub polygon: Polygon,
    pub height: f64,
}

impl ExtrudedPolygon {
    pub fn new(vertices: Vec<P2>, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::Invalid(format!("prism height {height} must be positive")));
        }
        Ok(Self {
            polygon: Polygon::new(vertices)?,
            height,
        })
    }
}

impl Domain for ExtrudedPolygon {
    fn contains(&self, x: &P3) -> bool {
        x[2] > 0.0 && x[2] < self.height && self.polygon.contains(&[x[0], x[1]])
    }

    fn boundary_distance(&self, x: &P3) -> f64 {
        let p = [x[0], x[1]];
        let d2 = self.polygon.distance(&p);
        let z = x[2];
        if self.polygon.contains(&p) {
            if z > 0.0 && z < self.height {
                d2.min(z).min(self.height - z)
            } else {
                (-z).max(z - self.height)
            }
        } else {
            let dz = (-z).max(z - self.height).max(0.0);
            d2.hypot(dz)
        }
    }

    fn bbox(&self) -> Aabb {
        let b = self.polygon.bbox;
        Aabb {
            min: [b.min[0], b.min[1], 0.0],
            max: [b.max[0], b.max[1], self.height],
        }
    }
}

/// Whitney cube counts per depth `0..=max_depth`, with the same root cube and
/// acceptance rule as [`super::whitney_decompose`].
///
/// A cube `S × I` is accepted iff its column `S` is inside with planar distance
/// at least `1.5|Q|` and `I` keeps `1.5|Q|` from both caps, so the counts
/// reduce to a quadtree over columns near the polygon. Columns deep inside
/// contribute in closed form.
pub fn whitney_counts(prism: &ExtrudedPolygon, max_depth: u32) -> Result<(Vec<u64>, f64)> {
    if max_depth > 20 {
        return Err(Error::Invalid(format!("max_depth {max_depth} exceeds 20")));
    }
    let bb = prism.bbox();
    let ext = bb.extent();
    let side = ext[0].max(ext[1]).max(ext[2]) * 1.001;
    let c = bb.center();
    let root = [c[0] - side / 2.0, c[1] - side / 2.0, c[2] - side / 2.0];
    let depths = max_depth as usize + 1;
    let sides: Vec<f64> = (0..depths).map(|k| side / f64::from(1u32 << k)).collect();
    let diam: Vec<f64> = sides.iter().map(|s| s * 3f64.sqrt()).collect();

    // Accepted z-slots per depth, and those whose parent slot is also accepted.
    let mut slots: Vec<Vec<bool>> = Vec::with_capacity(depths);
    let mut n_slot = vec![0u64; depths];
    let mut n_both = vec![0u64; depths];
    for k in 0..depths {
        let s = sides[k];
        let t = ACCEPT * diam[k];
        let row: Vec<bool> = (0..1usize << k)
            .map(|l| {
                let z = root[2] + (l as f64 + 0.5) * s;
                z >= t && prism.height - z >= t
            })
            .collect();
        n_slot[k] = row.iter().filter(|&&a| a).count() as u64;
        if k > 0 {
            n_both[k] = row
                .iter()
                .enumerate()
                .filter(|(l, &a)| a && slots[k - 1][l >> 1])
                .count() as u64;
        }
        slots.push(row);
    }

    let mut counts = vec![0u64; depths];
    // (depth, i, j, inherited inside status, parent column accepted)
    let mut stack: Vec<(usize, u64, u64, Option<bool>, bool)> = vec![(0, 0, 0, None, false)];
    while let Some((k, i, j, status, parent_acc)) = stack.pop() {
        let s = sides[k];
        let p = [root[0] + (i as f64 + 0.5) * s, root[1] + (j as f64 + 0.5) * s];
        let d = prism.polygon.distance(&p);
        let inside = status.unwrap_or_else(|| prism.polygon.contains(&p));
        let r = s / 2f64.sqrt();
        let acc = inside && d >= ACCEPT * diam[k];
        if acc {
            counts[k] += n_slot[k] - if parent_acc { n_both[k] } else { 0 };
        }
        if !inside && d >= r {
            continue;
        }
        if acc && k + 1 < depths && d - r >= ACCEPT * diam[k + 1] {
            for (kk, count) in counts.iter_mut().enumerate().skip(k + 1) {
                *count += (1u64 << (2 * (kk - k))) * (n_slot[kk] - n_both[kk]);
            }
            continue;
        }
        if k + 1 == depths {
            continue;
        }
        let status = (d > r / 2.0).then_some(inside);
        for q in 0..4u64 {
            stack.push((k + 1, 2 * i + (q & 1), 2 * j + (q >> 1), status, acc));
        }
    }
    Ok((counts, side))
}

const ACCEPT: f64 = super::whitney::ACCEPT_RATIO;

/// Number of depths in the trend window.
pub const TREND_DEPTHS: u32 = 5;

#[derive(Clone, Debug, Serialize)]
pub struct DSumTrend {
    pub d: f64,
    /// Slope of `log2(increment)` against depth over `window`.
    pub slope: f64,
    pub flattens: bool,
    pub window: (u32, u32),
    pub report: DSumReport,
}

/// d-sum increment trend over the deepest [`TREND_DEPTHS`] depths whose cube side
/// is still at least `feature` (the smallest length the prism resolves).
pub fn d_sum_trend(prism: &ExtrudedPolygon, feature: f64, d: f64) -> Result<DSumTrend> {
    let ext = prism.bbox().extent();
    let side = ext[0].max(ext[1]).max(ext[2]) * 1.001;
    let deepest = (side / feature).log2().floor();
    if !(deepest >= f64::from(TREND_DEPTHS)) {
        return Err(Error::Invalid(format!("feature {feature} leaves fewer than {TREND_DEPTHS} depths")));
    }
    let deepest = deepest as u32;
    let (counts, side) = whitney_counts(prism, deepest)?;
    let report = d_sum_from_counts(&counts, side, d);
    let window = (deepest + 1 - TREND_DEPTHS, deepest);
    let slope = report
        .increment_slope(window.0, window.1)
        .ok_or_else(|| Error::Invalid("no Whitney cubes in the trend window".into()))?;
    Ok(DSumTrend {
        d,
        slope,
        flattens: slope < 0.0,
        window,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::koch_island;
    use crate::geometry::whitney_decompose;

    #[test]
    fn square_distance_and_parity() {
        let p = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(p.contains(&[0.3, 0.6]));
        assert!(!p.contains(&[1.3, 0.6]));
        assert!((p.distance(&[0.3, 0.6]) - 0.3).abs() < 1e-15);
        assert!((p.distance(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn koch_trend_separates_exponents() {
        let prism = ExtrudedPolygon::new(koch_island(7), 2.0).unwrap();
        let feature = 3f64.powi(-7);
        let above = d_sum_trend(&prism, feature, 2.4).unwrap();
        let below = d_sum_trend(&prism, feature, 2.1).unwrap();
        assert!(above.flattens && !below.flattens, "{} {}", above.slope, below.slope);
        // Whitney counts along a surface of dimension D grow like 2^{kD}.
        assert!((above.slope - below.slope + 0.3).abs() < 1e-9);
    }

    #[test]
    fn column_counts_match_direct_decomposition() {
        for level in [0u32, 2] {
            let prism = ExtrudedPolygon::new(koch_island(level), 2.0).unwrap();
            let direct = whitney_decompose(&prism, 6).unwrap().depth_counts();
            let (cols, _) = whitney_counts(&prism, 6).unwrap();
            let direct: Vec<u64> = direct.iter().map(|&c| c as u64).collect();
            assert_eq!(cols, direct, "level {level}");
        }
    }
}
