//! Closed triangle meshes: construction, validation, queries and OFF I/O.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bvh::Bvh;
use super::{cross, dist, dot, norm, scale, sub, Aabb, Domain, P3};
use crate::error::{Error, Result};

/// Triangulated closed surface with outward normals.
#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    vertices: Vec<P3>,
    triangles: Vec<[usize; 3]>,
    groups: Vec<u32>,
    centroids: Vec<P3>,
    areas: Vec<f64>,
    normals: Vec<P3>,
    edge_means: Vec<f64>,
    signed_volume: f64,
    bvh: Bvh,
}

/// Result of a nearest-boundary query.
#[derive(Clone, Copy, Debug)]
pub struct Nearest {
    pub distance: f64,
    pub triangle: usize,
    pub point: P3,
}

impl BoundaryMesh {
    /// Validates closure and orientation; a globally inward mesh is flipped.
    pub fn new(vertices: Vec<P3>, triangles: Vec<[usize; 3]>, groups: Option<Vec<u32>>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let groups = groups.unwrap_or_else(|| vec![0; triangles.len()]);
        if groups.len() != triangles.len() {
            return Err(Error::InvalidMesh("group list length differs from triangle count".into()));
        }
        for t in &triangles {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t:?} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("degenerate triangle {t:?}")));
            }
        }
        let mut edges: HashMap<(usize, usize), i32> = HashMap::with_capacity(3 * triangles.len());
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0) += if a < b { 1 } else { 1 << 8 };
            }
        }
        if let Some((e, c)) = edges.iter().find(|(_, &c)| c != 1 + (1 << 8)) {
            return Err(Error::InvalidMesh(format!(
                "edge {e:?} is not shared by exactly two consistently oriented triangles (code {c})"
            )));
        }

        let mut mesh = Self {
            vertices,
            triangles,
            groups,
            centroids: Vec::new(),
            areas: Vec::new(),
            normals: Vec::new(),
            edge_means: Vec::new(),
            signed_volume: 0.0,
            bvh: Bvh::build(&[], &[]),
        };
        mesh.compute_geometry()?;
        if mesh.signed_volume < 0.0 {
            for t in mesh.triangles.iter_mut() {
                t.swap(1, 2);
            }
            mesh.compute_geometry()?;
        }
        mesh.bvh = Bvh::build(&mesh.vertices, &mesh.triangles);
        Ok(mesh)
    }

    fn compute_geometry(&mut self) -> Result<()> {
        let n = self.triangles.len();
        self.centroids = Vec::with_capacity(n);
        self.areas = Vec::with_capacity(n);
        self.normals = Vec::with_capacity(n);
        self.edge_means = Vec::with_capacity(n);
        let mut vol = 0.0;
        for t in &self.triangles {
            let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            let cr = cross(&sub(&b, &a), &sub(&c, &a));
            let twice = norm(&cr);
            if twice <= 0.0 {
                return Err(Error::InvalidMesh(format!("zero-area triangle {t:?}")));
            }
            self.areas.push(0.5 * twice);
            self.normals.push(scale(&cr, 1.0 / twice));
            self.centroids.push([
                (a[0] + b[0] + c[0]) / 3.0,
                (a[1] + b[1] + c[1]) / 3.0,
                (a[2] + b[2] + c[2]) / 3.0,
            ]);
            self.edge_means.push((dist(&a, &b) + dist(&b, &c) + dist(&c, &a)) / 3.0);
            vol += dot(&a, &cross(&b, &c)) / 6.0;
        }
        self.signed_volume = vol;
        Ok(())
    }

    pub fn vertices(&self) -> &[P3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn groups(&self) -> &[u32] {
        &self.groups
    }

    pub fn centroids(&self) -> &[P3] {
        &self.centroids
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn normals(&self) -> &[P3] {
        &self.normals
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [P3; 3] {
        let tri = &self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Enclosed volume; positive for an outward-oriented mesh.
    pub fn signed_volume(&self) -> f64 {
        self.signed_volume
    }

    /// `|Σ area·n| / total area`; zero for a closed surface.
    pub fn closure_residual(&self) -> f64 {
        let mut s = [0.0; 3];
        for (a, n) in self.areas.iter().zip(&self.normals) {
            for k in 0..3 {
                s[k] += a * n[k];
            }
        }
        norm(&s) / self.total_area()
    }

    /// Mean edge length of triangle `t`.
    pub fn edge_mean(&self, t: usize) -> f64 {
        self.edge_means[t]
    }

    pub fn min_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                (0..3).map(move |k| (t[k], t[(k + 1) % 3]))
            })
            .map(|(a, b)| dist(&self.vertices[a], &self.vertices[b]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn mean_edge(&self) -> f64 {
        self.edge_means.iter().sum::<f64>() / self.edge_means.len() as f64
    }

    pub fn nearest(&self, p: &P3) -> Nearest {
        let (distance, triangle, point) = self.bvh.nearest(&self.vertices, &self.triangles, p);
        Nearest {
            distance,
            triangle,
            point,
        }
    }

    /// Mean edge of the triangle nearest to `p`.
    pub fn local_spacing(&self, p: &P3) -> f64 {
        self.edge_means[self.nearest(p).triangle]
    }

    /// Ray-parity inside test, majority over three generic directions.
    pub fn contains_point(&self, p: &P3) -> bool {
        const DIRS: [P3; 3] = [
            [0.577_215_664_9, 0.316_227_766_0, 0.752_441_1],
            [-0.412_310_562_5, 0.707_106_781_1, -0.574_456_264_6],
            [0.223_606_797_7, -0.871_779_788_7, 0.435_889_894_3],
        ];
        let votes = DIRS
            .iter()
            .filter(|d| self.bvh.ray_crossings(&self.vertices, &self.triangles, p, d) % 2 == 1)
            .count();
        votes >= 2
    }

    pub fn bounding_box(&self) -> Aabb {
        let mut b = Aabb::empty();
        for v in &self.vertices {
            b.grow(v);
        }
        b
    }

    /// Triangles of face group `g`.
    pub fn group_triangles(&self, g: u32) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&t| self.groups[t] == g).collect()
    }

    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF\n{} {} 0", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn from_off(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split_whitespace());
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("OFF: unexpected end while reading {what}")))
        };
        if next("header")? != "OFF" {
            return Err(Error::Parse("OFF: missing header".into()));
        }
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("OFF: {e}")));
        let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("OFF: {e}")));
        let nv = parse_usize(next("counts")?)?;
        let nf = parse_usize(next("counts")?)?;
        let _ne = next("counts")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([
                parse_f64(next("vertex")?)?,
                parse_f64(next("vertex")?)?,
                parse_f64(next("vertex")?)?,
            ]);
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            if parse_usize(next("face")?)? != 3 {
                return Err(Error::Parse("OFF: only triangular faces are supported".into()));
            }
            triangles.push([
                parse_usize(next("face")?)?,
                parse_usize(next("face")?)?,
                parse_usize(next("face")?)?,
            ]);
        }
        Self::new(vertices, triangles, None)
    }
}

impl Domain for BoundaryMesh {
    fn contains(&self, x: &P3) -> bool {
        self.contains_point(x)
    }

    fn boundary_distance(&self, x: &P3) -> f64 {
        self.nearest(x).distance
    }

    fn bbox(&self) -> Aabb {
        self.bounding_box()
    }
}

/// Icosahedron refined `level` times and projected to the sphere: `20·4^level` triangles.
pub fn icosphere(center: P3, radius: f64, level: u32) -> Result<BoundaryMesh> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<P3> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for v in verts.iter_mut() {
        *v = scale(v, 1.0 / norm(v));
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<P3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = scale(&super::add(&verts[a], &verts[b]), 0.5);
                verts.push(scale(&m, 1.0 / norm(&m)));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let verts = verts
        .into_iter()
        .map(|v| super::add(&center, &scale(&v, radius)))
        .collect();
    BoundaryMesh::new(verts, faces, None)
}

type P2 = [f64; 2];

/// Replacement points `(p1, peak, p2)` of segment `ab`, bump on the right of travel.
fn koch_split(a: P2, b: P2) -> (P2, P2, P2) {
    let d = [b[0] - a[0], b[1] - a[1]];
    let p1 = [a[0] + d[0] / 3.0, a[1] + d[1] / 3.0];
    let p2 = [a[0] + 2.0 * d[0] / 3.0, a[1] + 2.0 * d[1] / 3.0];
    let h = 3f64.sqrt() / 6.0;
    let peak = [a[0] + 0.5 * d[0] + h * d[1], a[1] + 0.5 * d[1] - h * d[0]];
    (p1, peak, p2)
}

/// Koch curve from `a` (included) to `b` (excluded).
fn koch_curve(a: P2, b: P2, level: u32, out: &mut Vec<P2>) {
    if level == 0 {
        out.push(a);
        return;
    }
    let (p1, peak, p2) = koch_split(a, b);
    koch_curve(a, p1, level - 1, out);
    koch_curve(p1, peak, level - 1, out);
    koch_curve(peak, p2, level - 1, out);
    koch_curve(p2, b, level - 1, out);
}

/// Curve vertices lying on the straight segment `ab` once it is refined `level` times.
fn straight_points(a: P2, b: P2, level: u32, out: &mut Vec<P2>) {
    if level == 0 {
        out.push(a);
        return;
    }
    let (p1, _, p2) = koch_split(a, b);
    straight_points(a, p1, level - 1, out);
    out.push(p1);
    straight_points(p2, b, level - 1, out);
}

/// Convex regions (the square and every bump triangle) tiling the Koch island.
fn koch_regions(a: P2, b: P2, level: u32, out: &mut Vec<Vec<P2>>) {
    if level == 0 {
        return;
    }
    let (p1, peak, p2) = koch_split(a, b);
    let mut poly = Vec::new();
    straight_points(p1, peak, level - 1, &mut poly);
    straight_points(peak, p2, level - 1, &mut poly);
    poly.push(p2);
    out.push(poly);
    koch_regions(a, p1, level - 1, out);
    koch_regions(p1, peak, level - 1, out);
    koch_regions(peak, p2, level - 1, out);
    koch_regions(p2, b, level - 1, out);
}

const SQUARE: [P2; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

/// Boundary polygon (counter-clockwise) of the Koch island of the given level:
/// the unit square with a triadic Koch curve bulging outward on every side.
pub fn koch_island(level: u32) -> Vec<P2> {
    let mut out = Vec::new();
    for k in 0..4 {
        koch_curve(SQUARE[k], SQUARE[(k + 1) % 4], level, &mut out);
    }
    out
}

fn key2(p: &P2) -> (i64, i64) {
    ((p[0] * 1e10).round() as i64, (p[1] * 1e10).round() as i64)
}

/// Koch island extruded to height `height`; walls are group 0, caps group 1.
/// Each wall quad is split into `rows` stacked pairs of triangles.
pub fn koch_extrusion(level: u32, height: f64, rows: usize) -> Result<BoundaryMesh> {
    let rows = rows.max(1);
    let boundary = koch_island(level);
    let nb = boundary.len();
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    for (i, p) in boundary.iter().enumerate() {
        index.insert(key2(p), i);
    }

    let mut regions = Vec::new();
    let mut square = Vec::new();
    for k in 0..4 {
        straight_points(SQUARE[k], SQUARE[(k + 1) % 4], level, &mut square);
    }
    regions.push(square);
    for k in 0..4 {
        koch_regions(SQUARE[k], SQUARE[(k + 1) % 4], level, &mut regions);
    }

    // Planar cap triangulation: fan each convex region from its centroid.
    let mut steiner: Vec<P2> = Vec::new();
    let mut cap: Vec<[usize; 3]> = Vec::new();
    for poly in &regions {
        let mut ids = Vec::with_capacity(poly.len());
        for p in poly {
            let id = *index
                .get(&key2(p))
                .ok_or_else(|| Error::InvalidMesh("region vertex off the island boundary".into()))?;
            ids.push(id);
        }
        let area2: f64 = (0..poly.len())
            .map(|i| {
                let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        if area2 < 0.0 {
            ids.reverse();
        }
        let n = poly.len() as f64;
        let c = [
            poly.iter().map(|p| p[0]).sum::<f64>() / n,
            poly.iter().map(|p| p[1]).sum::<f64>() / n,
        ];
        let cid = nb + steiner.len();
        steiner.push(c);
        for i in 0..ids.len() {
            cap.push([cid, ids[i], ids[(i + 1) % ids.len()]]);
        }
    }

    // Vertex layout: boundary layers 0..=rows, then Steiner points bottom and top.
    let mut verts: Vec<P3> = Vec::with_capacity(nb * (rows + 1) + 2 * steiner.len());
    for r in 0..=rows {
        let z = height * r as f64 / rows as f64;
        verts.extend(boundary.iter().map(|p| [p[0], p[1], z]));
    }
    let sb = verts.len();
    verts.extend(steiner.iter().map(|p| [p[0], p[1], 0.0]));
    let st = verts.len();
    verts.extend(steiner.iter().map(|p| [p[0], p[1], height]));

    let remap = |id: usize, top: bool| -> usize {
        if id < nb {
            if top {
                rows * nb + id
            } else {
                id
            }
        } else if top {
            st + id - nb
        } else {
            sb + id - nb
        }
    };

    let mut tris = Vec::with_capacity(2 * nb * rows + 2 * cap.len());
    let mut groups = Vec::with_capacity(tris.capacity());
    for r in 0..rows {
        for i in 0..nb {
            let j = (i + 1) % nb;
            let (b0, b1) = (r * nb + i, r * nb + j);
            let (t0, t1) = ((r + 1) * nb + i, (r + 1) * nb + j);
            tris.push([b0, b1, t1]);
            tris.push([b0, t1, t0]);
            groups.extend([0, 0]);
        }
    }
    for t in &cap {
        tris.push([remap(t[0], true), remap(t[1], true), remap(t[2], true)]);
        tris.push([remap(t[0], false), remap(t[2], false), remap(t[1], false)]);
        groups.extend([1, 1]);
    }
    BoundaryMesh::new(verts, tris, Some(groups))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryFamily {
    UnitBall,
    KochExtrusion,
}

/// Geometry family plus prefractal level and summability exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalDescriptor {
    pub family: GeometryFamily,
    #[serde(default)]
    pub level: u32,
    #[serde(default)]
    pub box_dimension: Option<f64>,
    pub d: f64,
}

impl FractalDescriptor {
    pub fn unit_ball() -> Self {
        Self {
            family: GeometryFamily::UnitBall,
            level: 0,
            box_dimension: Some(2.0),
            d: 2.0,
        }
    }

    pub fn koch_extrusion(level: u32, d: f64) -> Self {
        Self {
            family: GeometryFamily::KochExtrusion,
            level,
            box_dimension: Some(1.0 + 4f64.ln() / 3f64.ln()),
            d,
        }
    }

    /// Checks `m - 1 < d < m` for `m = 3`.
    pub fn validate_fractal(&self) -> Result<()> {
        if !(self.d > 2.0 && self.d < 3.0) {
            return Err(Error::Invalid(format!(
                "summability exponent d = {} must lie in (2, 3)",
                self.d
            )));
        }
        Ok(())
    }
}

/// Height of the Koch extrusion built from a descriptor.
pub const KOCH_HEIGHT: f64 = 2.0;

/// Mesh for a descriptor. `resolution` is the sphere refinement level, or the
/// number of wall rows for the Koch extrusion.
pub fn build_boundary_mesh(desc: &FractalDescriptor, resolution: u32) -> Result<BoundaryMesh> {
    match desc.family {
        GeometryFamily::UnitBall => icosphere([0.0; 3], 1.0, resolution),
        GeometryFamily::KochExtrusion => koch_extrusion(desc.level, KOCH_HEIGHT, resolution.max(1) as usize),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_area_and_closure() {
        let m = icosphere([0.0; 3], 1.0, 4).unwrap();
        assert_eq!(m.num_triangles(), 5120);
        assert!((m.total_area() - 4.0 * PI).abs() / (4.0 * PI) < 5e-3);
        assert!(m.closure_residual() < 1e-8);
        assert!(m.signed_volume() > 0.0);
        assert!(m.contains_point(&[0.1, 0.2, 0.3]));
        assert!(!m.contains_point(&[1.1, 0.2, 0.3]));
        for (c, n) in m.centroids().iter().zip(m.normals()) {
            assert!(dot(c, n) > 0.0);
        }
    }

    #[test]
    fn koch_level_zero_is_a_box() {
        let m = koch_extrusion(0, 1.0, 1).unwrap();
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
        assert!((m.total_area() - 6.0).abs() < 1e-12);
        let b = m.bounding_box();
        assert_eq!(b.min, [0.0; 3]);
        assert_eq!(b.max, [1.0; 3]);
    }

    #[test]
    fn koch_growth_and_area() {
        for level in 1..=3u32 {
            let m = koch_extrusion(level, 1.0, 1).unwrap();
            let walls = m.group_triangles(0).len();
            assert_eq!(walls, 2 * 4 * 4usize.pow(level));
            // Island area: 1 + 4 · Σ_k 4^{k-1} · (√3/36)(1/9)^{k-1}.
            let mut area = 1.0;
            for k in 1..=level {
                area += 4.0 * 4f64.powi(k as i32 - 1) * (3f64.sqrt() / 36.0) * (1.0 / 9f64).powi(k as i32 - 1);
            }
            assert!((m.signed_volume() - area).abs() < 1e-10, "level {level}");
            assert!(m.closure_residual() < 1e-10);
        }
    }

    #[test]
    fn off_round_trip() {
        let m = icosphere([0.0; 3], 1.0, 1).unwrap();
        let back = BoundaryMesh::from_off(&m.to_off()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
    }

    #[test]
    fn open_mesh_rejected() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(BoundaryMesh::new(v, vec![[0, 1, 2]], None).is_err());
    }
}
