//! Surface quadrature on a boundary mesh and the Cauchy transforms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{from_c8, gauss_legendre, require_three, to_c8, Kernel, Kernel3};
use crate::clifford::{remap_to_frame, Multivector};
use crate::error::{Error, Result};
use crate::field::SmoothField;
use crate::geometry::{dist, mesh::BoundaryMesh, sub, P3};
use crate::kernels::KernelContext;

/// Triangles closer than this many diameters to the target are subdivided.
const NEAR_RATIO: f64 = 2.0;
const MAX_NEAR_DEPTH: u32 = 7;
/// Gauss–Legendre points per direction of the Duffy rule.
const DUFFY_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceRule {
    Centroid,
    /// Degree-2 rule with points at barycentric `(2/3, 1/6, 1/6)` and permutations.
    ThreePoint,
}

impl SurfaceRule {
    fn barycentrics(self) -> &'static [[f64; 3]] {
        const C: [[f64; 3]; 1] = [[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];
        const T: [[f64; 3]; 3] = [
            [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        ];
        match self {
            SurfaceRule::Centroid => &C,
            SurfaceRule::ThreePoint => &T,
        }
    }
}

fn bary_point(p: &[P3; 3], b: &[f64; 3]) -> P3 {
    [
        b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
        b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
        b[0] * p[0][2] + b[1] * p[1][2] + b[2] * p[2][2],
    ]
}

fn mid(a: &P3, b: &P3) -> P3 {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

fn tri_area(p: &[P3; 3]) -> f64 {
    let c = crate::geometry::cross(&sub(&p[1], &p[0]), &sub(&p[2], &p[0]));
    0.5 * crate::geometry::norm(&c)
}

/// Centroid, circumscribing radius about it, and longest edge.
fn tri_extent(p: &[P3; 3]) -> (P3, f64, f64) {
    let c = bary_point(p, &[1.0 / 3.0; 3]);
    let rad = p.iter().map(|v| dist(v, &c)).fold(0.0, f64::max);
    let h = dist(&p[0], &p[1]).max(dist(&p[1], &p[2])).max(dist(&p[2], &p[0]));
    (c, rad, h)
}

/// Density sampled at the base quadrature nodes and evaluable anywhere on a triangle.
pub trait SurfaceDensity: Sync {
    fn node(&self, i: usize) -> &Multivector;
    fn at(&self, triangle: usize, y: &P3) -> Multivector;
}

/// Density from a closure `(triangle, point) ↦ value`, cached at the base nodes.
pub struct NodalDensity<F> {
    values: Vec<Multivector>,
    f: F,
}

impl<F: Fn(usize, &P3) -> Multivector + Sync> NodalDensity<F> {
    pub fn new(q: &SurfaceQuadrature, f: F) -> Self {
        let values = q.nodes.iter().zip(&q.owner).map(|(y, &t)| f(t, y)).collect();
        Self { values, f }
    }
}

impl<F: Fn(usize, &P3) -> Multivector + Sync> SurfaceDensity for NodalDensity<F> {
    fn node(&self, i: usize) -> &Multivector {
        &self.values[i]
    }

    fn at(&self, triangle: usize, y: &P3) -> Multivector {
        (self.f)(triangle, y)
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceQuadrature {
    mesh: Arc<BoundaryMesh>,
    rule: SurfaceRule,
    nodes: Vec<P3>,
    weights: Vec<f64>,
    owner: Vec<usize>,
    extents: Vec<(P3, f64, f64)>,
    vertex_triangles: Vec<Vec<usize>>,
}

impl SurfaceQuadrature {
    pub fn new(mesh: Arc<BoundaryMesh>, rule: SurfaceRule) -> Self {
        let bs = rule.barycentrics();
        let nt = mesh.num_triangles();
        let mut nodes = Vec::with_capacity(nt * bs.len());
        let mut weights = Vec::with_capacity(nt * bs.len());
        let mut owner = Vec::with_capacity(nt * bs.len());
        let mut extents = Vec::with_capacity(nt);
        let mut vertex_triangles = vec![Vec::new(); mesh.vertices().len()];
        for t in 0..nt {
            let p = mesh.triangle_points(t);
            let w = mesh.areas()[t] / bs.len() as f64;
            for b in bs {
                nodes.push(bary_point(&p, b));
                weights.push(w);
                owner.push(t);
            }
            extents.push(tri_extent(&p));
            for &v in &mesh.triangles()[t] {
                vertex_triangles[v].push(t);
            }
        }
        Self {
            mesh,
            rule,
            nodes,
            weights,
            owner,
            extents,
            vertex_triangles,
        }
    }

    pub fn mesh(&self) -> &Arc<BoundaryMesh> {
        &self.mesh
    }

    pub fn rule(&self) -> SurfaceRule {
        self.rule
    }

    pub fn nodes(&self) -> &[P3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Triangle owning each node.
    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    fn per_triangle(&self) -> usize {
        self.rule.barycentrics().len()
    }

    /// Distance to `Γ` and the local spacing there.
    pub fn collar(&self, x: &P3) -> (f64, f64) {
        let near = self.mesh.nearest(x);
        (near.distance, self.mesh.edge_mean(near.triangle))
    }

    /// Rejects points within one local mesh spacing of `Γ`.
    pub fn check_off_boundary(&self, x: &P3) -> Result<()> {
        let (d, h) = self.collar(x);
        // Points placed exactly one spacing away are admitted.
        if d < h * (1.0 - 1e-9) {
            return Err(Error::TooCloseToBoundary { distance: d, collar: h });
        }
        Ok(())
    }

    /// `Σ_T ∫_T K(y - x) ρ(y) dS(y)`; triangles near `x` are subdivided.
    pub fn integrate<D: SurfaceDensity + ?Sized>(&self, ctx: &KernelContext, kernel: Kernel, density: &D, x: &P3) -> Multivector {
        self.integrate_skipping(ctx, kernel, density, x, &[])
    }

    fn integrate_skipping<D: SurfaceDensity + ?Sized>(
        &self,
        ctx: &KernelContext,
        kernel: Kernel,
        density: &D,
        x: &P3,
        skip: &[usize],
    ) -> Multivector {
        let fast = Kernel3::new(ctx).expect("three-dimensional context");
        let mut far = [0.0; 8];
        let mut near = Vec::new();
        let npt = self.per_triangle();
        for (t, (c, rad, h)) in self.extents.iter().enumerate() {
            if skip.contains(&t) {
                continue;
            }
            if dist(x, c) - rad < NEAR_RATIO * h {
                near.push(t);
                continue;
            }
            for i in t * npt..(t + 1) * npt {
                let k = fast.eval(kernel, &sub(&self.nodes[i], x));
                fast.gp_acc(&k, &to_c8(density.node(i)), self.weights[i], &mut far);
            }
        }
        let mut out = from_c8(&far);
        for t in near {
            let p = self.mesh.triangle_points(t);
            self.near_triangle(ctx, kernel, density, x, t, &p, 0, &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn near_triangle<D: SurfaceDensity + ?Sized>(
        &self,
        ctx: &KernelContext,
        kernel: Kernel,
        density: &D,
        x: &P3,
        t: usize,
        p: &[P3; 3],
        depth: u32,
        out: &mut Multivector,
    ) {
        let (c, rad, h) = tri_extent(p);
        if depth < MAX_NEAR_DEPTH && dist(x, &c) - rad < NEAR_RATIO * h {
            let (m01, m12, m20) = (mid(&p[0], &p[1]), mid(&p[1], &p[2]), mid(&p[2], &p[0]));
            for sub_tri in [[p[0], m01, m20], [m01, p[1], m12], [m20, m12, p[2]], [m01, m12, m20]] {
                self.near_triangle(ctx, kernel, density, x, t, &sub_tri, depth + 1, out);
            }
            return;
        }
        let w = tri_area(p) / 3.0;
        for b in SurfaceRule::ThreePoint.barycentrics() {
            let y = bary_point(p, b);
            let k = kernel.eval(ctx, &sub(&y, x));
            k.gp_acc(&density.at(t, &y), w, out);
        }
    }

    /// Weakly singular integral `∫_Γ K(y - v) ρ(y) dS` at mesh vertex `v`, with a
    /// Duffy rule on the triangles incident to `v`. Only the representation
    /// kernel (`O(1/|z|)`) is admitted.
    pub fn integrate_at_vertex<D: SurfaceDensity + ?Sized>(
        &self,
        ctx: &KernelContext,
        kernel: Kernel,
        density: &D,
        v: usize,
    ) -> Result<Multivector> {
        let x = self.mesh.vertices()[v];
        let pieces: Vec<(usize, [P3; 3])> = self.vertex_triangles[v]
            .iter()
            .map(|&t| {
                let tri = self.mesh.triangles()[t];
                let k = tri.iter().position(|&u| u == v).unwrap_or(0);
                let vs = self.mesh.vertices();
                (t, [vs[tri[k]], vs[tri[(k + 1) % 3]], vs[tri[(k + 2) % 3]]])
            })
            .collect();
        self.integrate_singular(ctx, kernel, density, &x, &pieces)
    }

    /// As [`SurfaceQuadrature::integrate_at_vertex`] for a point `x` on triangle `t`,
    /// which is split into three Duffy triangles with apex `x`.
    pub fn integrate_at_point<D: SurfaceDensity + ?Sized>(
        &self,
        ctx: &KernelContext,
        kernel: Kernel,
        density: &D,
        x: &P3,
        t: usize,
    ) -> Result<Multivector> {
        let p = self.mesh.triangle_points(t);
        let pieces: Vec<(usize, [P3; 3])> = (0..3)
            .map(|k| (t, [*x, p[k], p[(k + 1) % 3]]))
            .filter(|(_, q)| tri_area(q) > 1e-14 * self.mesh.areas()[t])
            .collect();
        self.integrate_singular(ctx, kernel, density, x, &pieces)
    }

    fn integrate_singular<D: SurfaceDensity + ?Sized>(
        &self,
        ctx: &KernelContext,
        kernel: Kernel,
        density: &D,
        x: &P3,
        pieces: &[(usize, [P3; 3])],
    ) -> Result<Multivector> {
        if kernel != Kernel::Repr {
            return Err(Error::Invalid("on-surface evaluation needs a weakly singular kernel".into()));
        }
        let mut skip: Vec<usize> = pieces.iter().map(|(t, _)| *t).collect();
        skip.dedup();
        let mut out = self.integrate_skipping(ctx, kernel, density, x, &skip);
        let (gx, gw) = gauss_legendre(DUFFY_POINTS);
        for (t, [a, b, c]) in pieces {
            let ab = sub(b, a);
            let bc = sub(c, b);
            let jac = 2.0 * tri_area(&[*a, *b, *c]);
            for (s, ws) in gx.iter().zip(&gw) {
                for (u, wu) in gx.iter().zip(&gw) {
                    let y = [
                        a[0] + s * (ab[0] + u * bc[0]),
                        a[1] + s * (ab[1] + u * bc[1]),
                        a[2] + s * (ab[2] + u * bc[2]),
                    ];
                    let kv = kernel.eval(ctx, &sub(&y, x));
                    kv.gp_acc(&density.at(*t, &y), ws * wu * s * jac, &mut out);
                }
            }
        }
        Ok(out)
    }

    /// Linear interpolation of vertex values at a point of triangle `t`.
    pub fn interpolate(&self, values: &[Multivector], t: usize, y: &P3) -> Multivector {
        interpolate(&self.mesh, values, t, y)
    }
}

/// `L_t · (P1 interpolation of vertex values)` with a constant left factor per triangle.
#[derive(Debug)]
pub struct P1Density {
    mesh: Arc<BoundaryMesh>,
    left: Vec<Multivector>,
    vertex_values: Vec<Multivector>,
    values: Vec<Multivector>,
}

impl P1Density {
    pub fn new(q: &SurfaceQuadrature, left: Vec<Multivector>, vertex_values: Vec<Multivector>) -> Self {
        let mut d = Self {
            mesh: q.mesh.clone(),
            left,
            vertex_values,
            values: Vec::new(),
        };
        d.values = q.nodes.iter().zip(&q.owner).map(|(y, &t)| d.at(t, y)).collect();
        d
    }

    /// Normals `n_ψ` (or `n_φ`) as left factors.
    pub fn normal_factors(q: &SurfaceQuadrature, frame: &crate::clifford::Frame) -> Vec<Multivector> {
        q.mesh.normals().iter().map(|n| remap_to_frame(n, frame)).collect()
    }

    pub fn vertex_values(&self) -> &[Multivector] {
        &self.vertex_values
    }
}

impl SurfaceDensity for P1Density {
    fn node(&self, i: usize) -> &Multivector {
        &self.values[i]
    }

    fn at(&self, triangle: usize, y: &P3) -> Multivector {
        self.left[triangle].gp(&interpolate(&self.mesh, &self.vertex_values, triangle, y))
    }
}

/// Linear interpolation of vertex values at a point of triangle `t`.
pub fn interpolate(mesh: &BoundaryMesh, values: &[Multivector], t: usize, y: &P3) -> Multivector {
    let p = mesh.triangle_points(t);
    let tri = mesh.triangles()[t];
    let total = tri_area(&p);
    let mut out = Multivector::zero(values[tri[0]].dim());
    for k in 0..3 {
        let sub_tri = [*y, p[(k + 1) % 3], p[(k + 2) % 3]];
        out.axpy(tri_area(&sub_tri) / total, &values[tri[k]]);
    }
    out
}

/// `n_ψ u` on the mesh for a field `u`.
pub fn psi_density<'a>(
    q: &SurfaceQuadrature,
    ctx: &'a KernelContext,
    u: &'a (dyn SmoothField + 'a),
) -> NodalDensity<impl Fn(usize, &P3) -> Multivector + Sync + 'a> {
    let normals: Vec<Multivector> = q.mesh.normals().iter().map(|n| remap_to_frame(n, &ctx.psi)).collect();
    NodalDensity::new(q, move |t, y| normals[t].gp(&u.value(y)))
}

/// `n_φ ψ∂u` on the mesh for a field `u`.
pub fn phi_gradient_density<'a>(
    q: &SurfaceQuadrature,
    ctx: &'a KernelContext,
    u: &'a (dyn SmoothField + 'a),
) -> NodalDensity<impl Fn(usize, &P3) -> Multivector + Sync + 'a> {
    let normals: Vec<Multivector> = q.mesh.normals().iter().map(|n| remap_to_frame(n, &ctx.phi)).collect();
    NodalDensity::new(q, move |t, y| normals[t].gp(&u.dirac(&ctx.psi, y)))
}

/// `𝒞_ψu(x) = ∫_Γ K_ψ(y - x) n_ψ(y) u(y) dS` for the density `n_ψ u`.
pub fn cauchy_psi<D: SurfaceDensity + ?Sized>(q: &SurfaceQuadrature, ctx: &KernelContext, density: &D, x: &P3) -> Result<Multivector> {
    require_three(ctx)?;
    q.check_off_boundary(x)?;
    Ok(q.integrate(ctx, Kernel::Psi, density, x))
}

/// Second Cauchy-transform term `∫_Γ K(y - x) n_φ(y) ψ∂u(y) dS` with the
/// representation kernel; continuous across `Γ`.
pub fn second_term<D: SurfaceDensity + ?Sized>(q: &SurfaceQuadrature, ctx: &KernelContext, density: &D, x: &P3) -> Result<Multivector> {
    require_three(ctx)?;
    Ok(q.integrate(ctx, Kernel::Repr, density, x))
}

/// `𝒞_φψ g(x)`: the first term from `n_ψ g̃`, the second from `n_φ ψ∂g̃`.
pub fn cauchy_phipsi<D1, D2>(q: &SurfaceQuadrature, ctx: &KernelContext, first: &D1, second: &D2, x: &P3) -> Result<Multivector>
where
    D1: SurfaceDensity + ?Sized,
    D2: SurfaceDensity + ?Sized,
{
    Ok(cauchy_psi(q, ctx, first, x)? + second_term(q, ctx, second, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;
    use crate::geometry::mesh::icosphere;

    #[test]
    fn weights_sum_to_area() {
        let mesh = Arc::new(icosphere([0.0; 3], 1.0, 2).unwrap());
        for rule in [SurfaceRule::Centroid, SurfaceRule::ThreePoint] {
            let q = SurfaceQuadrature::new(mesh.clone(), rule);
            let s: f64 = q.weights().iter().sum();
            assert!((s - mesh.total_area()).abs() < 1e-12);
            assert!(q.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn indicator_of_the_ball() {
        let mesh = Arc::new(icosphere([0.0; 3], 1.0, 3).unwrap());
        let q = SurfaceQuadrature::new(mesh, SurfaceRule::ThreePoint);
        let ctx = KernelContext::standard(3).unwrap();
        let one = AnalyticField::by_name("one", 3).unwrap();
        let rho = psi_density(&q, &ctx, &one);
        let inside = cauchy_psi(&q, &ctx, &rho, &[0.1, 0.2, -0.3]).unwrap();
        let outside = cauchy_psi(&q, &ctx, &rho, &[3.0, 0.0, 0.0]).unwrap();
        assert!(inside.max_diff(&Multivector::one(3)) < 1e-3, "{inside}");
        assert!(outside.max_abs() < 1e-3);
        assert!(matches!(
            cauchy_psi(&q, &ctx, &rho, &[1.0, 0.0, 0.0]),
            Err(Error::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn duffy_matches_offset_limit() {
        // ∫_Γ 1/|y - x| over the unit sphere is 4π for |x| = 1.
        let mesh = Arc::new(icosphere([0.0; 3], 1.0, 4).unwrap());
        let q = SurfaceQuadrature::new(mesh.clone(), SurfaceRule::ThreePoint);
        let ctx = KernelContext::standard(3).unwrap();
        let rho = NodalDensity::new(&q, |_, _| Multivector::one(3));
        let v = q.integrate_at_vertex(&ctx, Kernel::Repr, &rho, 7).unwrap();
        // K = -1/(4π|z|) for equal frames, so the integral is -1.
        assert!((v.scalar_part() + 1.0).abs() < 5e-3, "{v}");
    }
}
