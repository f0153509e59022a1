//! Volume quadrature on Whitney cubes and the Teodorescu operators.

use rayon::prelude::*;

use super::boxint::ShiftedBox;
use super::{from_c8, require_three, to_c8, Kernel, Kernel3, C8};
use crate::clifford::Multivector;
use crate::error::Result;
use crate::geometry::whitney::CubeKind;
use crate::geometry::{add, sub, Domain, WhitneyCubeSet, P3};
use crate::kernels::KernelContext;
use crate::operators::{dirac_fd, second_order_fd};

/// Cells whose distance to the target is below this many sides are refined.
const NEAR_SIDES: f64 = 2.0;
/// Refinement levels below a cube for near cells.
pub const MAX_EXTRA_DEPTH: u32 = 2;

/// Two-point Gauss abscissae on `[0, 1]`.
const G2: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub min: P3,
    pub side: f64,
}

impl Cell {
    fn center(&self) -> P3 {
        add(&self.min, &[self.side / 2.0; 3])
    }

    fn gauss_nodes(&self) -> [P3; 8] {
        let mut out = [[0.0; 3]; 8];
        for (k, p) in out.iter_mut().enumerate() {
            *p = [
                self.min[0] + self.side * G2[k & 1],
                self.min[1] + self.side * G2[(k >> 1) & 1],
                self.min[2] + self.side * G2[(k >> 2) & 1],
            ];
        }
        out
    }

    fn children(&self) -> [Cell; 8] {
        let h = self.side / 2.0;
        let mut out = [*self; 8];
        for (k, c) in out.iter_mut().enumerate() {
            c.min = [
                self.min[0] + if k & 1 != 0 { h } else { 0.0 },
                self.min[1] + if k & 2 != 0 { h } else { 0.0 },
                self.min[2] + if k & 4 != 0 { h } else { 0.0 },
            ];
            c.side = h;
        }
        out
    }

    fn distance(&self, x: &P3) -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let d = (self.min[k] - x[k]).max(x[k] - self.min[k] - self.side).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }

    fn clamp(&self, x: &P3) -> P3 {
        let mut p = *x;
        for k in 0..3 {
            p[k] = p[k].clamp(self.min[k], self.min[k] + self.side);
        }
        p
    }
}

/// Tensor two-point Gauss rule on cubes away from `Γ`. Cubes meeting `Γ` are
/// split once and each child centered inside the domain contributes its
/// midpoint, so the represented domain has a second-order accurate volume.
#[derive(Clone, Debug)]
pub struct VolumeQuadrature {
    cells: Vec<Cell>,
    /// Node range of cell `i` is `starts[i]..starts[i + 1]`.
    starts: Vec<usize>,
    nodes: Vec<P3>,
    weights: Vec<f64>,
}

impl VolumeQuadrature {
    pub fn new<D: Domain + ?Sized>(cubes: &WhitneyCubeSet, domain: &D) -> Self {
        let mut cells = Vec::new();
        let mut starts = vec![0];
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for c in &cubes.cubes {
            let cell = Cell { min: c.min, side: c.side };
            if c.kind == CubeKind::Whitney || (c.kind == CubeKind::Collar && c.center_distance >= c.diameter() / 2.0) {
                cells.push(cell);
                nodes.extend(cell.gauss_nodes());
                weights.extend([c.side.powi(3) / 8.0; 8]);
                starts.push(nodes.len());
                continue;
            }
            for ch in cell.children() {
                let mid = ch.center();
                if domain.contains(&mid) {
                    cells.push(ch);
                    nodes.push(mid);
                    weights.push(ch.side.powi(3));
                    starts.push(nodes.len());
                }
            }
        }
        Self {
            cells,
            starts,
            nodes,
            weights,
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn nodes(&self) -> &[P3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        self.cells.iter().map(|c| c.side.powi(3)).sum()
    }

    /// Refinement plan valid for targets within `margin` of `center`.
    pub fn plan(&self, center: &P3, margin: f64) -> NearPlan {
        self.plan_to_depth(center, margin, MAX_EXTRA_DEPTH)
    }

    /// As [`VolumeQuadrature::plan`] with at most `max_depth` subdivisions of a near cell.
    pub fn plan_to_depth(&self, center: &P3, margin: f64, max_depth: u32) -> NearPlan {
        let mut near_cells = Vec::new();
        let mut gauss = Vec::new();
        let mut leaves = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            if c.distance(center) < NEAR_SIDES * c.side + margin {
                near_cells.push(i);
                refine(c, center, margin, 0, max_depth, &mut gauss, &mut leaves);
            }
        }
        NearPlan {
            near_cells,
            gauss,
            leaves,
        }
    }

    /// `∫_Ω K(y - x) v(y) dy`.
    pub fn integrate(&self, ctx: &KernelContext, kernel: Kernel, density: &VolumeDensity<'_>, x: &P3) -> Multivector {
        self.plan(x, 0.0).integrate(self, ctx, kernel, density, x)
    }
}

fn refine(c: &Cell, center: &P3, margin: f64, depth: u32, max_depth: u32, gauss: &mut Vec<Cell>, leaves: &mut Vec<Cell>) {
    if c.distance(center) >= NEAR_SIDES * c.side + margin {
        gauss.push(*c);
    } else if depth == max_depth {
        leaves.push(*c);
    } else {
        for ch in c.children() {
            refine(&ch, center, margin, depth + 1, max_depth, gauss, leaves);
        }
    }
}

/// Cells near a target split into refined Gauss cells and innermost leaves
/// that are integrated with the density value at the target subtracted and
/// the kernel integrated in closed form. Sharing one plan across a
/// finite-difference stencil keeps the quadrature error smooth in the target.
#[derive(Clone, Debug)]
pub struct NearPlan {
    near_cells: Vec<usize>,
    gauss: Vec<Cell>,
    leaves: Vec<Cell>,
}

impl NearPlan {
    pub fn integrate(
        &self,
        vq: &VolumeQuadrature,
        ctx: &KernelContext,
        kernel: Kernel,
        density: &VolumeDensity<'_>,
        x: &P3,
    ) -> Multivector {
        let fast = Kernel3::new(ctx).expect("three-dimensional context");
        let mut far = [0.0; 8];
        let mut skip = self.near_cells.iter().peekable();
        for i in 0..vq.cells.len() {
            if skip.peek() == Some(&&i) {
                skip.next();
                continue;
            }
            for n in vq.starts[i]..vq.starts[i + 1] {
                let k = fast.eval(kernel, &sub(&vq.nodes[n], x));
                fast.gp_acc(&k, &density.values[n], vq.weights[n], &mut far);
            }
        }
        let mut out = from_c8(&far);
        for c in &self.gauss {
            let w = c.side.powi(3) / 8.0;
            for y in c.gauss_nodes() {
                let k = kernel.eval(ctx, &sub(&y, x));
                k.gp_acc(&density.at(&y), w, &mut out);
            }
        }
        for c in &self.leaves {
            let a = density.at(&c.clamp(x));
            let w = c.side.powi(3) / 8.0;
            for y in c.gauss_nodes() {
                let z = sub(&y, x);
                if z.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let k = kernel.eval(ctx, &z);
                k.gp_acc(&(&density.at(&y) - &a), w, &mut out);
            }
            exact_kernel_integral(ctx, kernel, c, x).gp_acc(&a, 1.0, &mut out);
        }
        out
    }
}

/// `∫_c K(y - x) dy` in closed form.
pub fn exact_kernel_integral(ctx: &KernelContext, kernel: Kernel, c: &Cell, x: &P3) -> Multivector {
    let b = ShiftedBox::new(&c.min, c.side, x);
    match kernel {
        Kernel::Psi | Kernel::Phi => {
            let frame = if kernel == Kernel::Psi { &ctx.psi } else { &ctx.phi };
            let g = b.grad_kernel();
            let mut out = Multivector::zero(ctx.m);
            for (i, gi) in g.iter().enumerate() {
                out.axpy(-gi / ctx.sigma, frame.vector(i));
            }
            out
        }
        Kernel::Repr => {
            let j = b.inv_r();
            let mm = b.second_moments(j);
            let mut out = ctx.frame_sum.scale(j);
            for i in 0..3 {
                for k in 0..3 {
                    ctx.psi.vector(i).gp_acc(ctx.phi.vector(k), -mm[i * 3 + k], &mut out);
                }
            }
            out.scale_mut(1.0 / (2.0 * ctx.sigma));
            out
        }
    }
}

/// Volume density cached at the base Gauss nodes and evaluable anywhere.
pub struct VolumeDensity<'a> {
    values: Vec<C8>,
    f: Box<dyn Fn(&P3) -> Multivector + Send + Sync + 'a>,
}

impl<'a> VolumeDensity<'a> {
    pub fn new<F: Fn(&P3) -> Multivector + Send + Sync + 'a>(vq: &VolumeQuadrature, f: F) -> Self {
        let values = vq.nodes.par_iter().map(|y| to_c8(&f(y))).collect();
        Self { values, f: Box::new(f) }
    }

    /// Density with precomputed node values.
    pub fn from_values<F: Fn(&P3) -> Multivector + Send + Sync + 'a>(vq: &VolumeQuadrature, values: &[Multivector], f: F) -> Self {
        assert_eq!(values.len(), vq.nodes.len());
        Self {
            values: values.iter().map(to_c8).collect(),
            f: Box::new(f),
        }
    }

    pub fn constant(vq: &VolumeQuadrature, c: Multivector) -> Self {
        let values = vec![to_c8(&c); vq.nodes.len()];
        Self {
            values,
            f: Box::new(move |_| c.clone()),
        }
    }

    pub fn at(&self, y: &P3) -> Multivector {
        (self.f)(y)
    }
}

/// `-∫_Ω K(y - x) v(y) dy` for the given kernel.
pub fn teodorescu(vq: &VolumeQuadrature, ctx: &KernelContext, kernel: Kernel, v: &VolumeDensity<'_>, x: &P3) -> Result<Multivector> {
    require_three(ctx)?;
    Ok(-vq.integrate(ctx, kernel, v, x))
}

/// `T_ψv(x) = -∫_Ω K_ψ(y - x) v(y) dy`.
pub fn teodorescu_psi(vq: &VolumeQuadrature, ctx: &KernelContext, v: &VolumeDensity<'_>, x: &P3) -> Result<Multivector> {
    teodorescu(vq, ctx, Kernel::Psi, v, x)
}

/// `T_φv(x) = -∫_Ω K_φ(y - x) v(y) dy`.
pub fn teodorescu_phi(vq: &VolumeQuadrature, ctx: &KernelContext, v: &VolumeDensity<'_>, x: &P3) -> Result<Multivector> {
    teodorescu(vq, ctx, Kernel::Phi, v, x)
}

/// `T_φψv(x) = -∫_Ω K(y - x) v(y) dy` with the representation kernel.
pub fn teodorescu_phipsi(vq: &VolumeQuadrature, ctx: &KernelContext, v: &VolumeDensity<'_>, x: &P3) -> Result<Multivector> {
    teodorescu(vq, ctx, Kernel::Repr, v, x)
}

/// Central-difference `ψ∂` of a Teodorescu potential, one plan for the stencil.
pub fn teodorescu_dirac_fd(
    vq: &VolumeQuadrature,
    ctx: &KernelContext,
    kernel: Kernel,
    v: &VolumeDensity<'_>,
    x: &P3,
    h: f64,
) -> Result<Multivector> {
    require_three(ctx)?;
    let plan = vq.plan(x, 2.0 * h);
    dirac_fd(|p| Ok(-plan.integrate(vq, ctx, kernel, v, &[p[0], p[1], p[2]])), &ctx.psi, x, h)
}

/// Central-difference `φ∂ψ∂` of a Teodorescu potential, one plan for the stencil.
pub fn teodorescu_second_order_fd(
    vq: &VolumeQuadrature,
    ctx: &KernelContext,
    kernel: Kernel,
    v: &VolumeDensity<'_>,
    x: &P3,
    h: f64,
) -> Result<Multivector> {
    require_three(ctx)?;
    let plan = vq.plan(x, 2.0 * h);
    second_order_fd(
        |p| Ok(-plan.integrate(vq, ctx, kernel, v, &[p[0], p[1], p[2]])),
        &ctx.phi,
        &ctx.psi,
        x,
        h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{whitney_decompose, Ball, BoxDomain};

    fn ball(depth: u32) -> VolumeQuadrature {
        let b = Ball {
            center: [0.0; 3],
            radius: 1.0,
        };
        VolumeQuadrature::new(&whitney_decompose(&b, depth).unwrap(), &b)
    }

    #[test]
    fn volume_matches_cells_and_ball() {
        let vq = ball(5);
        let s: f64 = vq.weights().iter().sum();
        assert!((s - vq.volume()).abs() < 1e-10 * vq.volume(), "{s}");
        assert!((vq.volume() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-2, "{}", vq.volume());
    }

    #[test]
    fn exact_cell_integral_agrees_with_refined_quadrature() {
        let ctx = KernelContext::standard(3).unwrap();
        let cube = BoxDomain::unit_cube();
        let vq = VolumeQuadrature::new(&whitney_decompose(&cube, 3).unwrap(), &cube);
        let one = VolumeDensity::constant(&vq, Multivector::one(3));
        let x = [2.0, 0.3, 0.4];
        for kernel in [Kernel::Psi, Kernel::Repr] {
            let quad = vq.integrate(&ctx, kernel, &one, &x);
            let mut exact = Multivector::zero(3);
            for c in vq.cells() {
                exact += &exact_kernel_integral(&ctx, kernel, c, &x);
            }
            assert!(quad.max_diff(&exact) < 1e-5, "{kernel:?}");
        }
    }

    #[test]
    fn newton_potential_of_the_ball() {
        // With equal frames the kernel is -1/(4π|z|), so T_φψ[1] = (3 - |x|²)/6 inside.
        let ctx = KernelContext::standard(3).unwrap();
        let vq = ball(5);
        let one = VolumeDensity::constant(&vq, Multivector::one(3));
        let x = [0.2, -0.1, 0.3];
        let t = teodorescu_phipsi(&vq, &ctx, &one, &x).unwrap();
        let r2 = 0.14;
        assert!((t.scalar_part() - (3.0 - r2) / 6.0).abs() < 1e-2, "{t}");
    }
}
