//! Solution formula for fractal boundaries, built from Teodorescu transforms
//! of the Whitney extension `g̃` of the jet.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::{Provenance, RHProblem, RHSolution, SolutionKind, SolverMode};
use crate::clifford::Multivector;
use crate::error::Result;
use crate::field::SmoothField;
use crate::geometry::{whitney_decompose, WhitneyExtension, P3};
use crate::integral::{from_c8, to_c8, Kernel, NearPlan, VolumeDensity, VolumeQuadrature, C8};
use crate::kernels::KernelContext;

/// Points per axis of the grid carrying `T_φ[φ∂ψ∂g̃]` inside the density of `T_ψ[ψ∂g_*]`.
pub const GRID_POINTS: usize = 9;

/// Trilinear interpolant on a uniform grid.
#[derive(Clone, Debug)]
struct Grid {
    min: P3,
    step: P3,
    n: usize,
    values: Vec<C8>,
}

impl Grid {
    fn point(min: &P3, step: &P3, i: usize, j: usize, k: usize) -> P3 {
        [
            min[0] + i as f64 * step[0],
            min[1] + j as f64 * step[1],
            min[2] + k as f64 * step[2],
        ]
    }

    fn at(&self, y: &P3) -> Multivector {
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let t = ((y[a] - self.min[a]) / self.step[a]).clamp(0.0, (self.n - 1) as f64);
            let i = (t.floor() as usize).min(self.n - 2);
            idx[a] = i;
            frac[a] = t - i as f64;
        }
        let mut out = [0.0; 8];
        for corner in 0..8 {
            let (di, dj, dk) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
            let w = [di, dj, dk]
                .iter()
                .zip(&frac)
                .map(|(&d, &f)| if d == 1 { f } else { 1.0 - f })
                .product::<f64>();
            let v = &self.values[((idx[0] + di) * self.n + idx[1] + dj) * self.n + idx[2] + dk];
            for (o, c) in out.iter_mut().zip(v) {
                *o += w * c;
            }
        }
        from_c8(&out)
    }
}

/// Quantities at one point, shared by both evaluators and the boundary conditions.
#[derive(Clone, Debug)]
pub struct FractalTerms {
    pub g_tilde: Multivector,
    /// `ψ∂g̃`.
    pub v1: Multivector,
    /// `T_ψ[ψ∂g̃]`.
    pub t_psi_v1: Multivector,
    /// `T_φψ[φ∂ψ∂g̃]`.
    pub t_phipsi_v2: Multivector,
    /// `T_φ[φ∂ψ∂g̃]`.
    pub t_phi_v2: Multivector,
    /// `T_ψ[ψ∂g_*]`; zero on the `A = B` path.
    pub t_psi_dg_star: Multivector,
    pub g_star: Multivector,
    pub u_plus: Multivector,
    pub u_minus: Multivector,
    pub du_plus: Multivector,
    pub du_minus: Multivector,
}

#[derive(Clone)]
pub struct FractalSolution {
    ctx: KernelContext,
    vq: Arc<VolumeQuadrature>,
    ext: Arc<WhitneyExtension>,
    v1: Arc<VolumeDensity<'static>>,
    v2: Arc<VolumeDensity<'static>>,
    dg_star: Option<Arc<VolumeDensity<'static>>>,
    c: Multivector,
    a_inv: Multivector,
    b_inv: Multivector,
}

impl fmt::Debug for FractalSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FractalSolution")
            .field("cells", &self.vq.cells().len())
            .field("simple", &self.dg_star.is_none())
            .finish()
    }
}

/// `g_*(x) = (T_ψ[ψ∂g̃] - T_φψ[φ∂ψ∂g̃])(x)(-1 + B⁻¹A) + g̃(x)`, defined on all of `R^3`.
pub fn g_star_fractal(solution: &FractalSolution, x: &P3) -> Multivector {
    solution.terms(x).g_star
}

/// Fractal formula; the `A = B` simplification is used when it applies.
pub fn solve_fractal(problem: &RHProblem) -> Result<RHSolution> {
    build(problem, problem.is_simple())
}

/// Fractal formula without the `A = B` simplification.
pub fn solve_fractal_general(problem: &RHProblem) -> Result<RHSolution> {
    build(problem, false)
}

fn build(problem: &RHProblem, simple: bool) -> Result<RHSolution> {
    problem.check_hypothesis()?;
    let ctx = problem.ctx.clone();
    let mesh = problem.mesh.clone();
    let ext = Arc::new(WhitneyExtension::new(problem.jet.clone(), mesh.clone())?);
    let cubes = whitney_decompose(mesh.as_ref(), problem.whitney_depth)?;
    let vq = Arc::new(VolumeQuadrature::new(&cubes, mesh.as_ref()));

    let psi = ctx.psi.clone();
    let phi = ctx.phi.clone();
    let v1_at = {
        let (ext, psi) = (ext.clone(), psi.clone());
        move |y: &P3| ext.dirac(&psi, y)
    };
    let v2_at = {
        let ext = ext.clone();
        move |y: &P3| ext.second_order(&phi, &psi, y)
    };
    let node_values: Vec<(Multivector, Multivector)> = vq
        .nodes()
        .par_iter()
        .map(|y| {
            let d = ext.derivatives(y, 2);
            (d.dirac(&ctx.psi), d.second_order(&ctx.phi, &ctx.psi))
        })
        .collect();
    let v1_nodes: Vec<Multivector> = node_values.iter().map(|v| v.0.clone()).collect();
    let v2_nodes: Vec<Multivector> = node_values.into_iter().map(|v| v.1).collect();
    let v1 = Arc::new(VolumeDensity::from_values(&vq, &v1_nodes, v1_at.clone()));
    let v2 = Arc::new(VolumeDensity::from_values(&vq, &v2_nodes, v2_at.clone()));
    let c = problem.jump_factor();

    let dg_star = if simple {
        None
    } else {
        // T_φ[φ∂ψ∂g̃] on a grid over the bounding box, from a coarser quadrature.
        let coarse_cubes = whitney_decompose(mesh.as_ref(), problem.whitney_depth.saturating_sub(1).max(2))?;
        let coarse = VolumeQuadrature::new(&coarse_cubes, mesh.as_ref());
        let coarse_v2 = VolumeDensity::new(&coarse, v2_at);
        let bb = mesh.bounding_box();
        let n = GRID_POINTS;
        let ext_box = bb.extent();
        let step = [0, 1, 2].map(|a| ext_box[a] / (n - 1) as f64);
        let pts: Vec<P3> = (0..n * n * n)
            .map(|l| Grid::point(&bb.min, &step, l / (n * n), (l / n) % n, l % n))
            .collect();
        let values = pts
            .par_iter()
            .map(|p| to_c8(&-coarse.plan_to_depth(p, 0.0, 0).integrate(&coarse, &ctx, Kernel::Phi, &coarse_v2, p)))
            .collect();
        let grid = Arc::new(Grid {
            min: bb.min,
            step,
            n,
            values,
        });
        let dg = {
            let (grid, c) = (grid.clone(), c.clone());
            move |y: &P3, w: &Multivector| &(w - &grid.at(y)).gp(&c) + w
        };
        let dg_nodes: Vec<Multivector> = vq.nodes().iter().zip(&v1_nodes).map(|(y, w)| dg(y, w)).collect();
        Some(Arc::new(VolumeDensity::from_values(&vq, &dg_nodes, move |y: &P3| dg(y, &v1_at(y)))))
    };

    let provenance = Provenance {
        mode: SolverMode::Fractal,
        triangles: mesh.num_triangles(),
        vertices: mesh.vertices().len(),
        surface_rule: problem.surface_rule,
        whitney_depth: Some(problem.whitney_depth),
        volume_cells: Some(vq.cells().len()),
        simple_path: simple,
    };
    Ok(RHSolution {
        provenance,
        kind: SolutionKind::Fractal(FractalSolution {
            ctx,
            vq,
            ext,
            v1,
            v2,
            dg_star,
            c,
            a_inv: problem.a_inv().clone(),
            b_inv: problem.b_inv().clone(),
        }),
        mesh,
    })
}

impl FractalSolution {
    pub fn is_simple(&self) -> bool {
        self.dg_star.is_none()
    }

    pub fn volume_quadrature(&self) -> &VolumeQuadrature {
        &self.vq
    }

    pub fn extension(&self) -> &WhitneyExtension {
        &self.ext
    }

    /// Refinement plan for evaluations within `margin` of `center`.
    pub fn plan(&self, center: &P3, margin: f64) -> NearPlan {
        self.vq.plan(center, margin)
    }

    pub fn terms(&self, x: &P3) -> FractalTerms {
        self.terms_with(&self.vq.plan(x, 0.0), x)
    }

    /// Terms at `x` with a given refinement plan; every volume integral uses it.
    pub fn terms_with(&self, plan: &NearPlan, x: &P3) -> FractalTerms {
        let teo = |kernel: Kernel, v: &VolumeDensity<'static>| -plan.integrate(&self.vq, &self.ctx, kernel, v, x);
        let d = self.ext.derivatives(x, 1);
        let g_tilde = d.value.clone();
        let v1 = d.dirac(&self.ctx.psi);
        let t_psi_v1 = teo(Kernel::Psi, &self.v1);
        let t_phipsi_v2 = teo(Kernel::Repr, &self.v2);
        let t_phi_v2 = teo(Kernel::Phi, &self.v2);
        let du_plus = &v1 - &t_phi_v2;
        let du_minus = -t_phi_v2.gp(&self.b_inv);
        let (t_psi_dg_star, g_star, u_plus, u_minus) = match &self.dg_star {
            None => {
                let u_plus = &g_tilde - &t_phipsi_v2;
                let u_minus = -t_phipsi_v2.gp(&self.a_inv);
                (Multivector::zero(self.ctx.m), g_tilde.clone(), u_plus, u_minus)
            }
            Some(dg) => {
                let w = &t_psi_v1 - &t_phipsi_v2;
                let t = teo(Kernel::Psi, dg);
                let g_star = &w.gp(&self.c) + &g_tilde;
                let u_plus = &(&g_star - &t) + &w;
                let u_minus = -t.gp(&self.a_inv) + w.gp(&self.b_inv);
                (t, g_star, u_plus, u_minus)
            }
        };
        FractalTerms {
            g_tilde,
            v1,
            t_psi_v1,
            t_phipsi_v2,
            t_phi_v2,
            t_psi_dg_star,
            g_star,
            u_plus,
            u_minus,
            du_plus,
            du_minus,
        }
    }

    /// `(ψ∂u₊, ψ∂u₋)` at `x`: `ψ∂g̃ - T_φ[φ∂ψ∂g̃]` and `-T_φ[φ∂ψ∂g̃]B⁻¹`.
    pub fn psi_derivative(&self, x: &P3) -> (Multivector, Multivector) {
        self.psi_derivative_with(&self.vq.plan(x, 0.0), x)
    }

    pub fn psi_derivative_with(&self, plan: &NearPlan, x: &P3) -> (Multivector, Multivector) {
        let t_phi_v2 = -plan.integrate(&self.vq, &self.ctx, Kernel::Phi, &self.v2, x);
        let v1 = self.ext.dirac(&self.ctx.psi, x);
        (&v1 - &t_phi_v2, -t_phi_v2.gp(&self.b_inv))
    }
}
