//! Solution formula for smooth boundaries: Cauchy transforms of the modified
//! datum `g_*` plus the continuous second term.

use std::sync::Arc;

use rayon::prelude::*;

use super::{Provenance, RHProblem, RHSolution, SolutionKind, SolverMode};
use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::geometry::P3;
use crate::integral::{cauchy_psi, interpolate, second_term, Kernel, P1Density, SurfaceQuadrature};
use crate::kernels::KernelContext;

#[derive(Clone, Debug)]
pub struct SmoothSolution {
    ctx: KernelContext,
    q: Arc<SurfaceQuadrature>,
    a_inv: Multivector,
    b_inv: Multivector,
    /// `n_ψ g_*`.
    first: Arc<P1Density>,
    /// `n_φ ψ∂g̃`.
    second: Arc<P1Density>,
    g_star: Vec<Multivector>,
    g_tilde: Vec<Multivector>,
    gradient: Vec<Multivector>,
}

/// `n_φ ψ∂g̃` on the mesh with `ψ∂g̃` interpolated from the vertices.
fn gradient_density(problem: &RHProblem, q: &SurfaceQuadrature, gradient: Vec<Multivector>) -> P1Density {
    P1Density::new(q, P1Density::normal_factors(q, &problem.ctx.phi), gradient)
}

/// `g_*(x) = S(x)(-1 + B⁻¹A) + g̃(x)` for `x` on `Γ`, with
/// `S(x) = ∫_Γ K(y - x) n_φ(y) ψ∂g̃(y) dS` evaluated by a Duffy rule at `x`.
pub fn g_star_smooth(problem: &RHProblem, x: &P3) -> Result<Multivector> {
    let near = problem.mesh.nearest(x);
    let h = problem.mesh.edge_mean(near.triangle);
    if near.distance > 1e-9 * h {
        return Err(Error::Invalid(format!("point is {:.3e} off the boundary", near.distance)));
    }
    let q = SurfaceQuadrature::new(problem.mesh.clone(), problem.surface_rule);
    let (values, gradient) = problem.vertex_data();
    let second = gradient_density(problem, &q, gradient);
    let s = q.integrate_at_point(&problem.ctx, Kernel::Repr, &second, &near.point, near.triangle)?;
    Ok(s.gp(&problem.jump_factor()) + interpolate(&problem.mesh, &values, near.triangle, &near.point))
}

pub fn solve_smooth(problem: &RHProblem) -> Result<RHSolution> {
    let q = SurfaceQuadrature::new(problem.mesh.clone(), problem.surface_rule);
    let (g_tilde, gradient) = problem.vertex_data();
    let second = gradient_density(problem, &q, gradient.clone());
    let c = problem.jump_factor();
    let g_star = (0..problem.mesh.vertices().len())
        .into_par_iter()
        .map(|v| {
            let s = q.integrate_at_vertex(&problem.ctx, Kernel::Repr, &second, v)?;
            Ok(&s.gp(&c) + &g_tilde[v])
        })
        .collect::<Result<Vec<_>>>()?;
    let first = P1Density::new(&q, P1Density::normal_factors(&q, &problem.ctx.psi), g_star.clone());
    let solution = SmoothSolution {
        ctx: problem.ctx.clone(),
        q: Arc::new(q),
        a_inv: problem.a_inv().clone(),
        b_inv: problem.b_inv().clone(),
        first: Arc::new(first),
        second: Arc::new(second),
        g_star,
        g_tilde,
        gradient,
    };
    Ok(RHSolution {
        provenance: Provenance {
            mode: SolverMode::Smooth,
            triangles: problem.mesh.num_triangles(),
            vertices: problem.mesh.vertices().len(),
            surface_rule: problem.surface_rule,
            whitney_depth: None,
            volume_cells: None,
            simple_path: false,
        },
        kind: SolutionKind::Smooth(solution),
        mesh: problem.mesh.clone(),
    })
}

impl SmoothSolution {
    fn parts(&self, x: &P3) -> Result<(Multivector, Multivector)> {
        let c = cauchy_psi(&self.q, &self.ctx, self.first.as_ref(), x)?;
        let s = second_term(&self.q, &self.ctx, self.second.as_ref(), x)?;
        Ok((c, s))
    }

    /// `𝒞_ψg_* + S`.
    pub fn u_plus(&self, x: &P3) -> Result<Multivector> {
        let (c, s) = self.parts(x)?;
        Ok(c + s)
    }

    /// `𝒞_ψg_*·A⁻¹ + S·B⁻¹`.
    pub fn u_minus(&self, x: &P3) -> Result<Multivector> {
        let (c, s) = self.parts(x)?;
        Ok(c.gp(&self.a_inv) + s.gp(&self.b_inv))
    }

    /// `ψ∂S = ∫_Γ K_φ(y - x) n_φ ψ∂g̃ dS`; `ψ∂𝒞_ψg_*` vanishes off `Γ`.
    pub fn psi_derivative_plus(&self, x: &P3) -> Result<Multivector> {
        self.q.check_off_boundary(x)?;
        Ok(self.q.integrate(&self.ctx, Kernel::Phi, self.second.as_ref(), x))
    }

    pub fn psi_derivative_minus(&self, x: &P3) -> Result<Multivector> {
        Ok(self.psi_derivative_plus(x)?.gp(&self.b_inv))
    }

    /// `g_*` at the mesh vertices.
    pub fn g_star(&self) -> &[Multivector] {
        &self.g_star
    }

    /// `g̃` at the mesh vertices.
    pub fn g_tilde(&self) -> &[Multivector] {
        &self.g_tilde
    }

    /// `ψ∂g̃` at the mesh vertices.
    pub fn gradient(&self) -> &[Multivector] {
        &self.gradient
    }

    pub fn quadrature(&self) -> &SurfaceQuadrature {
        &self.q
    }
}
