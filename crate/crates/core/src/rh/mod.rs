//! Riemann–Hilbert problem for `(φ,ψ)`-harmonic functions: find `u` on
//! `Ω₊ ∪ Ω₋` with `u⁺ - u⁻A = g̃` and `[ψ∂u]⁺ - [ψ∂u]⁻B = ψ∂g̃` on `Γ`,
//! vanishing at infinity together with `ψ∂u`.

pub mod fractal;
pub mod smooth;
pub mod verify;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use fractal::{g_star_fractal, solve_fractal, solve_fractal_general, FractalSolution, FractalTerms};
pub use smooth::{g_star_smooth, solve_smooth, SmoothSolution};
pub use verify::{decay_fit, probe_points, psi_derivative_fd_gap, verify_rh_conditions, BoundaryResidual, DecayFit, RHReport, VerifyOptions};

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::geometry::jet::LipschitzJet;
use crate::geometry::kdtree::KdTree;
use crate::geometry::{BoundaryMesh, P3};
use crate::integral::SurfaceRule;
use crate::kernels::KernelContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    Smooth,
    Fractal,
}

#[derive(Clone, Debug)]
pub struct RHProblem {
    pub ctx: KernelContext,
    pub a: Multivector,
    pub b: Multivector,
    a_inv: Multivector,
    b_inv: Multivector,
    pub jet: LipschitzJet,
    pub mesh: Arc<BoundaryMesh>,
    /// Summability exponent of `Γ`.
    pub d: f64,
    pub mode: SolverMode,
    /// Whitney depth of the volume quadrature (fractal path).
    pub whitney_depth: u32,
    pub surface_rule: SurfaceRule,
}

fn invert(name: &'static str, a: &Multivector) -> Result<Multivector> {
    a.inverse().map_err(|e| Error::NonInvertibleConstant {
        name,
        reason: e.to_string(),
    })
}

impl RHProblem {
    pub fn new(
        ctx: KernelContext,
        a: Multivector,
        b: Multivector,
        jet: LipschitzJet,
        mesh: Arc<BoundaryMesh>,
        mode: SolverMode,
        d: f64,
    ) -> Result<Self> {
        crate::integral::require_three(&ctx)?;
        if a.dim() != ctx.m || b.dim() != ctx.m || jet.m != ctx.m {
            return Err(Error::DimensionMismatch {
                left: ctx.m,
                right: if a.dim() != ctx.m { a.dim() } else if b.dim() != ctx.m { b.dim() } else { jet.m },
            });
        }
        let a_inv = invert("A", &a)?;
        let b_inv = invert("B", &b)?;
        let problem = Self {
            ctx,
            a,
            b,
            a_inv,
            b_inv,
            jet,
            mesh,
            d,
            mode,
            whitney_depth: 5,
            surface_rule: SurfaceRule::ThreePoint,
        };
        if mode == SolverMode::Fractal {
            problem.check_hypothesis()?;
        }
        Ok(problem)
    }

    pub fn with_whitney_depth(mut self, depth: u32) -> Self {
        self.whitney_depth = depth;
        self
    }

    pub fn with_surface_rule(mut self, rule: SurfaceRule) -> Self {
        self.surface_rule = rule;
        self
    }

    /// The fractal formula needs `α > d/m`.
    pub fn check_hypothesis(&self) -> Result<()> {
        let bound = self.d / self.ctx.m as f64;
        if self.jet.alpha <= bound {
            return Err(Error::HypothesisViolated {
                alpha: self.jet.alpha,
                bound,
            });
        }
        Ok(())
    }

    pub fn a_inv(&self) -> &Multivector {
        &self.a_inv
    }

    pub fn b_inv(&self) -> &Multivector {
        &self.b_inv
    }

    /// `-1 + B⁻¹A`.
    pub fn jump_factor(&self) -> Multivector {
        let mut c = self.b_inv.gp(&self.a);
        c.coeffs_mut()[0] -= 1.0;
        c
    }

    /// `A = B`, where the solution formula simplifies.
    pub fn is_simple(&self) -> bool {
        self.a == self.b
    }

    /// `g̃` and `ψ∂g̃` at the mesh vertices, from the Taylor data of the nearest jet sample.
    pub fn vertex_data(&self) -> (Vec<Multivector>, Vec<Multivector>) {
        let tree = KdTree::build(self.jet.points());
        let mut values = Vec::with_capacity(self.mesh.vertices().len());
        let mut grads = Vec::with_capacity(values.capacity());
        for p in self.mesh.vertices() {
            let s = &self.jet.samples[tree.nearest(p).expect("non-empty jet")];
            values.push(s.taylor(p));
            let mut w = Multivector::zero(self.ctx.m);
            for (l, g) in s.grad.iter().enumerate() {
                self.ctx.psi.vector(l).gp_acc(g, 1.0, &mut w);
            }
            grads.push(w);
        }
        (values, grads)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub mode: SolverMode,
    pub triangles: usize,
    pub vertices: usize,
    pub surface_rule: SurfaceRule,
    pub whitney_depth: Option<u32>,
    pub volume_cells: Option<usize>,
    /// The `A = B` formula was used.
    pub simple_path: bool,
}

#[derive(Clone, Debug)]
pub enum SolutionKind {
    Smooth(SmoothSolution),
    Fractal(FractalSolution),
}

/// Evaluators of `u` and `ψ∂u` on both sides of `Γ`.
#[derive(Clone, Debug)]
pub struct RHSolution {
    pub provenance: Provenance,
    pub kind: SolutionKind,
    mesh: Arc<BoundaryMesh>,
}

impl RHSolution {
    pub fn u_plus(&self, x: &P3) -> Result<Multivector> {
        match &self.kind {
            SolutionKind::Smooth(s) => s.u_plus(x),
            SolutionKind::Fractal(f) => Ok(f.terms(x).u_plus),
        }
    }

    pub fn u_minus(&self, x: &P3) -> Result<Multivector> {
        match &self.kind {
            SolutionKind::Smooth(s) => s.u_minus(x),
            SolutionKind::Fractal(f) => Ok(f.terms(x).u_minus),
        }
    }

    pub fn psi_derivative_plus(&self, x: &P3) -> Result<Multivector> {
        match &self.kind {
            SolutionKind::Smooth(s) => s.psi_derivative_plus(x),
            SolutionKind::Fractal(f) => Ok(f.psi_derivative(x).0),
        }
    }

    pub fn psi_derivative_minus(&self, x: &P3) -> Result<Multivector> {
        match &self.kind {
            SolutionKind::Smooth(s) => s.psi_derivative_minus(x),
            SolutionKind::Fractal(f) => Ok(f.psi_derivative(x).1),
        }
    }

    pub fn inside(&self, x: &P3) -> bool {
        self.mesh.contains_point(x)
    }

    /// `u(x)` from the evaluator of the side containing `x`.
    pub fn u(&self, x: &P3) -> Result<Multivector> {
        if self.inside(x) {
            self.u_plus(x)
        } else {
            self.u_minus(x)
        }
    }

    pub fn mesh(&self) -> &Arc<BoundaryMesh> {
        &self.mesh
    }
}

/// `ψ∂u(x)` for `x` off `Γ`.
pub fn eval_psi_derivative(solution: &RHSolution, x: &P3) -> Result<Multivector> {
    if solution.inside(x) {
        solution.psi_derivative_plus(x)
    } else {
        solution.psi_derivative_minus(x)
    }
}

/// Solves with the formula selected by the problem mode.
pub fn solve(problem: &RHProblem) -> Result<RHSolution> {
    match problem.mode {
        SolverMode::Smooth => solve_smooth(problem),
        SolverMode::Fractal => solve_fractal(problem),
    }
}
