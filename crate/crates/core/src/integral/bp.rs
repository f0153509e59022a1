//! Residuals of the first- and second-order Borel–Pompeiu formulas.

use serde::Serialize;

use super::surface::{phi_gradient_density, psi_density, SurfaceDensity, SurfaceQuadrature};
use super::volume::{VolumeDensity, VolumeQuadrature};
use super::{cauchy_psi, require_three, second_term, teodorescu_phipsi, teodorescu_psi};
use crate::clifford::Multivector;
use crate::error::Result;
use crate::field::SmoothField;
use crate::geometry::P3;
use crate::kernels::KernelContext;

/// Terms of a Borel–Pompeiu identity at one point.
#[derive(Clone, Debug, Serialize)]
pub struct BpTerms {
    pub point: P3,
    pub inside: bool,
    pub cauchy: Multivector,
    /// Second boundary term (zero for the first-order formula).
    pub second: Multivector,
    pub volume: Multivector,
    /// `u(x) · 1_Ω(x)`.
    pub target: Multivector,
    pub residual: f64,
}

/// Densities of both formulas for one field, built once and evaluated at many points.
pub struct BorelPompeiu<'a> {
    q: &'a SurfaceQuadrature,
    vq: &'a VolumeQuadrature,
    ctx: &'a KernelContext,
    u: &'a dyn SmoothField,
    boundary: Box<dyn SurfaceDensity + 'a>,
    boundary_grad: Box<dyn SurfaceDensity + 'a>,
    dirac: VolumeDensity<'a>,
    second_order: VolumeDensity<'a>,
}

impl<'a> BorelPompeiu<'a> {
    pub fn new(q: &'a SurfaceQuadrature, vq: &'a VolumeQuadrature, ctx: &'a KernelContext, u: &'a dyn SmoothField) -> Result<Self> {
        require_three(ctx)?;
        Ok(Self {
            q,
            vq,
            ctx,
            u,
            boundary: Box::new(psi_density(q, ctx, u)),
            boundary_grad: Box::new(phi_gradient_density(q, ctx, u)),
            dirac: VolumeDensity::new(vq, move |y: &P3| u.dirac(&ctx.psi, y)),
            second_order: VolumeDensity::new(vq, move |y: &P3| u.second_order(&ctx.phi, &ctx.psi, y)),
        })
    }

    fn target(&self, x: &P3) -> (bool, Multivector) {
        let inside = self.q.mesh().contains_point(x);
        let t = if inside { self.u.value(x) } else { Multivector::zero(self.ctx.m) };
        (inside, t)
    }

    /// `𝒞_ψu + T_ψ[ψ∂u] - u·1_Ω`.
    pub fn first(&self, x: &P3) -> Result<BpTerms> {
        let cauchy = cauchy_psi(self.q, self.ctx, self.boundary.as_ref(), x)?;
        let volume = teodorescu_psi(self.vq, self.ctx, &self.dirac, x)?;
        let (inside, target) = self.target(x);
        let residual = (&(&cauchy + &volume) - &target).max_abs();
        Ok(BpTerms {
            point: *x,
            inside,
            cauchy,
            second: Multivector::zero(self.ctx.m),
            volume,
            target,
            residual,
        })
    }

    /// `𝒞_ψu + ∫_Γ K(y-x) n_φ ψ∂u dS + T_φψ[φ∂ψ∂u] - u·1_Ω`.
    pub fn second(&self, x: &P3) -> Result<BpTerms> {
        let cauchy = cauchy_psi(self.q, self.ctx, self.boundary.as_ref(), x)?;
        let second = second_term(self.q, self.ctx, self.boundary_grad.as_ref(), x)?;
        let volume = teodorescu_phipsi(self.vq, self.ctx, &self.second_order, x)?;
        let (inside, target) = self.target(x);
        let residual = (&(&(&cauchy + &second) + &volume) - &target).max_abs();
        Ok(BpTerms {
            point: *x,
            inside,
            cauchy,
            second,
            volume,
            target,
            residual,
        })
    }
}

/// Residual of the first-order formula at `x`.
pub fn borel_pompeiu_residual_1(
    q: &SurfaceQuadrature,
    vq: &VolumeQuadrature,
    ctx: &KernelContext,
    u: &dyn SmoothField,
    x: &P3,
) -> Result<BpTerms> {
    BorelPompeiu::new(q, vq, ctx, u)?.first(x)
}

/// Residual of the second-order formula at `x`.
pub fn borel_pompeiu_residual_2(
    q: &SurfaceQuadrature,
    vq: &VolumeQuadrature,
    ctx: &KernelContext,
    u: &dyn SmoothField,
    x: &P3,
) -> Result<BpTerms> {
    BorelPompeiu::new(q, vq, ctx, u)?.second(x)
}
