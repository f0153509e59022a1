//! Closed-form kernels: the Cauchy kernel `K_ψ` of `ψ∂` and the kernel
//! `K_φψ` of `φ∂ψ∂`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::clifford::{remap_to_frame, Frame, Multivector, StructuralSet};
use crate::error::{Error, Result};
use crate::operators::{dirac_fd, second_order_fd};

/// Points closer than this to the origin are rejected.
pub const ORIGIN_TOL: f64 = 1e-14;

/// `Γ(m/2)` from `Γ(1) = 1`, `Γ(1/2) = √π` and `Γ(s+1) = sΓ(s)`.
fn gamma_half(m: usize) -> f64 {
    let (mut g, mut s) = if m % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = m as f64 / 2.0;
    while s < target {
        g *= s;
        s += 1.0;
    }
    g
}

/// Area of the unit sphere in `R^m`, `2π^{m/2}/Γ(m/2)`.
pub fn sphere_area(m: usize) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m)
}

#[derive(Clone, Debug)]
pub struct KernelContext {
    pub m: usize,
    pub phi: StructuralSet,
    pub psi: StructuralSet,
    pub sigma: f64,
    /// `Σ_i ψ^i φ^i`.
    pub frame_sum: Multivector,
}

impl KernelContext {
    pub fn new(phi: StructuralSet, psi: StructuralSet) -> Result<Self> {
        let m = psi.dim();
        if phi.dim() != m {
            return Err(Error::DimensionMismatch {
                left: phi.dim(),
                right: m,
            });
        }
        if m < 3 {
            return Err(Error::UnsupportedDimension(m));
        }
        let mut frame_sum = Multivector::zero(m);
        for i in 0..m {
            psi.vector(i).gp_acc(phi.vector(i), 1.0, &mut frame_sum);
        }
        Ok(Self {
            m,
            phi,
            psi,
            sigma: sphere_area(m),
            frame_sum,
        })
    }

    pub fn standard(m: usize) -> Result<Self> {
        Self::new(StructuralSet::standard(m), StructuralSet::standard(m))
    }

    /// `K_ψ(x)`.
    pub fn k_psi(&self, x: &[f64]) -> Result<Multivector> {
        cauchy_kernel(&self.psi, self.sigma, x)
    }

    /// `K_φ(x)`.
    pub fn k_phi(&self, x: &[f64]) -> Result<Multivector> {
        cauchy_kernel(&self.phi, self.sigma, x)
    }

    /// `K_φψ(x) = [(2-m)|x|^{-m} x_ψ x_φ + |x|^{2-m} Σψ^iφ^i] / (2σ_m(2-m))`.
    pub fn k_phipsi(&self, x: &[f64]) -> Result<Multivector> {
        let r = check_origin(x)?;
        let m = self.m as f64;
        let xp = remap_to_frame(x, &self.psi);
        let xf = remap_to_frame(x, &self.phi);
        let mut k = xp.gp(&xf).scale((2.0 - m) * r.powf(-m));
        k.axpy(r.powf(2.0 - m), &self.frame_sum);
        k.scale_mut(1.0 / (2.0 * self.sigma * (2.0 - m)));
        Ok(k)
    }

    /// Kernel of the second-order representation formula and of `T_φψ`:
    /// the negative of [`KernelContext::k_phipsi`], so that
    /// `ψ∂K = -K_φ` and `T_φψ v = -∫ K(y-x) v(y) dy` inverts `φ∂ψ∂` on Ω.
    pub fn k_repr(&self, x: &[f64]) -> Result<Multivector> {
        Ok(-self.k_phipsi(x)?)
    }
}

fn check_origin(x: &[f64]) -> Result<f64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < ORIGIN_TOL {
        return Err(Error::OriginSingularity { distance: r });
    }
    Ok(r)
}

/// `-x_ψ / (σ_m |x|^m)`.
pub fn cauchy_kernel(psi: &Frame, sigma: f64, x: &[f64]) -> Result<Multivector> {
    let r = check_origin(x)?;
    let mut k = remap_to_frame(x, psi);
    k.scale_mut(-1.0 / (sigma * r.powi(psi.dim() as i32)));
    Ok(k)
}

pub fn eval_k_psi(ctx: &KernelContext, x: &[f64]) -> Result<Multivector> {
    ctx.k_psi(x)
}

pub fn eval_k_phipsi(ctx: &KernelContext, x: &[f64]) -> Result<Multivector> {
    ctx.k_phipsi(x)
}

/// Finite-difference residuals of the kernel identities at `x`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelResiduals {
    /// `|ψ∂K_ψ(x)|`.
    pub cauchy: f64,
    /// `|φ∂ψ∂K_φψ(x)|`.
    pub second_order: f64,
    /// `|ψ∂K(x) + K_φ(x)|` for the representation kernel `K = -K_φψ`.
    pub teodorescu: f64,
}

pub fn kernel_harmonicity_residual(ctx: &KernelContext, x: &[f64], h: f64) -> Result<KernelResiduals> {
    check_origin(x)?;
    let cauchy = dirac_fd(|p| ctx.k_psi(p), &ctx.psi, x, h)?.norm();
    let second_order = second_order_fd(|p| ctx.k_phipsi(p), &ctx.phi, &ctx.psi, x, h)?.norm();
    let mut t = dirac_fd(|p| ctx.k_repr(p), &ctx.psi, x, h)?;
    t += &ctx.k_phi(x)?;
    Ok(KernelResiduals {
        cauchy,
        second_order,
        teodorescu: t.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::embed_vector;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_kernel_on_axis() {
        let ctx = KernelContext::standard(3).unwrap();
        let k = ctx.k_psi(&[1.0, 0.0, 0.0]).unwrap();
        assert!(k.max_diff(&embed_vector(&[-1.0 / (4.0 * PI), 0.0, 0.0])) < 1e-15);
        assert!(matches!(ctx.k_psi(&[0.0; 3]), Err(Error::OriginSingularity { .. })));
    }

    #[test]
    fn equal_frames_collapse_to_scalar() {
        let ctx = KernelContext::standard(3).unwrap();
        let k = ctx.k_phipsi(&[0.0, 0.6, 0.8]).unwrap();
        assert!(k.max_diff(&Multivector::scalar(3, 1.0 / (4.0 * PI))) < 1e-15);
    }

    #[test]
    fn dimension_two_rejected() {
        assert!(KernelContext::standard(2).is_err());
    }
}
