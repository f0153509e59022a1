//! Quadrature realizations of the Cauchy transforms and Teodorescu operators,
//! and residuals of both Borel–Pompeiu formulas.

pub mod boxint;
pub mod bp;
pub mod surface;
pub mod trace;
pub mod volume;

pub use bp::{borel_pompeiu_residual_1, borel_pompeiu_residual_2, BorelPompeiu, BpTerms};
pub use surface::{cauchy_phipsi, cauchy_psi, interpolate, phi_gradient_density, psi_density, second_term, NodalDensity, P1Density, SurfaceDensity, SurfaceQuadrature, SurfaceRule};
pub use trace::{one_sided_limit, two_sided_gap, Side, EPS_MULTIPLES};
pub use volume::{
    teodorescu, teodorescu_dirac_fd, teodorescu_phi, teodorescu_phipsi, teodorescu_psi, teodorescu_second_order_fd, NearPlan,
    VolumeDensity, VolumeQuadrature,
};

use crate::clifford::{remap_to_frame, Multivector};
use crate::error::{Error, Result};
use crate::geometry::P3;
use crate::kernels::KernelContext;

/// Kernels integrated by the quadratures, as functions of `z = y - x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `K_ψ`.
    Psi,
    /// `K_φ`.
    Phi,
    /// The representation kernel `-K_φψ`.
    Repr,
}

impl Kernel {
    /// Kernel value at `z ≠ 0` (three-dimensional geometry).
    #[inline]
    pub fn eval(self, ctx: &KernelContext, z: &P3) -> Multivector {
        let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        let r = r2.sqrt();
        match self {
            Kernel::Psi | Kernel::Phi => {
                let frame = if self == Kernel::Psi { &ctx.psi } else { &ctx.phi };
                let mut k = remap_to_frame(z, frame);
                k.scale_mut(-1.0 / (ctx.sigma * r2 * r));
                k
            }
            Kernel::Repr => {
                // -K_φψ = [|z|^{-1} Σψ^iφ^i - |z|^{-3} z_ψ z_φ] / (2σ) for m = 3.
                let zp = remap_to_frame(z, &ctx.psi);
                let zf = remap_to_frame(z, &ctx.phi);
                let mut k = ctx.frame_sum.scale(1.0 / r);
                zp.gp_acc(&zf, -1.0 / (r2 * r), &mut k);
                k.scale_mut(1.0 / (2.0 * ctx.sigma));
                k
            }
        }
    }
}

/// Coefficients of an `R_{0,3}` multivector.
pub type C8 = [f64; 8];

pub fn to_c8(a: &Multivector) -> C8 {
    let mut out = [0.0; 8];
    out.copy_from_slice(a.coeffs());
    out
}

pub fn from_c8(a: &C8) -> Multivector {
    Multivector::from_coeffs(3, a).expect("eight coefficients")
}

/// Kernel data unpacked into fixed-size arrays for the inner quadrature loops.
#[derive(Clone, Debug)]
pub struct Kernel3 {
    sign: [[f64; 8]; 8],
    psi: [C8; 3],
    phi: [C8; 3],
    frame_sum: C8,
    /// `ψ^i φ^j`.
    pairs: [[C8; 3]; 3],
    sigma: f64,
}

impl Kernel3 {
    pub fn new(ctx: &KernelContext) -> Result<Self> {
        require_three(ctx)?;
        let mut sign = [[0.0; 8]; 8];
        for (a, row) in sign.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = crate::clifford::blade_sign(a, b);
            }
        }
        let psi = [0, 1, 2].map(|i| to_c8(ctx.psi.vector(i)));
        let phi = [0, 1, 2].map(|i| to_c8(ctx.phi.vector(i)));
        let pairs = [0, 1, 2].map(|i| [0, 1, 2].map(|j| to_c8(&ctx.psi.vector(i).gp(ctx.phi.vector(j)))));
        Ok(Self {
            sign,
            psi,
            phi,
            frame_sum: to_c8(&ctx.frame_sum),
            pairs,
            sigma: ctx.sigma,
        })
    }

    #[inline]
    pub fn eval(&self, kernel: Kernel, z: &P3) -> C8 {
        let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        let r = r2.sqrt();
        let mut k = [0.0; 8];
        match kernel {
            Kernel::Psi | Kernel::Phi => {
                let frame = if kernel == Kernel::Psi { &self.psi } else { &self.phi };
                let s = -1.0 / (self.sigma * r2 * r);
                for (zi, v) in z.iter().zip(frame) {
                    for (kc, vc) in k.iter_mut().zip(v) {
                        *kc += s * zi * vc;
                    }
                }
            }
            Kernel::Repr => {
                let a = 1.0 / (2.0 * self.sigma * r);
                let b = -1.0 / (2.0 * self.sigma * r2 * r);
                for (kc, fc) in k.iter_mut().zip(&self.frame_sum) {
                    *kc = a * fc;
                }
                for i in 0..3 {
                    for j in 0..3 {
                        let s = b * z[i] * z[j];
                        for (kc, pc) in k.iter_mut().zip(&self.pairs[i][j]) {
                            *kc += s * pc;
                        }
                    }
                }
            }
        }
        k
    }

    /// `out += w · a b`.
    #[inline]
    pub fn gp_acc(&self, a: &C8, b: &C8, w: f64, out: &mut C8) {
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            let s = w * ai;
            let row = &self.sign[i];
            for j in 0..8 {
                out[i ^ j] += row[j] * s * b[j];
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs.push(0.5 * (1.0 - x));
        ws.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

/// Integral geometry lives in `R^3`.
pub fn require_three(ctx: &KernelContext) -> Result<()> {
    if ctx.m != 3 {
        return Err(Error::UnsupportedDimension(ctx.m));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::StructuralSet;
    use rand::SeedableRng;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let i9: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((i9 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn kernels_match_closed_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ctx = KernelContext::new(StructuralSet::random(3, &mut rng), StructuralSet::random(3, &mut rng)).unwrap();
        let z = [0.3, -0.7, 0.45];
        assert!(Kernel::Psi.eval(&ctx, &z).max_diff(&ctx.k_psi(&z).unwrap()) < 1e-15);
        assert!(Kernel::Phi.eval(&ctx, &z).max_diff(&ctx.k_phi(&z).unwrap()) < 1e-15);
        assert!(Kernel::Repr.eval(&ctx, &z).max_diff(&ctx.k_repr(&z).unwrap()) < 1e-14);
        let fast = Kernel3::new(&ctx).unwrap();
        let rho = Multivector::random(3, &mut rng);
        for kernel in [Kernel::Psi, Kernel::Phi, Kernel::Repr] {
            let k = fast.eval(kernel, &z);
            assert!(from_c8(&k).max_diff(&kernel.eval(&ctx, &z)) < 1e-14);
            let mut acc = [0.0; 8];
            fast.gp_acc(&k, &to_c8(&rho), 2.0, &mut acc);
            assert!(from_c8(&acc).max_diff(&kernel.eval(&ctx, &z).gp(&rho).scale(2.0)) < 1e-13);
        }
    }
}
