//! Boundary conditions, decay at infinity and `(φ,ψ)`-harmonicity of a solution.

use rayon::prelude::*;
use serde::Serialize;

use super::{RHProblem, RHSolution, SolutionKind, SolverMode};
use crate::clifford::Multivector;
use crate::error::Result;
use crate::geometry::{add, norm, scale, P3};
use crate::integral::{interpolate, one_sided_limit, Side};
use crate::operators::dirac_fd;
use crate::stats::loglog_slope;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Boundary points checked; `None` checks every jet sample (fractal) or every centroid (smooth).
    pub boundary_samples: Option<usize>,
    /// Interior and exterior probes for the harmonicity residual, each.
    pub harmonic_probes: usize,
    /// Finite-difference step for `φ∂` of `ψ∂u`.
    pub fd_step: f64,
    /// Exterior ray direction and radii, in units of the circumradius of `Γ`.
    pub ray: P3,
    pub radii: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            boundary_samples: Some(10),
            harmonic_probes: 3,
            fd_step: 0.02,
            ray: [0.48, 0.64, 0.6],
            radii: vec![4.0, 8.0, 16.0, 32.0, 64.0],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryResidual {
    pub point: P3,
    /// `|u⁺ - u⁻A - g̃|`.
    pub first: f64,
    /// `|[ψ∂u]⁺ - [ψ∂u]⁻B - ψ∂g̃|`.
    pub second: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    pub u_norms: Vec<f64>,
    pub du_norms: Vec<f64>,
    /// Slope of `ln|u|` against `ln|x|`; `None` when `u` vanishes on the ray.
    pub u_slope: Option<f64>,
    pub du_slope: Option<f64>,
    /// `|u_slope + (m-2)| ≤ 0.3`, or `u` zero to rounding on the whole ray.
    pub u_decays: bool,
    pub du_decays: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RHReport {
    pub mode: SolverMode,
    pub boundary: Vec<BoundaryResidual>,
    pub first_max: f64,
    pub second_max: f64,
    pub decay: DecayFit,
    /// `|φ∂ψ∂u|` at interior then exterior probes.
    pub harmonicity: Vec<f64>,
    pub harmonicity_max: f64,
}

/// Tolerance on fitted decay slopes.
pub const SLOPE_SLACK: f64 = 0.3;

/// Norms below this are rounding noise and carry no slope.
pub const DECAY_FLOOR: f64 = 1e-13;

fn stride(n: usize, k: Option<usize>) -> Vec<usize> {
    match k {
        Some(k) if k < n => (0..k).map(|i| i * n / k).collect(),
        _ => (0..n).collect(),
    }
}

fn max_of(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, f64::max)
}

pub fn verify_rh_conditions(solution: &RHSolution, problem: &RHProblem, options: &VerifyOptions) -> Result<RHReport> {
    let boundary = match &solution.kind {
        SolutionKind::Fractal(f) => {
            let samples = &problem.jet.samples;
            stride(samples.len(), options.boundary_samples)
                .into_par_iter()
                .map(|i| {
                    let x = samples[i].point;
                    let t = f.terms(&x);
                    let first = (&(&t.u_plus - &t.u_minus.gp(&problem.a)) - &t.g_tilde).max_abs();
                    let second = (&(&t.du_plus - &t.du_minus.gp(&problem.b)) - &t.v1).max_abs();
                    BoundaryResidual { point: x, first, second }
                })
                .collect::<Vec<_>>()
        }
        SolutionKind::Smooth(s) => {
            let mesh = solution.mesh();
            stride(mesh.num_triangles(), options.boundary_samples)
                .into_par_iter()
                .map(|t| -> Result<BoundaryResidual> {
                    let x = mesh.centroids()[t];
                    let n = mesh.normals()[t];
                    let h = mesh.local_spacing(&x);
                    let lim = |f: &dyn Fn(&P3) -> Result<Multivector>, side| one_sided_limit(f, &x, &n, h, side);
                    let up = lim(&|p| s.u_plus(p), Side::Interior)?;
                    let um = lim(&|p| s.u_minus(p), Side::Exterior)?;
                    let dp = lim(&|p| s.psi_derivative_plus(p), Side::Interior)?;
                    let dm = lim(&|p| s.psi_derivative_minus(p), Side::Exterior)?;
                    let g = interpolate(mesh, s.g_tilde(), t, &x);
                    let dg = interpolate(mesh, s.gradient(), t, &x);
                    Ok(BoundaryResidual {
                        point: x,
                        first: (&(&up - &um.gp(&problem.a)) - &g).max_abs(),
                        second: (&(&dp - &dm.gp(&problem.b)) - &dg).max_abs(),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let first_max = max_of(boundary.iter().map(|b| b.first));
    let second_max = max_of(boundary.iter().map(|b| b.second));
    let decay = decay_fit(solution, problem, options)?;
    let harmonicity = harmonicity(solution, problem, options)?;
    let harmonicity_max = max_of(harmonicity.iter().copied());
    Ok(RHReport {
        mode: problem.mode,
        boundary,
        first_max,
        second_max,
        decay,
        harmonicity,
        harmonicity_max,
    })
}

/// `|u|` and `|ψ∂u|` along an exterior ray with fitted log-log slopes.
pub fn decay_fit(solution: &RHSolution, problem: &RHProblem, options: &VerifyOptions) -> Result<DecayFit> {
    let bb = solution.mesh().bounding_box();
    let (c, r) = (bb.center(), bb.circumradius());
    let dir = scale(&options.ray, 1.0 / norm(&options.ray));
    let pts: Vec<P3> = options.radii.iter().map(|k| add(&c, &scale(&dir, k * r))).collect();
    let values = pts
        .par_iter()
        .map(|x| Ok((solution.u_minus(x)?.norm(), solution.psi_derivative_minus(x)?.norm())))
        .collect::<Result<Vec<_>>>()?;
    let dists: Vec<f64> = pts.iter().map(|x| norm(x)).collect();
    let u_norms: Vec<f64> = values.iter().map(|v| v.0).collect();
    let du_norms: Vec<f64> = values.iter().map(|v| v.1).collect();
    let m = problem.ctx.m as f64;
    let slope = |ys: &[f64]| if ys.iter().all(|y| *y > DECAY_FLOOR) { loglog_slope(&dists, ys) } else { None };
    let decays = |ys: &[f64], s: Option<f64>, rate: f64| match s {
        Some(s) => (s + rate).abs() <= SLOPE_SLACK,
        None => ys.iter().all(|y| *y <= DECAY_FLOOR),
    };
    let u_slope = slope(&u_norms);
    let du_slope = slope(&du_norms);
    Ok(DecayFit {
        u_decays: decays(&u_norms, u_slope, m - 2.0),
        du_decays: decays(&du_norms, du_slope, m - 1.0),
        radii: dists,
        u_norms,
        du_norms,
        u_slope,
        du_slope,
    })
}

/// Probe points off `Γ`: inside at a third of the inradius scale, outside at twice the circumradius.
pub fn probe_points(solution: &RHSolution, count: usize) -> (Vec<P3>, Vec<P3>) {
    let bb = solution.mesh().bounding_box();
    let (c, r) = (bb.center(), bb.circumradius());
    let e = bb.extent();
    let inner = 0.15 * e[0].min(e[1]).min(e[2]);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let dirs: Vec<P3> = (0..count.max(1))
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count.max(1) as f64;
            let s = (1.0 - z * z).sqrt();
            let a = golden * i as f64 + 0.3;
            [s * a.cos(), s * a.sin(), z]
        })
        .take(count)
        .collect();
    let inside = dirs
        .iter()
        .map(|d| add(&c, &scale(d, inner)))
        .filter(|p| solution.inside(p))
        .collect();
    let outside = dirs.iter().map(|d| add(&c, &scale(d, 1.5 * r))).collect();
    (inside, outside)
}

/// `|φ∂(ψ∂u)|` by central differences; fractal solutions share one plan per stencil.
fn harmonicity(solution: &RHSolution, problem: &RHProblem, options: &VerifyOptions) -> Result<Vec<f64>> {
    let (inside, outside) = probe_points(solution, options.harmonic_probes);
    let h = options.fd_step;
    let phi = &problem.ctx.phi;
    let probes: Vec<(P3, bool)> = inside.into_iter().map(|p| (p, true)).chain(outside.into_iter().map(|p| (p, false))).collect();
    probes
        .par_iter()
        .map(|(x, interior)| {
            let r = match &solution.kind {
                SolutionKind::Fractal(f) => {
                    let plan = f.plan(x, 2.0 * h);
                    dirac_fd(
                        |p| {
                            let (a, b) = f.psi_derivative_with(&plan, &[p[0], p[1], p[2]]);
                            Ok(if *interior { a } else { b })
                        },
                        phi,
                        x,
                        h,
                    )?
                }
                SolutionKind::Smooth(s) => dirac_fd(
                    |p| {
                        let p = [p[0], p[1], p[2]];
                        if *interior {
                            s.psi_derivative_plus(&p)
                        } else {
                            s.psi_derivative_minus(&p)
                        }
                    },
                    phi,
                    x,
                    h,
                )?,
            };
            Ok(r.max_abs())
        })
        .collect()
}

/// `|ψ∂u - dirac_fd(u)|` at `x`, with the side fixed by `x`.
pub fn psi_derivative_fd_gap(solution: &RHSolution, problem: &RHProblem, x: &P3, h: f64) -> Result<f64> {
    let interior = solution.inside(x);
    let psi = &problem.ctx.psi;
    let (exact, fd) = match &solution.kind {
        SolutionKind::Fractal(f) => {
            let plan = f.plan(x, 2.0 * h);
            let (a, b) = f.psi_derivative_with(&plan, x);
            let fd = dirac_fd(
                |p| {
                    let t = f.terms_with(&plan, &[p[0], p[1], p[2]]);
                    Ok(if interior { t.u_plus } else { t.u_minus })
                },
                psi,
                x,
                h,
            )?;
            (if interior { a } else { b }, fd)
        }
        SolutionKind::Smooth(s) => {
            let exact = if interior { s.psi_derivative_plus(x)? } else { s.psi_derivative_minus(x)? };
            let fd = dirac_fd(
                |p| {
                    let p = [p[0], p[1], p[2]];
                    if interior {
                        s.u_plus(&p)
                    } else {
                        s.u_minus(&p)
                    }
                },
                psi,
                x,
                h,
            )?;
            (exact, fd)
        }
    };
    Ok(exact.max_diff(&fd))
}
