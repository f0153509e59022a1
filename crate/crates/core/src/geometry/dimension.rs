//! Covering numbers and box-dimension estimates of meshed surfaces.

use std::collections::HashMap;

use serde::Serialize;

use super::mesh::BoundaryMesh;
use super::{add, dist, scale, sub, P3};
use crate::error::{Error, Result};
use crate::stats::fit_line;

/// Samples of the triangles `tris`, spaced at most `h` apart along each edge
/// direction. The grid is spanned from the vertex opposite the longest edge,
/// whose edge is sampled separately.
fn surface_samples(mesh: &BoundaryMesh, tris: &[usize], h: f64) -> Vec<P3> {
    let mut out = Vec::new();
    for &t in tris {
        let p = mesh.triangle_points(t);
        let lens = [dist(&p[1], &p[2]), dist(&p[2], &p[0]), dist(&p[0], &p[1])];
        let k = (0..3).max_by(|&i, &j| lens[i].total_cmp(&lens[j])).unwrap();
        let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
        let ab = sub(&b, &a);
        let ac = sub(&c, &a);
        let nu = ((lens[(k + 2) % 3] / h).ceil() as usize).max(1);
        let nv = ((lens[(k + 1) % 3] / h).ceil() as usize).max(1);
        for i in 0..=nu {
            let u = i as f64 / nu as f64;
            let jmax = ((1.0 - u) * nv as f64 + 1e-9).floor() as usize;
            for j in 0..=jmax {
                let v = j as f64 / nv as f64;
                out.push(add(&a, &add(&scale(&ab, u), &scale(&ac, v))));
            }
        }
        let n = ((lens[k] / h).ceil() as usize).max(1);
        let bc = sub(&c, &b);
        out.extend((1..n).map(|i| add(&b, &scale(&bc, i as f64 / n as f64))));
    }
    out
}

/// Greedy cover with samples visited in lexicographic `(z, y, x)` order of their
/// `τ`-cells, so the count does not depend on the mesh numbering.
fn greedy_cover(samples: &[P3], tau: f64) -> usize {
    let cell = |p: &P3| {
        (
            (p[0] / tau).floor() as i64,
            (p[1] / tau).floor() as i64,
            (p[2] / tau).floor() as i64,
        )
    };
    let mut order: Vec<((i64, i64, i64), usize)> = samples
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let (i, j, k) = cell(p);
            ((k, j, i), n)
        })
        .collect();
    order.sort_unstable();
    let mut grid: HashMap<(i64, i64, i64), Vec<P3>> = HashMap::new();
    let mut count = 0;
    for &((k, j, i), n) in &order {
        let p = &samples[n];
        let mut covered = false;
        'search: for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    if let Some(cs) = grid.get(&(i + di, j + dj, k + dk)) {
                        if cs.iter().any(|c| dist(c, p) <= tau) {
                            covered = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !covered {
            grid.entry((i, j, k)).or_default().push(*p);
            count += 1;
        }
    }
    count
}

fn check_tau(mesh: &BoundaryMesh, tau: f64) -> Result<()> {
    let resolution = 0.5 * mesh.min_edge();
    if !(tau >= resolution) {
        return Err(Error::BelowResolution { tau, resolution });
    }
    Ok(())
}

/// Greedy ball-cover count `N_Γ(τ)` (an upper bound for the minimal cover, up
/// to the sampling density `τ/4`).
pub fn covering_number(mesh: &BoundaryMesh, tau: f64) -> Result<usize> {
    check_tau(mesh, tau)?;
    let tris: Vec<usize> = (0..mesh.num_triangles()).collect();
    Ok(greedy_cover(&surface_samples(mesh, &tris, tau / 4.0), tau))
}

fn covering_numbers_of(mesh: &BoundaryMesh, tris: &[usize], taus: &[f64]) -> Vec<usize> {
    taus.iter()
        .map(|&tau| greedy_cover(&surface_samples(mesh, tris, tau / 4.0), tau))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxDimension {
    /// Reported estimate: the largest per-group slope.
    pub estimate: f64,
    /// Slope of the whole surface (counts summed over groups).
    pub whole: f64,
    /// `(face group, slope)`.
    pub per_group: Vec<(u32, f64)>,
    /// `(τ, N_Γ(τ))` for the whole surface.
    pub counts: Vec<(f64, usize)>,
}

/// Box dimension as the regression slope of `log N_Γ(τ)` against `log(1/τ)`.
///
/// A finite union has the largest box dimension of its parts, so meshes with
/// several face groups are also fitted group by group and the maximum is kept.
pub fn box_dimension_estimate(mesh: &BoundaryMesh, taus: &[f64]) -> Result<BoxDimension> {
    if taus.len() < 2 {
        return Err(Error::Invalid("need at least two radii".into()));
    }
    for &t in taus {
        check_tau(mesh, t)?;
    }
    let slope_of = |counts: &[usize]| {
        let pts: Vec<(f64, f64)> = taus
            .iter()
            .zip(counts)
            .map(|(t, n)| ((1.0 / t).ln(), (*n as f64).ln()))
            .collect();
        fit_line(&pts).map(|f| f.slope).unwrap_or(f64::NAN)
    };
    let mut groups: Vec<u32> = mesh.groups().to_vec();
    groups.sort_unstable();
    groups.dedup();
    // The union of the group covers covers the whole surface.
    let mut counts = vec![0usize; taus.len()];
    let mut per_group = Vec::with_capacity(groups.len());
    for &g in &groups {
        let c = covering_numbers_of(mesh, &mesh.group_triangles(g), taus);
        for (a, b) in counts.iter_mut().zip(&c) {
            *a += b;
        }
        per_group.push((g, slope_of(&c)));
    }
    let whole = slope_of(&counts);
    let estimate = per_group.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoxDimension {
        estimate,
        whole,
        per_group,
        counts: taus.iter().copied().zip(counts).collect(),
    })
}

/// `n` radii spaced geometrically from `hi` down to `lo`.
pub fn geometric_radii(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| hi * (lo / hi).powf(k as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// Partial integrals `∫_{τ_k}^{1} N_Γ(τ) τ^{d-1} dτ` over decreasing `τ_k`
/// (log-trapezoid on the given radii, which must start at or below 1).
pub fn d_summability_integral(counts: &[(f64, usize)], d: f64) -> Vec<(f64, f64)> {
    let f = |t: f64, n: usize| n as f64 * t.powf(d - 1.0) * t;
    let mut out = Vec::with_capacity(counts.len());
    let mut acc = 0.0;
    for k in 0..counts.len() {
        if k > 0 {
            let (t0, n0) = counts[k - 1];
            let (t1, n1) = counts[k];
            acc += 0.5 * (f(t0, n0) + f(t1, n1)) * (t0.ln() - t1.ln()).abs();
        }
        out.push((counts[k].0, acc));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::icosphere;

    #[test]
    fn below_resolution_rejected() {
        let m = icosphere([0.0; 3], 1.0, 2).unwrap();
        assert!(matches!(covering_number(&m, 1e-4), Err(Error::BelowResolution { .. })));
    }

    #[test]
    fn covering_shrinks_with_radius() {
        let m = icosphere([0.0; 3], 1.0, 3).unwrap();
        let a = covering_number(&m, 0.5).unwrap();
        let b = covering_number(&m, 0.25).unwrap();
        assert!(b > 2 * a);
    }

    #[test]
    fn integral_of_power_law() {
        // N = τ^{-2}, d = 2.5: ∫_{τ}^{1} τ^{-0.5} dτ = 2(1 - √τ).
        let taus = geometric_radii(1.0, 1e-4, 200);
        let counts: Vec<(f64, usize)> = taus.iter().map(|&t| (t, (t.powi(-2)).round() as usize)).collect();
        let last = d_summability_integral(&counts, 2.5).last().unwrap().1;
        assert!((last - 2.0 * (1.0 - 1e-2)).abs() < 0.02);
    }
}
