//! Dyadic Whitney decomposition of a bounded domain and its d-sums.

use rayon::prelude::*;
use serde::Serialize;

use super::{add, Domain, P3};
use crate::error::{Error, Result};

/// Accept a cube once its center is this many diameters from the boundary.
pub const ACCEPT_RATIO: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CubeKind {
    /// Satisfies the Whitney proportionality condition.
    Whitney,
    /// Depth-limited leaf straddling the boundary collar (center inside Ω).
    Collar,
    /// Depth-limited leaf with center outside Ω that still meets `Γ`.
    Straddle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cube {
    pub min: P3,
    pub side: f64,
    pub depth: u32,
    /// Distance from the cube center to the boundary.
    pub center_distance: f64,
    pub kind: CubeKind,
}

impl Cube {
    pub fn diameter(&self) -> f64 {
        self.side * 3f64.sqrt()
    }

    pub fn center(&self) -> P3 {
        add(&self.min, &[self.side / 2.0; 3])
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(3)
    }

    pub fn max(&self) -> P3 {
        add(&self.min, &[self.side; 3])
    }

    /// Certified bounds on `dist(Q, Γ)` from the center distance.
    pub fn distance_bounds(&self) -> (f64, f64) {
        let r = self.diameter() / 2.0;
        ((self.center_distance - r).max(0.0), self.center_distance)
    }

    pub fn contains(&self, x: &P3) -> bool {
        (0..3).all(|k| x[k] >= self.min[k] && x[k] <= self.min[k] + self.side)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WhitneyCubeSet {
    pub cubes: Vec<Cube>,
    pub max_depth: u32,
    pub root_min: P3,
    pub root_side: f64,
}

impl WhitneyCubeSet {
    pub fn whitney(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter().filter(|c| c.kind == CubeKind::Whitney)
    }

    pub fn collar(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter().filter(|c| c.kind == CubeKind::Collar)
    }

    pub fn straddle(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter().filter(|c| c.kind == CubeKind::Straddle)
    }

    /// Volume of Whitney plus collar cubes.
    pub fn covered_volume(&self) -> f64 {
        self.cubes.iter().filter(|c| c.kind != CubeKind::Straddle).map(Cube::volume).sum()
    }

    pub fn whitney_volume(&self) -> f64 {
        self.whitney().map(Cube::volume).sum()
    }

    /// Fraction of Whitney cubes with certified `|Q| ≤ dist(Q,Γ) ≤ 4|Q|`.
    pub fn proportionality_fraction(&self) -> f64 {
        let mut n = 0usize;
        let mut ok = 0usize;
        for c in self.whitney() {
            n += 1;
            let (lo, hi) = c.distance_bounds();
            let q = c.diameter();
            if lo >= q * (1.0 - 1e-12) && hi <= 4.0 * q {
                ok += 1;
            }
        }
        if n == 0 {
            1.0
        } else {
            ok as f64 / n as f64
        }
    }

    /// Number of Whitney cubes per depth `0..=max_depth`.
    pub fn depth_counts(&self) -> Vec<usize> {
        let mut v = vec![0; self.max_depth as usize + 1];
        for c in self.whitney() {
            v[c.depth as usize] += 1;
        }
        v
    }
}

/// Whitney cubes of `domain` down to `max_depth` dyadic levels below a bounding cube.
///
/// Cubes whose center lies inside and at least `1.5|Q|` from the boundary are
/// accepted; cubes still undecided at `max_depth` become collar cubes when
/// their center is inside and straddle cubes otherwise.
pub fn whitney_decompose<D: Domain + ?Sized>(domain: &D, max_depth: u32) -> Result<WhitneyCubeSet> {
    if max_depth > 12 {
        return Err(Error::Invalid(format!("max_depth {max_depth} exceeds 12")));
    }
    let bb = domain.bbox();
    let ext = bb.extent();
    let side = ext[0].max(ext[1]).max(ext[2]) * 1.001;
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::Invalid("domain has an empty bounding box".into()));
    }
    let c = bb.center();
    let root_min = [c[0] - side / 2.0, c[1] - side / 2.0, c[2] - side / 2.0];

    // (min corner, inherited inside status)
    let mut level: Vec<(P3, Option<bool>)> = vec![(root_min, None)];
    let mut cubes = Vec::new();
    for depth in 0..=max_depth {
        let s = side / f64::from(1u32 << depth);
        let diam = s * 3f64.sqrt();
        let decided: Vec<(f64, bool)> = level
            .par_iter()
            .map(|(min, status)| {
                let center = add(min, &[s / 2.0; 3]);
                let d = domain.boundary_distance(&center);
                let inside = status.unwrap_or_else(|| domain.contains(&center));
                (d, inside)
            })
            .collect();
        let mut next = Vec::new();
        for ((min, _), (d, inside)) in level.iter().zip(decided) {
            let cube = Cube {
                min: *min,
                side: s,
                depth,
                center_distance: d,
                kind: CubeKind::Whitney,
            };
            if inside && d >= ACCEPT_RATIO * diam {
                cubes.push(cube);
            } else if !inside && d >= diam / 2.0 {
                continue;
            } else if depth == max_depth {
                let kind = if inside { CubeKind::Collar } else { CubeKind::Straddle };
                cubes.push(Cube { kind, ..cube });
            } else {
                let h = s / 2.0;
                let status = (d > h * 3f64.sqrt() / 2.0).then_some(inside);
                for k in 0..8 {
                    let off = [
                        if k & 1 != 0 { h } else { 0.0 },
                        if k & 2 != 0 { h } else { 0.0 },
                        if k & 4 != 0 { h } else { 0.0 },
                    ];
                    next.push((add(min, &off), status));
                }
            }
        }
        level = next;
    }
    Ok(WhitneyCubeSet {
        cubes,
        max_depth,
        root_min,
        root_side: side,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DSumReport {
    pub d: f64,
    pub total: f64,
    /// `(depth, increment Σ_{depth(Q)=k} |Q|^d, partial sum through k)`.
    pub per_depth: Vec<(u32, f64, f64)>,
}

impl DSumReport {
    /// Least-squares slope of `log2(increment)` against depth over `depths`.
    pub fn increment_slope(&self, from: u32, to: u32) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .per_depth
            .iter()
            .filter(|(k, inc, _)| *k >= from && *k <= to && *inc > 0.0)
            .map(|(k, inc, _)| (f64::from(*k), inc.log2()))
            .collect();
        crate::stats::fit_line(&pts).map(|f| f.slope)
    }

    /// Increments shrink across the depth window: the partial sums flatten.
    pub fn flattens(&self, from: u32, to: u32) -> bool {
        self.increment_slope(from, to).is_some_and(|s| s < 0.0)
    }
}

/// `Σ_Q |Q|^d` over Whitney cubes, with per-depth partial sums.
pub fn d_sum(cubes: &WhitneyCubeSet, d: f64) -> DSumReport {
    let counts: Vec<u64> = cubes.depth_counts().iter().map(|&c| c as u64).collect();
    d_sum_from_counts(&counts, cubes.root_side, d)
}

/// d-sum from cube counts per depth below a root cube of side `root_side`.
pub fn d_sum_from_counts(counts: &[u64], root_side: f64, d: f64) -> DSumReport {
    let mut partial = 0.0;
    let per_depth = counts
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let diam = root_side / 2f64.powi(k as i32) * 3f64.sqrt();
            let v = n as f64 * diam.powf(d);
            partial += v;
            (k as u32, v, partial)
        })
        .collect();
    DSumReport {
        d,
        total: partial,
        per_depth,
    }
}

/// Partial sums per depth of `Σ_Q |Q|^m dist(Q,Γ)^{(α-1)p}` with `p = (m-d)/(1-α)`,
/// the cube-sum bound on `∫_Ω dist^{(α-1)p}` for a Lip(1+α) extension.
pub fn lp_cube_sum(cubes: &WhitneyCubeSet, alpha: f64, d: f64) -> Vec<(u32, f64)> {
    let m = 3.0;
    let p = (m - d) / (1.0 - alpha);
    let mut inc = vec![0.0; cubes.max_depth as usize + 1];
    for c in cubes.whitney() {
        let dist = c.distance_bounds().0.max(c.diameter());
        inc[c.depth as usize] += c.diameter().powf(m) * dist.powf((alpha - 1.0) * p);
    }
    let mut partial = 0.0;
    inc.iter()
        .enumerate()
        .map(|(k, v)| {
            partial += v;
            (k as u32, partial)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, BoxDomain};
    use std::f64::consts::PI;

    #[test]
    fn unit_cube_volume_converges() {
        let mut prev_err = f64::INFINITY;
        for depth in [3, 4, 5] {
            let w = whitney_decompose(&BoxDomain::unit_cube(), depth).unwrap();
            let err = (w.covered_volume() - 1.0).abs();
            assert!(err < prev_err + 1e-12);
            prev_err = err;
            assert_eq!(w.proportionality_fraction(), 1.0);
            assert!(w.whitney_volume() <= 1.0 + 1e-12);
        }
        assert!(prev_err < 0.05);
    }

    #[test]
    fn ball_depth_five() {
        let w = whitney_decompose(
            &Ball {
                center: [0.0; 3],
                radius: 1.0,
            },
            5,
        )
        .unwrap();
        let v = 4.0 / 3.0 * PI;
        assert!((w.covered_volume() - v).abs() / v < 0.03);
        assert_eq!(w.proportionality_fraction(), 1.0);
    }

    #[test]
    fn cubes_are_disjoint() {
        let w = whitney_decompose(
            &Ball {
                center: [0.1, 0.0, 0.0],
                radius: 0.8,
            },
            4,
        )
        .unwrap();
        for (i, a) in w.cubes.iter().enumerate() {
            for b in &w.cubes[i + 1..] {
                let overlap = (0..3).all(|k| {
                    a.min[k] < b.min[k] + b.side - 1e-12 && b.min[k] < a.min[k] + a.side - 1e-12
                });
                assert!(!overlap);
            }
        }
    }
}
