//! Constructive Whitney extension of a sampled jet off the boundary.
//!
//! The complement of the sample set `F` of the jet is tiled lazily by dyadic
//! cubes `Q` with `dist(center(Q), F) ≥ 1.5|Q|` whose parent fails that test. Each cube
//! carries the degree-1 Taylor polynomial of the jet at the sample nearest to
//! its center, blended by a partition of unity built from quintic bumps on
//! the doubled cubes `2Q`, and the result is multiplied by a smooth cutoff.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use super::jet::LipschitzJet;
use super::kdtree::KdTree;
use super::mesh::BoundaryMesh;
use super::{norm, sub, P3};
use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::field::{Derivatives, SmoothField};

const ACCEPT: f64 = 1.5;
const INFLATE: f64 = 0.5;
const SHARDS: usize = 64;

type Key = (i32, i64, i64, i64);

/// Quintic smoothstep `6u^5 - 15u^4 + 10u^3` and its first two derivatives.
fn smoothstep(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if u >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let u2 = u * u;
        (
            u2 * u * (10.0 - 15.0 * u + 6.0 * u2),
            30.0 * u2 * (1.0 - u) * (1.0 - u),
            60.0 * u * (1.0 - u) * (1.0 - 2.0 * u),
        )
    }
}

/// 1-d profile of `[a, a+s]`: quintic ramps of width `2w`, `w = INFLATE·s`,
/// centered on the faces, so the support is `[a-w, a+s+w]`.
fn profile(t: f64, a: f64, s: f64) -> (f64, f64, f64) {
    let w = s * INFLATE;
    let (v, d, dd) = if t < a + s / 2.0 {
        let (v, d, dd) = smoothstep((t - (a - w)) / (2.0 * w));
        (v, d, dd)
    } else {
        let (v, d, dd) = smoothstep(((a + s + w) - t) / (2.0 * w));
        (v, -d, dd)
    };
    (v, d / (2.0 * w), dd / (4.0 * w * w))
}

/// `e^{-1/t}` and derivatives, zero for `t ≤ 0`.
fn flat(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / t).exp();
    let t2 = t * t;
    (f, f / t2, f * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// C^∞ step from 1 (`t ≤ 0`) to 0 (`t ≥ 1`) with derivatives.
fn smooth_cut(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let (f, f1, f2) = flat(t);
    let (g, g1, g2) = flat(1.0 - t);
    let s = f + g;
    let s1 = f1 - g1;
    let s2 = f2 + g2;
    let tau = f / s;
    let tau1 = (f1 - tau * s1) / s;
    let tau2 = (f2 - 2.0 * tau1 * s1 - tau * s2) / s;
    (1.0 - tau, -tau1, -tau2)
}

#[derive(Debug)]
pub struct WhitneyExtension {
    jet: LipschitzJet,
    mesh: Arc<BoundaryMesh>,
    tree: KdTree,
    origin: P3,
    base_side: f64,
    cutoff_center: P3,
    cutoff_radius: f64,
    cutoff_width: f64,
    distances: Vec<Mutex<HashMap<Key, f64>>>,
    nearest: Vec<Mutex<HashMap<Key, usize>>>,
}

/// Cube of the complement decomposition touching an evaluation point.
#[derive(Clone, Copy, Debug)]
pub struct ExtensionCube {
    pub level: i32,
    pub min: P3,
    pub side: f64,
    pub sample: usize,
}

fn shard(k: &Key) -> usize {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    k.hash(&mut h);
    (h.finish() as usize) % SHARDS
}

impl WhitneyExtension {
    pub fn new(jet: LipschitzJet, mesh: Arc<BoundaryMesh>) -> Result<Self> {
        if jet.samples.is_empty() {
            return Err(Error::Invalid("empty jet".into()));
        }
        let tree = KdTree::build(jet.points());
        let bb = mesh.bounding_box();
        let ext = bb.extent();
        let base_side = ext[0].max(ext[1]).max(ext[2]) * 1.001;
        let c = bb.center();
        let origin = [c[0] - base_side / 2.0, c[1] - base_side / 2.0, c[2] - base_side / 2.0];
        let r = bb.circumradius();
        Ok(Self {
            jet,
            mesh,
            tree,
            origin,
            base_side,
            cutoff_center: c,
            cutoff_radius: 2.0 * r,
            cutoff_width: r,
            distances: (0..SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
            nearest: (0..SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
        })
    }

    pub fn jet(&self) -> &LipschitzJet {
        &self.jet
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    /// Distance to the closed set carrying the jet, the sample points.
    fn sample_distance(&self, p: &P3) -> f64 {
        norm(&sub(p, self.tree.point(self.tree.nearest(p).expect("non-empty jet"))))
    }

    fn side(&self, level: i32) -> f64 {
        self.base_side * 2f64.powi(-level)
    }

    fn center_distance(&self, k: Key) -> f64 {
        let sh = shard(&k);
        if let Some(d) = self.distances[sh].lock().unwrap().get(&k) {
            return *d;
        }
        let s = self.side(k.0);
        let c = [
            self.origin[0] + (k.1 as f64 + 0.5) * s,
            self.origin[1] + (k.2 as f64 + 0.5) * s,
            self.origin[2] + (k.3 as f64 + 0.5) * s,
        ];
        let d = self.sample_distance(&c);
        self.distances[sh].lock().unwrap().insert(k, d);
        d
    }

    fn accepted(&self, k: Key) -> bool {
        self.center_distance(k) >= ACCEPT * self.side(k.0) * 3f64.sqrt()
    }

    fn is_member(&self, k: Key) -> bool {
        let parent = (k.0 - 1, k.1.div_euclid(2), k.2.div_euclid(2), k.3.div_euclid(2));
        self.accepted(k) && !self.accepted(parent)
    }

    fn sample_for(&self, k: Key) -> usize {
        let sh = shard(&k);
        if let Some(i) = self.nearest[sh].lock().unwrap().get(&k) {
            return *i;
        }
        let s = self.side(k.0);
        let c = [
            self.origin[0] + (k.1 as f64 + 0.5) * s,
            self.origin[1] + (k.2 as f64 + 0.5) * s,
            self.origin[2] + (k.3 as f64 + 0.5) * s,
        ];
        let i = self.tree.nearest(&c).expect("non-empty jet");
        self.nearest[sh].lock().unwrap().insert(k, i);
        i
    }

    /// Decomposition cubes whose inflated version contains `x`.
    pub fn cubes_at(&self, x: &P3) -> Vec<ExtensionCube> {
        let d = self.sample_distance(x);
        if d <= 0.0 {
            return Vec::new();
        }
        let diam0 = self.base_side * 3f64.sqrt();
        let lo = (diam0 * 0.45 / d).log2().ceil() as i32;
        let hi = (diam0 * 5.0 / d).log2().floor() as i32;
        let mut out = Vec::new();
        for level in lo..=hi {
            let s = self.side(level);
            let mut ranges = [(0i64, 0i64); 3];
            for a in 0..3 {
                let t = (x[a] - self.origin[a]) / s;
                let first = (t - 1.0 - INFLATE).ceil() as i64;
                let last = (t + INFLATE).floor() as i64;
                ranges[a] = (first, last);
            }
            for i in ranges[0].0..=ranges[0].1 {
                for j in ranges[1].0..=ranges[1].1 {
                    for k in ranges[2].0..=ranges[2].1 {
                        let key = (level, i, j, k);
                        if self.is_member(key) {
                            out.push(ExtensionCube {
                                level,
                                min: [
                                    self.origin[0] + i as f64 * s,
                                    self.origin[1] + j as f64 * s,
                                    self.origin[2] + k as f64 * s,
                                ],
                                side: s,
                                sample: self.sample_for(key),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Partition-of-unity weights `φ_k(x)` of the cubes touching `x`.
    pub fn partition_weights(&self, x: &P3) -> Vec<f64> {
        let cubes = self.cubes_at(x);
        let b: Vec<f64> = cubes
            .iter()
            .map(|c| (0..3).map(|a| profile(x[a], c.min[a], c.side).0).product())
            .collect();
        let total: f64 = b.iter().sum();
        b.iter().map(|v| v / total).collect()
    }

    fn cutoff(&self, x: &P3) -> (f64, P3, [f64; 9]) {
        let v = sub(x, &self.cutoff_center);
        let r = norm(&v);
        let (h, h1, h2) = smooth_cut((r - self.cutoff_radius) / self.cutoff_width);
        let mut grad = [0.0; 3];
        let mut hess = [0.0; 9];
        if h1 != 0.0 || h2 != 0.0 {
            let (d1, d2) = (h1 / self.cutoff_width, h2 / (self.cutoff_width * self.cutoff_width));
            let u = [v[0] / r, v[1] / r, v[2] / r];
            for i in 0..3 {
                grad[i] = d1 * u[i];
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    hess[i * 3 + j] = d2 * u[i] * u[j] + d1 / r * (delta - u[i] * u[j]);
                }
            }
        }
        (h, grad, hess)
    }

    /// Derivatives of the extension at `x ∉ Γ`.
    pub fn try_derivatives(&self, x: &[f64], order: usize) -> Result<Derivatives> {
        let x = super::to_p3(x);
        let m = self.jet.m;
        let (chi, chi_g, chi_h) = self.cutoff(&x);
        if chi == 0.0 {
            return Ok(Derivatives::zero(m, order));
        }
        let cubes = self.cubes_at(&x);
        if cubes.is_empty() {
            return Err(Error::OnBoundary);
        }
        // N = Σ P_k b_k and B = Σ b_k with derivatives.
        let mut bsum = 0.0;
        let mut bg = [0.0; 3];
        let mut bh = [0.0; 9];
        let mut n = Multivector::zero(m);
        let mut ng = vec![Multivector::zero(m); 3];
        let mut nh = vec![Multivector::zero(m); 9];
        for c in &cubes {
            let p: Vec<(f64, f64, f64)> = (0..3).map(|a| profile(x[a], c.min[a], c.side)).collect();
            let b = p[0].0 * p[1].0 * p[2].0;
            if b == 0.0 {
                continue;
            }
            let mut g = [0.0; 3];
            let mut h = [0.0; 9];
            for i in 0..3 {
                g[i] = (0..3).map(|a| if a == i { p[a].1 } else { p[a].0 }).product();
                for j in 0..3 {
                    h[i * 3 + j] = (0..3)
                        .map(|a| match (a == i, a == j) {
                            (true, true) => p[a].2,
                            (true, false) | (false, true) => p[a].1,
                            _ => p[a].0,
                        })
                        .product();
                }
            }
            let s = &self.jet.samples[c.sample];
            let pk = s.taylor(&x);
            bsum += b;
            n.axpy(b, &pk);
            for i in 0..3 {
                bg[i] += g[i];
                ng[i].axpy(g[i], &pk);
                ng[i].axpy(b, &s.grad[i]);
                for j in 0..3 {
                    bh[i * 3 + j] += h[i * 3 + j];
                    let nij = &mut nh[i * 3 + j];
                    nij.axpy(h[i * 3 + j], &pk);
                    nij.axpy(g[j], &s.grad[i]);
                    nij.axpy(g[i], &s.grad[j]);
                }
            }
        }
        // E = N / B by the quotient rule.
        let e = n.scale(1.0 / bsum);
        let mut eg = Vec::with_capacity(3);
        for i in 0..3 {
            let mut v = ng[i].clone();
            v.axpy(-bg[i], &e);
            eg.push(v.scale(1.0 / bsum));
        }
        let mut eh = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = nh[i * 3 + j].clone();
                v.axpy(-bg[j], &eg[i]);
                v.axpy(-bg[i], &eg[j]);
                v.axpy(-bh[i * 3 + j], &e);
                eh.push(v.scale(1.0 / bsum));
            }
        }
        // Multiply by the cutoff χ.
        let mut d = Derivatives::zero(m, order);
        d.value = e.scale(chi);
        if order >= 1 {
            for i in 0..3 {
                let mut v = eg[i].scale(chi);
                v.axpy(chi_g[i], &e);
                d.grad[i] = v;
            }
        }
        if order >= 2 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = eh[i * 3 + j].scale(chi);
                    v.axpy(chi_g[i], &eg[j]);
                    v.axpy(chi_g[j], &eg[i]);
                    v.axpy(chi_h[i * 3 + j], &e);
                    d.hess[i * 3 + j] = v;
                }
            }
        }
        Ok(d)
    }

    /// Number of cached cube distances (diagnostics).
    pub fn cache_len(&self) -> usize {
        self.distances.iter().map(|s| s.lock().unwrap().len()).sum()
    }
}

impl SmoothField for WhitneyExtension {
    fn dim(&self) -> usize {
        self.jet.m
    }

    /// On `Γ` itself the jet's Taylor data at the nearest sample is returned.
    fn derivatives(&self, x: &[f64], order: usize) -> Derivatives {
        match self.try_derivatives(x, order) {
            Ok(d) => d,
            Err(_) => {
                let p = super::to_p3(x);
                let s = &self.jet.samples[self.tree.nearest(&p).expect("non-empty jet")];
                let mut d = Derivatives::zero(self.jet.m, order);
                d.value = s.taylor(&p);
                if order >= 1 {
                    d.grad = s.grad.to_vec();
                }
                d
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AnalyticField;
    use crate::geometry::jet::jet_from_function;
    use crate::geometry::mesh::icosphere;
    use crate::operators::hessian_fd;

    #[test]
    fn cut_profile_is_c2() {
        let (v0, d0, _) = smooth_cut(0.5);
        assert!((v0 - 0.5).abs() < 1e-15);
        let h = 1e-5;
        let fd = (smooth_cut(0.3 + h).0 - smooth_cut(0.3 - h).0) / (2.0 * h);
        assert!((fd - smooth_cut(0.3).1).abs() < 1e-6);
        let fd2 = (smooth_cut(0.3 + h).1 - smooth_cut(0.3 - h).1) / (2.0 * h);
        assert!((fd2 - smooth_cut(0.3).2).abs() < 1e-5);
        assert!(d0 < 0.0);
    }

    #[test]
    fn constant_jet_extends_to_constant() {
        let mesh = Arc::new(icosphere([0.0; 3], 1.0, 2).unwrap());
        let c = Multivector::blade(3, 0b101, 2.5);
        let f = AnalyticField::poly(crate::operators::PolyField::constant(c.clone()));
        let jet = jet_from_function(&f, &mesh, 1.0).unwrap();
        let ext = WhitneyExtension::new(jet, mesh).unwrap();
        for x in [[0.3, 0.1, -0.2], [0.0, 0.95, 0.1], [1.3, -0.4, 0.2]] {
            let d = ext.try_derivatives(&x, 2).unwrap();
            assert!(d.value.max_diff(&c) < 1e-12);
            assert!(d.grad.iter().all(|g| g.max_abs() < 1e-10));
            let w: f64 = ext.partition_weights(&x).iter().sum();
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let mesh = Arc::new(icosphere([0.0; 3], 1.0, 2).unwrap());
        let f = AnalyticField::by_name("gaussian-e12", 3).unwrap();
        let jet = jet_from_function(&f, &mesh, 1.0).unwrap();
        let ext = WhitneyExtension::new(jet, mesh).unwrap();
        let x = [0.2, 0.45, -0.3];
        let d = ext.try_derivatives(&x, 2).unwrap();
        let h = 1e-4;
        for i in 0..3 {
            let mut p = x;
            p[i] += h;
            let up = ext.try_derivatives(&p, 0).unwrap().value;
            p[i] -= 2.0 * h;
            let dn = ext.try_derivatives(&p, 0).unwrap().value;
            let fd = (&up - &dn).scale(0.5 / h);
            assert!(fd.max_diff(&d.grad[i]) < 1e-5, "axis {i}");
        }
        let hess = hessian_fd(&|p: &[f64]| ext.try_derivatives(p, 0).map(|d| d.value), 3, &x, 2e-4).unwrap();
        for k in 0..9 {
            assert!(hess[k].max_diff(&d.hess[k]) < 1e-3, "entry {k}");
        }
    }

    #[test]
    fn cutoff_gives_compact_support() {
        let mesh = Arc::new(icosphere([0.0; 3], 1.0, 1).unwrap());
        let f = AnalyticField::by_name("one", 3).unwrap();
        let jet = jet_from_function(&f, &mesh, 1.0).unwrap();
        let ext = WhitneyExtension::new(jet, mesh).unwrap();
        assert_eq!(ext.try_derivatives(&[20.0, 0.0, 0.0], 2).unwrap().value.max_abs(), 0.0);
    }
}
