//! Closed-form integrals of `1/|z|`, `z_i/|z|^3` and `z_i z_j/|z|^3` over
//! axis-aligned boxes, built from the potential of a rectangle.

use crate::geometry::P3;

/// Antiderivative of `1/sqrt(c² + u² + v²)` in `u` and `v`, with the terms
/// depending on one variable only dropped (they cancel in corner sums).
fn rect_corner(c: f64, u: f64, v: f64) -> f64 {
    let r = (c * c + u * u + v * v).sqrt();
    let ru = (c * c + u * u).sqrt();
    let rv = (c * c + v * v).sqrt();
    let mut f = 0.0;
    if ru > 0.0 {
        f += u * (v / ru).asinh();
    }
    if rv > 0.0 {
        f += v * (u / rv).asinh();
    }
    let ac = c.abs();
    if ac > 0.0 {
        f -= ac * (u * v).atan2(ac * r);
    }
    f
}

/// `∫∫ 1/sqrt(c² + u² + v²)` over `[u0,u1] × [v0,v1]`.
pub fn rect_potential(c: f64, u: [f64; 2], v: [f64; 2]) -> f64 {
    rect_corner(c, u[1], v[1]) - rect_corner(c, u[0], v[1]) - rect_corner(c, u[1], v[0]) + rect_corner(c, u[0], v[0])
}

/// `∫ sqrt(s² + v²) dv`.
fn root_antiderivative(s: f64, v: f64) -> f64 {
    if s > 0.0 {
        0.5 * (v * (s * s + v * v).sqrt() + s * s * (v / s).asinh())
    } else {
        0.5 * v * v.abs()
    }
}

/// `∫∫ u / sqrt(c² + u² + v²)` over `[u0,u1] × [v0,v1]`.
pub fn rect_moment(c: f64, u: [f64; 2], v: [f64; 2]) -> f64 {
    let col = |uu: f64| {
        let s = (c * c + uu * uu).sqrt();
        root_antiderivative(s, v[1]) - root_antiderivative(s, v[0])
    };
    col(u[1]) - col(u[0])
}

/// The two axes other than `k`, in increasing order.
fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Box `[lo, hi]` in the variable `z = y - x`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedBox {
    pub lo: P3,
    pub hi: P3,
}

impl ShiftedBox {
    pub fn new(min: &P3, side: f64, x: &P3) -> Self {
        let lo = [min[0] - x[0], min[1] - x[1], min[2] - x[2]];
        Self {
            lo,
            hi: [lo[0] + side, lo[1] + side, lo[2] + side],
        }
    }

    fn range(&self, k: usize) -> [f64; 2] {
        [self.lo[k], self.hi[k]]
    }

    /// `∫∫ 1/|z|` over the face `z_k = c`.
    fn face_potential(&self, k: usize, c: f64) -> f64 {
        let (a, b) = others(k);
        rect_potential(c, self.range(a), self.range(b))
    }

    /// `∫ 1/|z| dz`, from `div(z/|z|) = 2/|z|`.
    pub fn inv_r(&self) -> f64 {
        (0..3)
            .map(|k| 0.5 * (self.hi[k] * self.face_potential(k, self.hi[k]) - self.lo[k] * self.face_potential(k, self.lo[k])))
            .sum()
    }

    /// `∫ z_i/|z|^3 dz = -∫ ∂_i(1/|z|) dz`.
    pub fn grad_kernel(&self) -> P3 {
        let mut g = [0.0; 3];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = self.face_potential(k, self.lo[k]) - self.face_potential(k, self.hi[k]);
        }
        g
    }

    /// `∫ z_i z_j/|z|^3 dz = δ_ij ∫1/|z| - ∫ ∂_j(z_i/|z|) dz`, row-major.
    pub fn second_moments(&self, inv_r: f64) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                let face = |c: f64| {
                    if i == j {
                        c * self.face_potential(j, c)
                    } else {
                        let (a, b) = others(j);
                        let other = if a == i { b } else { a };
                        rect_moment(c, self.range(i), self.range(other))
                    }
                };
                let flux = face(self.hi[j]) - face(self.lo[j]);
                out[i * 3 + j] = if i == j { inv_r } else { 0.0 } - flux;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tensor Gauss–Legendre on a box that stays away from the origin.
    fn gauss<F: Fn(&P3) -> f64>(b: &ShiftedBox, n: usize, f: F) -> f64 {
        let (x, w) = crate::integral::gauss_legendre(n);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = [
                        b.lo[0] + (b.hi[0] - b.lo[0]) * x[i],
                        b.lo[1] + (b.hi[1] - b.lo[1]) * x[j],
                        b.lo[2] + (b.hi[2] - b.lo[2]) * x[k],
                    ];
                    s += w[i] * w[j] * w[k] * f(&p);
                }
            }
        }
        s * (0..3).map(|k| b.hi[k] - b.lo[k]).product::<f64>()
    }

    fn r(p: &P3) -> f64 {
        (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    }

    #[test]
    fn far_box_matches_gauss() {
        let b = ShiftedBox::new(&[0.4, -0.3, 0.7], 0.5, &[0.0; 3]);
        let j = b.inv_r();
        assert!((j - gauss(&b, 12, |p| 1.0 / r(p))).abs() < 1e-12);
        let g = b.grad_kernel();
        let mm = b.second_moments(j);
        for i in 0..3 {
            assert!((g[i] - gauss(&b, 12, |p| p[i] / r(p).powi(3))).abs() < 1e-11);
            for k in 0..3 {
                let q = gauss(&b, 12, |p| p[i] * p[k] / r(p).powi(3));
                assert!((mm[i * 3 + k] - q).abs() < 1e-11, "{i}{k}");
            }
        }
    }

    #[test]
    fn singular_box_is_additive() {
        // A box containing the origin equals the sum of its eight octant pieces.
        let x = [0.13, 0.21, 0.17];
        let whole = ShiftedBox::new(&[0.0; 3], 0.5, &x);
        let j = whole.inv_r();
        let g = whole.grad_kernel();
        let mm = whole.second_moments(j);
        let (mut js, mut gs, mut ms) = (0.0, [0.0; 3], [0.0; 9]);
        for lo in [[0.0, 0.0, 0.0], [0.13, 0.0, 0.0], [0.0, 0.21, 0.0], [0.13, 0.21, 0.0]] {
            for zlo in [0.0, 0.17] {
                let mn = [lo[0], lo[1], zlo];
                let mx = [
                    if lo[0] == 0.0 { 0.13 } else { 0.5 },
                    if lo[1] == 0.0 { 0.21 } else { 0.5 },
                    if zlo == 0.0 { 0.17 } else { 0.5 },
                ];
                let b = ShiftedBox {
                    lo: [mn[0] - x[0], mn[1] - x[1], mn[2] - x[2]],
                    hi: [mx[0] - x[0], mx[1] - x[1], mx[2] - x[2]],
                };
                let jb = b.inv_r();
                js += jb;
                let gb = b.grad_kernel();
                let mb = b.second_moments(jb);
                for k in 0..3 {
                    gs[k] += gb[k];
                }
                for k in 0..9 {
                    ms[k] += mb[k];
                }
            }
        }
        assert!((j - js).abs() < 1e-13);
        for k in 0..3 {
            assert!((g[k] - gs[k]).abs() < 1e-13);
        }
        for k in 0..9 {
            assert!((mm[k] - ms[k]).abs() < 1e-13);
        }
        // Trace identity: Σ_i z_i²/|z|³ = 1/|z|.
        assert!((mm[0] + mm[4] + mm[8] - j).abs() < 1e-13);
    }

    #[test]
    fn centered_cube_symmetry() {
        let b = ShiftedBox::new(&[-0.5; 3], 1.0, &[0.0; 3]);
        let g = b.grad_kernel();
        assert!(g.iter().all(|v| v.abs() < 1e-14));
        let j = b.inv_r();
        // ∫_{[-1/2,1/2]^3} 1/|z| = 2.38008... (tabulated Newton potential of the unit cube).
        assert!((j - 2.380_077_7).abs() < 1e-6, "{j}");
        let mm = b.second_moments(j);
        assert!((mm[0] - j / 3.0).abs() < 1e-13 && mm[1].abs() < 1e-13);
    }
}
