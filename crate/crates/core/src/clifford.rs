//! Dense arithmetic in the real Clifford algebra `R_{0,m}`.
//!
//! Coefficients are stored densely, one per basis blade. Blade `e_A` lives at
//! the index whose bit `i - 1` is set exactly when `i ∈ A`; index 0 is the
//! scalar part. Generators square to `-1` and anticommute.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;
pub const MIN_DIM: usize = 2;

/// Tolerance for the structural-set condition.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Condition-number threshold above which a multivector is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

type Coeffs = SmallVec<[f64; 16]>;

/// Sign of `e_a e_b` (as blades) in `R_{0,m}`; the product blade is `a ^ b`.
#[inline]
pub fn blade_sign(a: usize, b: usize) -> f64 {
    // Swaps needed to bring `b`'s generators past the higher ones of `a`.
    let mut swaps = 0u32;
    let mut x = a >> 1;
    while x != 0 {
        swaps += (x & b).count_ones();
        x >>= 1;
    }
    // Each shared generator contributes e_i e_i = -1.
    swaps += (a & b).count_ones();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn sign_table(m: usize) -> &'static [f64] {
    static TABLES: [OnceLock<Vec<f64>>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];
    TABLES[m].get_or_init(|| {
        let n = 1usize << m;
        let mut t = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                t[a * n + b] = blade_sign(a, b);
            }
        }
        t
    })
}

/// An element of `R_{0,m}` with `2^m` dense coefficients.
#[derive(Clone, PartialEq)]
pub struct Multivector {
    m: usize,
    coeffs: Coeffs,
}

impl Multivector {
    pub fn zero(m: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&m),
            "dimension {m} outside 1..={MAX_DIM}"
        );
        Self {
            m,
            coeffs: SmallVec::from_elem(0.0, 1 << m),
        }
    }

    pub fn scalar(m: usize, s: f64) -> Self {
        let mut a = Self::zero(m);
        a.coeffs[0] = s;
        a
    }

    pub fn one(m: usize) -> Self {
        Self::scalar(m, 1.0)
    }

    /// Basis blade `e_A` scaled by `value`, with `A` given as a bitmask.
    pub fn blade(m: usize, mask: usize, value: f64) -> Self {
        let mut a = Self::zero(m);
        assert!(mask < a.coeffs.len(), "blade mask {mask:#b} out of range");
        a.coeffs[mask] = value;
        a
    }

    /// Generator `e_i`, one-based like the algebra's notation.
    pub fn basis_vector(m: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= m, "generator index {i} out of 1..={m}");
        Self::blade(m, 1 << (i - 1), 1.0)
    }

    pub fn from_coeffs(m: usize, coeffs: &[f64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&m) {
            return Err(Error::UnsupportedDimension(m));
        }
        if coeffs.len() != 1 << m {
            return Err(Error::DimensionMismatch {
                left: 1 << m,
                right: coeffs.len(),
            });
        }
        Ok(Self {
            m,
            coeffs: SmallVec::from_slice(coeffs),
        })
    }

    /// Random coefficients drawn from a standard normal.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut a = Self::zero(m);
        for c in a.coeffs.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        a
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn grade(&self, k: usize) -> Self {
        let mut out = Self::zero(self.m);
        for (b, c) in self.coeffs.iter().enumerate() {
            if b.count_ones() as usize == k {
                out.coeffs[b] = *c;
            }
        }
        out
    }

    /// Grades carrying a coefficient larger than `tol` in magnitude.
    pub fn grades(&self, tol: f64) -> Vec<usize> {
        let mut g: Vec<usize> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(b, _)| b.count_ones() as usize)
            .collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// Grade-1 coefficients `(x_1, ..., x_m)`.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.coeffs[1 << i]).collect()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(s);
        out
    }

    pub fn scale_mut(&mut self, s: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
    }

    /// `self += s * other`.
    #[inline]
    pub fn axpy(&mut self, s: f64, other: &Multivector) {
        debug_assert_eq!(self.m, other.m);
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += s * o;
        }
    }

    /// Geometric product, failing on mismatched dimensions.
    pub fn geometric_product(&self, rhs: &Multivector) -> Result<Multivector> {
        if self.m != rhs.m {
            return Err(Error::DimensionMismatch {
                left: self.m,
                right: rhs.m,
            });
        }
        Ok(self.gp(rhs))
    }

    /// Geometric product; panics on mismatched dimensions.
    pub fn gp(&self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.m, rhs.m, "geometric product across dimensions");
        let n = self.coeffs.len();
        let table = sign_table(self.m);
        let mut out = Multivector::zero(self.m);
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let row = &table[a * n..(a + 1) * n];
            for (b, &cb) in rhs.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                out.coeffs[a ^ b] += row[b] * ca * cb;
            }
        }
        out
    }

    /// `out += s * (self * rhs)` without allocating.
    #[inline]
    pub fn gp_acc(&self, rhs: &Multivector, s: f64, out: &mut Multivector) {
        debug_assert_eq!(self.m, rhs.m);
        let n = self.coeffs.len();
        let table = sign_table(self.m);
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let sa = s * ca;
            let row = &table[a * n..(a + 1) * n];
            for (b, &cb) in rhs.coeffs.iter().enumerate() {
                out.coeffs[a ^ b] += row[b] * sa * cb;
            }
        }
    }

    /// Matrix of `x ↦ self * x` in the blade basis.
    pub fn left_matrix(&self) -> DMatrix<f64> {
        let n = self.coeffs.len();
        let table = sign_table(self.m);
        let mut l = DMatrix::zeros(n, n);
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for b in 0..n {
                l[(a ^ b, b)] += table[a * n + b] * ca;
            }
        }
        l
    }

    /// Inverse through the left-regular representation: solves `L_a x = 1`.
    pub fn inverse(&self) -> Result<Multivector> {
        let l = self.left_matrix();
        let sv = l.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition.is_finite() && condition <= SINGULAR_CONDITION) {
            return Err(Error::SingularMultivector { condition });
        }
        let mut rhs = DVector::zeros(l.nrows());
        rhs[0] = 1.0;
        let x = l
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularMultivector { condition })?;
        Multivector::from_coeffs(self.m, x.as_slice())
    }

    /// Main involution composed with reversion.
    pub fn conjugate(&self) -> Multivector {
        let mut out = self.clone();
        for (b, c) in out.coeffs.iter_mut().enumerate() {
            let k = b.count_ones() as usize;
            // reversion: (-1)^{k(k-1)/2}; grade involution: (-1)^k
            let s = (k * (k - 1) / 2 + k) % 2;
            if s == 1 {
                *c = -*c;
            }
        }
        out
    }

    pub fn max_diff(&self, other: &Multivector) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Embeds `x ∈ R^m` as the grade-1 element `Σ x_i e_i`.
pub fn embed_vector(x: &[f64]) -> Multivector {
    let mut v = Multivector::zero(x.len());
    for (i, xi) in x.iter().enumerate() {
        v.coeffs[1 << i] = *xi;
    }
    v
}

pub fn blade_key(mask: usize) -> String {
    (0..MAX_DIM)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| char::from(b'1' + i as u8))
        .collect()
}

fn parse_blade_key(key: &str, m: usize) -> Result<usize> {
    let mut mask = 0usize;
    let mut last = 0u32;
    for ch in key.chars() {
        let d = ch
            .to_digit(10)
            .ok_or_else(|| Error::Parse(format!("bad blade key {key:?}")))?;
        if d == 0 || d as usize > m || d <= last {
            return Err(Error::Parse(format!(
                "blade key {key:?} must list increasing generators in 1..={m}"
            )));
        }
        last = d;
        mask |= 1 << (d - 1);
    }
    Ok(mask)
}

#[derive(Serialize, Deserialize)]
struct MultivectorRepr {
    m: usize,
    coeffs: BTreeMap<String, f64>,
}

impl Multivector {
    /// Blade map text form, e.g. `{"":1.0,"12":-2.0}`. Zero coefficients are omitted.
    pub fn to_blade_map(&self) -> BTreeMap<String, f64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(b, c)| (blade_key(b), *c))
            .collect()
    }

    pub fn from_blade_map(m: usize, map: &BTreeMap<String, f64>) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&m) {
            return Err(Error::UnsupportedDimension(m));
        }
        let mut a = Multivector::zero(m);
        for (k, v) in map {
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite coefficient for {k:?}")));
            }
            a.coeffs[parse_blade_key(k, m)?] += *v;
        }
        Ok(a)
    }
}

impl Serialize for Multivector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultivectorRepr {
            m: self.m,
            coeffs: self.to_blade_map(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multivector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MultivectorRepr::deserialize(d)?;
        Multivector::from_blade_map(repr.m, &repr.coeffs).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector(m={}, {})", self.m, self)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let sep = if first {
                if *c < 0.0 {
                    "-"
                } else {
                    ""
                }
            } else if *c < 0.0 {
                " - "
            } else {
                " + "
            };
            first = false;
            if b == 0 {
                write!(f, "{sep}{}", c.abs())?;
            } else {
                write!(f, "{sep}{}e{}", c.abs(), blade_key(b))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Index<usize> for Multivector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coeffs[i]
    }
}

impl IndexMut<usize> for Multivector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coeffs[i]
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.m, rhs.m);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
    }
}

impl SubAssign<&Multivector> for Multivector {
    fn sub_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.m, rhs.m);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
    }
}

impl Add<&Multivector> for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(mut self, rhs: Multivector) -> Multivector {
        self += &rhs;
        self
    }
}

impl Sub<&Multivector> for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(mut self, rhs: Multivector) -> Multivector {
        self -= &rhs;
        self
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul<&Multivector> for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: &Multivector) -> Multivector {
        self.gp(rhs)
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        self.gp(&rhs)
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(mut self, rhs: f64) -> Multivector {
        self.scale_mut(rhs);
        self
    }
}

/// An ordered m-tuple of grade-1 elements; not necessarily orthonormal.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    m: usize,
    coords: Vec<Vec<f64>>,
    vectors: Vec<Multivector>,
}

impl Frame {
    /// Frame from coordinate rows: `rows[i]` are the coordinates of the i-th vector.
    pub fn from_coords(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if !(MIN_DIM..=MAX_DIM).contains(&m) {
            return Err(Error::UnsupportedDimension(m));
        }
        for r in &rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: r.len(),
                });
            }
        }
        let vectors = rows.iter().map(|r| embed_vector(r)).collect();
        Ok(Self {
            m,
            coords: rows,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn vector(&self, i: usize) -> &Multivector {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Multivector] {
        &self.vectors
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }
}

/// Outcome of [`validate_structural_set`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructuralCheck {
    pub structural: bool,
    /// `max |<ψ^i, ψ^j> - δ_ij|`.
    pub deviation: f64,
    /// `max |ψ^iψ^j + ψ^jψ^i + 2δ_ij|` over all coefficients.
    pub anticommutator_residual: f64,
}

/// Checks `ψ^iψ^j + ψ^jψ^i = -2δ_ij`, i.e. orthonormality of the frame.
pub fn validate_structural_set(frame: &Frame) -> StructuralCheck {
    let m = frame.m;
    let mut deviation: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let ip: f64 = frame.coords[i]
                .iter()
                .zip(frame.coords[j].iter())
                .map(|(a, b)| a * b)
                .sum();
            let delta = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((ip - delta).abs());
            let mut ac = frame.vectors[i].gp(&frame.vectors[j]);
            ac += &frame.vectors[j].gp(&frame.vectors[i]);
            ac[0] += 2.0 * delta;
            anti = anti.max(ac.max_abs());
        }
    }
    StructuralCheck {
        structural: deviation <= STRUCTURAL_TOL && anti <= 2.0 * STRUCTURAL_TOL,
        deviation,
        anticommutator_residual: anti,
    }
}

/// A frame validated to be orthonormal, usable as Dirac-operator coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralSet(Frame);

impl StructuralSet {
    pub fn new(frame: Frame) -> Result<Self> {
        let check = validate_structural_set(&frame);
        if !check.structural {
            return Err(Error::NotStructural {
                deviation: check.deviation.max(check.anticommutator_residual),
            });
        }
        Ok(Self(frame))
    }

    pub fn from_coords(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Frame::from_coords(rows)?)
    }

    /// `{e_1, ..., e_m}`.
    pub fn standard(m: usize) -> Self {
        let rows = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self(Frame::from_coords(rows).expect("valid dimension"))
    }

    /// `{e_{perm[0]+1}, ..., e_{perm[m-1]+1}}` for a zero-based permutation.
    pub fn permuted(perm: &[usize]) -> Result<Self> {
        let m = perm.len();
        let rows = perm
            .iter()
            .map(|&p| (0..m).map(|j| if j == p { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_coords(rows)
    }

    /// A random orthonormal frame (QR of a Gaussian matrix).
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        loop {
            let g = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
            let q = g.qr().q();
            let rows: Vec<Vec<f64>> = (0..m).map(|i| q.column(i).iter().copied().collect()).collect();
            if let Ok(s) = Self::from_coords(rows) {
                return s;
            }
        }
    }

    /// Pairwise swap `{φ_2, φ_1, φ_4, φ_3, ...}` of an even-dimensional set.
    pub fn pairwise_swapped(&self) -> Result<Self> {
        let m = self.dim();
        if m % 2 != 0 {
            return Err(Error::OddDimension(m));
        }
        let rows = (0..m).map(|i| self.coords(i ^ 1).to_vec()).collect();
        Self::from_coords(rows)
    }

    pub fn frame(&self) -> &Frame {
        &self.0
    }
}

impl std::ops::Deref for StructuralSet {
    type Target = Frame;
    fn deref(&self) -> &Frame {
        &self.0
    }
}

/// `x_ψ = Σ x_i ψ^i`.
pub fn remap_to_frame(x: &[f64], frame: &Frame) -> Multivector {
    assert_eq!(x.len(), frame.m, "point and frame dimensions differ");
    let mut out = Multivector::zero(frame.m);
    for (xi, v) in x.iter().zip(frame.vectors.iter()) {
        out.axpy(*xi, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(m: usize, i: usize) -> Multivector {
        Multivector::basis_vector(m, i)
    }

    #[test]
    fn generator_squares_to_minus_one() {
        assert_eq!(e(3, 1).gp(&e(3, 1)), Multivector::scalar(3, -1.0));
    }

    #[test]
    fn anticommuting_generators() {
        let e12 = Multivector::blade(3, 0b11, 1.0);
        assert_eq!(e(3, 1).gp(&e(3, 2)), e12);
        assert_eq!(e(3, 2).gp(&e(3, 1)), -&e12);
    }

    #[test]
    fn identity_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Multivector::random(3, &mut rng);
        assert_eq!(Multivector::one(3).gp(&a), a);
        assert_eq!(a.gp(&Multivector::one(3)), a);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let r = Multivector::one(3).geometric_product(&Multivector::one(4));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn embedding_squares_to_negative_norm() {
        let x = embed_vector(&[1.0, 2.0, 3.0]);
        assert_eq!(x.gp(&x), Multivector::scalar(3, -14.0));
        assert_eq!(embed_vector(&[1.0, 0.0, 0.0]), e(3, 1));
        assert_eq!(embed_vector(&[0.0, 0.0, 0.0]), Multivector::zero(3));
    }

    #[test]
    fn remap_standard_and_permuted() {
        let x = [1.0, 2.0, 3.0];
        let st = StructuralSet::standard(3);
        assert_eq!(remap_to_frame(&x, &st), embed_vector(&x));
        let p = StructuralSet::permuted(&[1, 0, 2]).unwrap();
        let expect = &(&e(3, 2) + &e(3, 1).scale(2.0)) + &e(3, 3).scale(3.0);
        assert_eq!(remap_to_frame(&x, &p), expect);
        assert_eq!(remap_to_frame(&[0.0; 3], &p), Multivector::zero(3));
    }

    #[test]
    fn scalar_and_vector_inverses() {
        assert_eq!(
            Multivector::scalar(3, 2.0).inverse().unwrap(),
            Multivector::scalar(3, 0.5)
        );
        let inv = e(3, 1).inverse().unwrap();
        assert!(inv.max_diff(&-&e(3, 1)) < 1e-14);
    }

    #[test]
    fn inverse_of_one_plus_bivector() {
        // (1 + e12)(1 - e12) = 1 - e12 e12 = 2, so the inverse is (1 - e12)/2.
        let a = &Multivector::one(3) + &Multivector::blade(3, 0b11, 1.0);
        let inv = a.inverse().unwrap();
        let expect = (&Multivector::one(3) - &Multivector::blade(3, 0b11, 1.0)).scale(0.5);
        assert!(inv.max_diff(&expect) < 1e-12);
        assert!(a.gp(&inv).max_diff(&Multivector::one(3)) < 1e-12);
        assert!(inv.gp(&a).max_diff(&Multivector::one(3)) < 1e-12);
    }

    #[test]
    fn singular_multivector_rejected() {
        // (1 + e123) is a zero divisor in R_{0,3}: e123^2 = +1.
        let a = &Multivector::one(3) + &Multivector::blade(3, 0b111, 1.0);
        assert!(matches!(a.inverse(), Err(Error::SingularMultivector { .. })));
        assert!(Multivector::zero(3).inverse().is_err());
    }

    #[test]
    fn structural_validation() {
        assert!(validate_structural_set(&StructuralSet::standard(3)).structural);
        assert!(validate_structural_set(&StructuralSet::permuted(&[1, 0, 2]).unwrap()).structural);
        let bad = Frame::from_coords(vec![
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let check = validate_structural_set(&bad);
        assert!(!check.structural);
        assert!(check.deviation >= 1.0);
        assert!(StructuralSet::new(bad).is_err());
    }

    #[test]
    fn random_frames_are_structural() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 2..=6 {
            let s = StructuralSet::random(m, &mut rng);
            assert!(validate_structural_set(&s).deviation < 1e-13);
        }
    }

    #[test]
    fn blade_map_text_form() {
        let a = Multivector::from_blade_map(
            3,
            &[("".to_string(), 1.0), ("1".into(), 0.5), ("12".into(), -2.0)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"m":3,"coeffs":{"":1.0,"1":0.5,"12":-2.0}}"#);
        let back: Multivector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<Multivector>(r#"{"m":3,"coeffs":{"21":1.0}}"#).is_err());
        assert!(serde_json::from_str::<Multivector>(r#"{"m":2,"coeffs":{"3":1.0}}"#).is_err());
    }

    #[test]
    fn display_form() {
        let a = &Multivector::one(3) - &Multivector::blade(3, 0b101, 2.5);
        assert_eq!(a.to_string(), "1 - 2.5e13");
        assert_eq!(Multivector::zero(2).to_string(), "0");
    }
}
