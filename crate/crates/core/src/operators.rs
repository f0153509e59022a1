//! Generalized Dirac operators on polynomial fields (exact) and on arbitrary
//! fields (central differences).

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::clifford::{Frame, Multivector, StructuralSet};
use crate::error::{Error, Result};

/// Exponent vector `j = (j_1, ..., j_m)` of the monomial `x^j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn unit(m: usize, i: usize) -> Self {
        let mut j = vec![0; m];
        j[i] = 1;
        Self(j)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// All multi-indices of order `<= degree`, in lexicographic order.
    pub fn up_to_order(m: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(m: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() == m {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur.push(e);
                rec(m, left - e, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(m, degree, &mut Vec::with_capacity(m), &mut out);
        out.sort();
        out
    }
}

/// Polynomial field `u(x) = Σ_j c_j x^j` with multivector coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField {
    m: usize,
    terms: BTreeMap<MultiIndex, Multivector>,
}

impl PolyField {
    pub fn zero(m: usize) -> Self {
        Self {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Multivector) -> Self {
        let mut p = Self::zero(c.dim());
        p.add_term(MultiIndex::zero(c.dim()), c);
        p
    }

    /// The real coordinate function `x_i` (zero-based axis).
    pub fn coordinate(m: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(m, i), Multivector::one(m))
    }

    pub fn monomial(j: MultiIndex, c: Multivector) -> Self {
        let mut p = Self::zero(c.dim());
        p.add_term(j, c);
        p
    }

    pub fn from_terms(m: usize, terms: impl IntoIterator<Item = (MultiIndex, Multivector)>) -> Result<Self> {
        let mut p = Self::zero(m);
        for (j, c) in terms {
            if j.dim() != m || c.dim() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: if j.dim() != m { j.dim() } else { c.dim() },
                });
            }
            p.add_term(j, c);
        }
        Ok(p)
    }

    /// `1 - |x|^2`.
    pub fn unit_bump(m: usize) -> Self {
        let mut p = Self::constant(Multivector::one(m));
        for i in 0..m {
            let mut j = MultiIndex::zero(m);
            j.0[i] = 2;
            p.add_term(j, Multivector::scalar(m, -1.0));
        }
        p
    }

    /// Random coefficients on every monomial of order `<= degree`.
    pub fn random<R: Rng + ?Sized>(m: usize, degree: u32, rng: &mut R) -> Self {
        let mut p = Self::zero(m);
        for j in MultiIndex::up_to_order(m, degree) {
            p.add_term(j, Multivector::random(m, rng));
        }
        p
    }

    /// Random scalar-valued polynomial.
    pub fn random_scalar<R: Rng + ?Sized>(m: usize, degree: u32, rng: &mut R) -> Self {
        let mut p = Self::zero(m);
        for j in MultiIndex::up_to_order(m, degree) {
            p.add_term(j, Multivector::scalar(m, rng.sample(StandardNormal)));
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Multivector> {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|j| j.order()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, j: MultiIndex, c: Multivector) {
        assert_eq!(j.dim(), self.m);
        match self.terms.get_mut(&j) {
            Some(existing) => *existing += &c,
            None => {
                self.terms.insert(j, c);
            }
        }
    }

    pub fn add(&self, other: &PolyField) -> PolyField {
        let mut out = self.clone();
        for (j, c) in &other.terms {
            out.add_term(j.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: f64) -> PolyField {
        PolyField {
            m: self.m,
            terms: self.terms.iter().map(|(j, c)| (j.clone(), c.scale(s))).collect(),
        }
    }

    /// `a · u` (constant multiplied on the left of every coefficient).
    pub fn left_mul(&self, a: &Multivector) -> PolyField {
        PolyField {
            m: self.m,
            terms: self.terms.iter().map(|(j, c)| (j.clone(), a.gp(c))).collect(),
        }
    }

    /// `u · a` (constant multiplied on the right).
    pub fn right_mul(&self, a: &Multivector) -> PolyField {
        PolyField {
            m: self.m,
            terms: self.terms.iter().map(|(j, c)| (j.clone(), c.gp(a))).collect(),
        }
    }

    /// `∂u/∂x_i` (zero-based axis), exact.
    pub fn derivative(&self, i: usize) -> PolyField {
        let mut out = PolyField::zero(self.m);
        for (j, c) in &self.terms {
            let e = j.0[i];
            if e == 0 {
                continue;
            }
            let mut k = j.clone();
            k.0[i] -= 1;
            out.add_term(k, c.scale(e as f64));
        }
        out
    }

    pub fn laplacian(&self) -> PolyField {
        let mut out = PolyField::zero(self.m);
        for i in 0..self.m {
            out = out.add(&self.derivative(i).derivative(i));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Multivector {
        let mut out = Multivector::zero(self.m);
        for (j, c) in &self.terms {
            out.axpy(j.monomial(x), c);
        }
        out
    }

    /// Largest coefficient magnitude over all terms.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.max_abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_coeff() <= tol
    }
}

/// `ψ∂u = Σ_i ψ^i ∂u/∂x_i`, exact.
pub fn dirac_poly(u: &PolyField, psi: &Frame) -> PolyField {
    assert_eq!(u.dim(), psi.dim(), "field and frame dimensions differ");
    let mut out = PolyField::zero(u.dim());
    for i in 0..u.dim() {
        out = out.add(&u.derivative(i).left_mul(psi.vector(i)));
    }
    out
}

/// `φ∂(ψ∂u)`, exact.
pub fn second_order_apply(u: &PolyField, phi: &Frame, psi: &Frame) -> PolyField {
    dirac_poly(&dirac_poly(u, psi), phi)
}

/// `max |ψ∂ψ∂u + Δu|` over coefficients; vanishes for structural sets.
pub fn factorization_residual(u: &PolyField, psi: &Frame) -> f64 {
    second_order_apply(u, psi, psi).add(&u.laplacian()).max_coeff()
}

/// Default central-difference step `1e-4 · max(1, |x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1e-4 * n.max(1.0)
}

/// Central-difference `ψ∂u(x)`.
pub fn dirac_fd<F>(u: F, psi: &Frame, x: &[f64], h: f64) -> Result<Multivector>
where
    F: Fn(&[f64]) -> Result<Multivector>,
{
    let m = psi.dim();
    let mut out = Multivector::zero(m);
    let mut p = x.to_vec();
    for i in 0..m {
        p[i] = x[i] + h;
        let fp = u(&p)?;
        p[i] = x[i] - h;
        let fm = u(&p)?;
        p[i] = x[i];
        let d = (&fp - &fm).scale(0.5 / h);
        psi.vector(i).gp_acc(&d, 1.0, &mut out);
    }
    Ok(out)
}

/// Central-difference Hessian `∂_i∂_j u(x)`, row-major `m × m`.
pub fn hessian_fd<F>(u: &F, m: usize, x: &[f64], h: f64) -> Result<Vec<Multivector>>
where
    F: Fn(&[f64]) -> Result<Multivector>,
{
    let f0 = u(x)?;
    let mut hess = vec![Multivector::zero(m); m * m];
    let mut p = x.to_vec();
    for i in 0..m {
        p[i] = x[i] + h;
        let fp = u(&p)?;
        p[i] = x[i] - h;
        let fm = u(&p)?;
        p[i] = x[i];
        let mut d = &fp + &fm;
        d.axpy(-2.0, &f0);
        hess[i * m + i] = d.scale(1.0 / (h * h));
        for j in 0..i {
            let mut acc = Multivector::zero(m);
            for (si, sj, w) in [(1.0, 1.0, 1.0), (-1.0, -1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0)] {
                p[i] = x[i] + si * h;
                p[j] = x[j] + sj * h;
                acc.axpy(w, &u(&p)?);
            }
            p[i] = x[i];
            p[j] = x[j];
            let d = acc.scale(0.25 / (h * h));
            hess[i * m + j] = d.clone();
            hess[j * m + i] = d;
        }
    }
    Ok(hess)
}

/// Central-difference `φ∂ψ∂u(x) = Σ_ij φ^j ψ^i ∂_j∂_i u`.
pub fn second_order_fd<F>(u: F, phi: &Frame, psi: &Frame, x: &[f64], h: f64) -> Result<Multivector>
where
    F: Fn(&[f64]) -> Result<Multivector>,
{
    let m = psi.dim();
    let hess = hessian_fd(&u, m, x, h)?;
    Ok(contract_second_order(&hess, phi, psi))
}

/// `Σ_ij φ^j ψ^i H_ji` for a row-major Hessian `H`.
pub fn contract_second_order(hess: &[Multivector], phi: &Frame, psi: &Frame) -> Multivector {
    let m = psi.dim();
    let mut out = Multivector::zero(m);
    for j in 0..m {
        for i in 0..m {
            let pp = phi.vector(j).gp(psi.vector(i));
            pp.gp_acc(&hess[j * m + i], 1.0, &mut out);
        }
    }
    out
}

/// Certificate that `1 - |x|^2` is `(φ,ψ)`-harmonic for a swapped pair.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub m: usize,
    pub phi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    /// `max |φ∂ψ∂u|` over all coefficients of the exact polynomial result.
    pub harmonicity_residual: f64,
    /// `Δu`, a scalar constant.
    pub laplacian: f64,
    pub value_at_origin: f64,
    /// `max |u|` over sampled unit-sphere points.
    pub boundary_max: f64,
    pub boundary_samples: usize,
    pub violates_maximum_principle: bool,
}

/// Builds the swapped-pair counterexample for the frame `phi` of even dimension.
pub fn counterexample_report(phi: &StructuralSet) -> Result<CounterexampleReport> {
    let m = phi.dim();
    if m % 2 != 0 {
        return Err(Error::OddDimension(m));
    }
    if !(4..=8).contains(&m) {
        return Err(Error::UnsupportedDimension(m));
    }
    let psi = phi.pairwise_swapped()?;
    let u = PolyField::unit_bump(m);
    let w = second_order_apply(&u, phi, &psi);
    let lap = u.laplacian();
    let laplacian = lap.eval(&vec![0.0; m]).scalar_part();
    let value_at_origin = u.eval(&vec![0.0; m]).scalar_part();

    // Deterministic boundary probes: ±e_i and normalized sign patterns.
    let mut boundary_max: f64 = 0.0;
    let mut samples = 0;
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut x = vec![0.0; m];
            x[i] = s;
            boundary_max = boundary_max.max(u.eval(&x).max_abs());
            samples += 1;
        }
    }
    let r = 1.0 / (m as f64).sqrt();
    for mask in 0..(1usize << m) {
        let x: Vec<f64> = (0..m).map(|i| if mask >> i & 1 == 1 { -r } else { r }).collect();
        boundary_max = boundary_max.max(u.eval(&x).max_abs());
        samples += 1;
    }
    let harmonicity_residual = w.max_coeff();
    Ok(CounterexampleReport {
        m,
        phi: (0..m).map(|i| phi.coords(i).to_vec()).collect(),
        psi: (0..m).map(|i| psi.coords(i).to_vec()).collect(),
        harmonicity_residual,
        laplacian,
        value_at_origin,
        boundary_max,
        boundary_samples: samples,
        violates_maximum_principle: harmonicity_residual <= 1e-12
            && value_at_origin > boundary_max + 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::embed_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirac_of_coordinate() {
        let st = StructuralSet::standard(3);
        let d = dirac_poly(&PolyField::coordinate(3, 0), &st);
        assert_eq!(d, PolyField::constant(Multivector::basis_vector(3, 1)));
    }

    #[test]
    fn dirac_of_bump_is_minus_two_x_psi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StructuralSet::random(3, &mut rng);
        let d = dirac_poly(&PolyField::unit_bump(3), &psi);
        let x = [0.3, -0.2, 0.7];
        let expect = crate::clifford::remap_to_frame(&x, &psi).scale(-2.0);
        assert!(d.eval(&x).max_diff(&expect) < 1e-14);
        assert_eq!(d.degree(), 1);
    }

    #[test]
    fn dirac_of_constant_vanishes() {
        let d = dirac_poly(&PolyField::constant(Multivector::scalar(3, 4.0)), &StructuralSet::standard(3));
        assert!(d.is_zero(0.0));
    }

    #[test]
    fn fd_exact_on_linear_and_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = StructuralSet::random(3, &mut rng);
        let d = dirac_fd(|x| Ok(Multivector::scalar(3, x[0])), &psi, &[0.4, 1.0, -2.0], 1e-3).unwrap();
        assert!(d.max_diff(psi.vector(0)) < 1e-10);
        let st = StructuralSet::standard(3);
        let d = dirac_fd(
            |x| Ok(Multivector::scalar(3, x.iter().map(|v| v * v).sum())),
            &st,
            &[1.0, 0.0, 0.0],
            1e-3,
        )
        .unwrap();
        assert!(d.max_diff(&embed_vector(&[2.0, 0.0, 0.0])) < 1e-8);
    }

    #[test]
    fn factorization_for_structural_and_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = PolyField::random(3, 3, &mut rng);
        assert!(factorization_residual(&u, &StructuralSet::standard(3)) <= 1e-12);
        let mut j = MultiIndex::zero(3);
        j.0[0] = 1;
        j.0[1] = 1;
        let harmonic = PolyField::monomial(j, Multivector::one(3));
        assert_eq!(factorization_residual(&harmonic, &StructuralSet::standard(3)), 0.0);
        let bad = Frame::from_coords(vec![
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let mut j = MultiIndex::zero(3);
        j.0[0] = 2;
        let sq = PolyField::monomial(j, Multivector::one(3));
        // (e1+e2)^2 ∂_1^2 x_1^2 = -2·2 while Δ x_1^2 = 2.
        assert!((factorization_residual(&sq, &bad) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equal_frames_give_minus_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = StructuralSet::random(4, &mut rng);
        let u = PolyField::random(4, 3, &mut rng);
        let lhs = second_order_apply(&u, &psi, &psi);
        let rhs = u.laplacian().scale(-1.0);
        assert!(lhs.add(&rhs.scale(-1.0)).max_coeff() < 1e-12);
    }

    #[test]
    fn swapped_pair_annihilates_bump() {
        let phi = StructuralSet::standard(4);
        let psi = StructuralSet::permuted(&[1, 0, 3, 2]).unwrap();
        let u = PolyField::unit_bump(4);
        assert!(second_order_apply(&u, &phi, &psi).is_zero(0.0));
        let same = second_order_apply(&u, &phi, &phi);
        assert_eq!(same.eval(&[0.1, 0.2, 0.3, 0.4]), Multivector::scalar(4, 8.0));
    }

    #[test]
    fn counterexample_certificates() {
        for m in [4, 6] {
            let r = counterexample_report(&StructuralSet::standard(m)).unwrap();
            assert_eq!(r.harmonicity_residual, 0.0);
            assert_eq!(r.value_at_origin, 1.0);
            assert!(r.boundary_max < 1e-15);
            assert_eq!(r.laplacian, -2.0 * m as f64);
            assert!(r.violates_maximum_principle);
        }
        assert!(matches!(
            counterexample_report(&StructuralSet::standard(3)),
            Err(Error::OddDimension(3))
        ));
    }

    #[test]
    fn second_order_fd_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = StructuralSet::random(3, &mut rng);
        let psi = StructuralSet::random(3, &mut rng);
        let u = PolyField::random(3, 2, &mut rng);
        let x = [0.2, 0.5, -0.1];
        let fd = second_order_fd(|p| Ok(u.eval(p)), &phi, &psi, &x, 1e-3).unwrap();
        let exact = second_order_apply(&u, &phi, &psi).eval(&x);
        assert!(fd.max_diff(&exact) < 1e-6);
    }
}
