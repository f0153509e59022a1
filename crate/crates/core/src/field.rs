//! Multivector-valued fields with first and second derivatives.

use serde::{Deserialize, Serialize};

use crate::clifford::{Frame, Multivector};
use crate::error::{Error, Result};
use crate::operators::{contract_second_order, MultiIndex, PolyField};

/// Value, gradient `∂_i u` and row-major Hessian `∂_i∂_j u` at a point.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub value: Multivector,
    pub grad: Vec<Multivector>,
    pub hess: Vec<Multivector>,
}

impl Derivatives {
    pub fn zero(m: usize, order: usize) -> Self {
        Self {
            value: Multivector::zero(m),
            grad: if order >= 1 { vec![Multivector::zero(m); m] } else { Vec::new() },
            hess: if order >= 2 { vec![Multivector::zero(m); m * m] } else { Vec::new() },
        }
    }

    /// `ψ∂u = Σ ψ^i ∂_i u`.
    pub fn dirac(&self, psi: &Frame) -> Multivector {
        let mut out = Multivector::zero(self.value.dim());
        for (i, g) in self.grad.iter().enumerate() {
            psi.vector(i).gp_acc(g, 1.0, &mut out);
        }
        out
    }

    /// `φ∂ψ∂u`.
    pub fn second_order(&self, phi: &Frame, psi: &Frame) -> Multivector {
        contract_second_order(&self.hess, phi, psi)
    }
}

/// A field that can report derivatives up to order 2.
pub trait SmoothField: Send + Sync {
    fn dim(&self) -> usize;

    /// Derivatives up to `order` (0, 1 or 2); higher-order slots are left empty.
    fn derivatives(&self, x: &[f64], order: usize) -> Derivatives;

    fn value(&self, x: &[f64]) -> Multivector {
        self.derivatives(x, 0).value
    }

    fn dirac(&self, psi: &Frame, x: &[f64]) -> Multivector {
        self.derivatives(x, 1).dirac(psi)
    }

    fn second_order(&self, phi: &Frame, psi: &Frame, x: &[f64]) -> Multivector {
        self.derivatives(x, 2).second_order(phi, psi)
    }
}

impl SmoothField for PolyField {
    fn dim(&self) -> usize {
        PolyField::dim(self)
    }

    fn derivatives(&self, x: &[f64], order: usize) -> Derivatives {
        let m = self.dim();
        let mut d = Derivatives::zero(m, order);
        d.value = self.eval(x);
        if order >= 1 {
            for i in 0..m {
                let di = self.derivative(i);
                d.grad[i] = di.eval(x);
                if order >= 2 {
                    for j in 0..m {
                        d.hess[i * m + j] = di.derivative(j).eval(x);
                    }
                }
            }
        }
        d
    }
}

/// Closed-form test fields.
#[derive(Clone, Debug)]
pub enum AnalyticKind {
    /// Polynomial with cached first and second derivatives.
    Poly {
        u: PolyField,
        du: Vec<PolyField>,
        d2u: Vec<PolyField>,
    },
    /// `exp(-|x|^2) c`.
    Gaussian { c: Multivector },
    /// `|x_axis|^power c`.
    AbsPower { axis: usize, power: f64, c: Multivector },
}

/// Named closed-form fields used as boundary data and as test integrands.
#[derive(Clone, Debug)]
pub struct AnalyticField {
    m: usize,
    kind: AnalyticKind,
    terms: Vec<AnalyticField>,
}

/// Identifiers accepted by [`AnalyticField::by_name`].
pub const ANALYTIC_NAMES: &[&str] = &[
    "zero",
    "one",
    "x1",
    "x1-plus-x2e1",
    "quadratic",
    "bump",
    "gaussian-e12",
    "holder-x1",
];

impl AnalyticField {
    pub fn poly(u: PolyField) -> Self {
        let m = u.dim();
        let du: Vec<PolyField> = (0..m).map(|i| u.derivative(i)).collect();
        let d2u = (0..m * m).map(|k| du[k / m].derivative(k % m)).collect();
        Self {
            m,
            kind: AnalyticKind::Poly { u, du, d2u },
            terms: Vec::new(),
        }
    }

    pub fn gaussian(c: Multivector) -> Self {
        Self {
            m: c.dim(),
            kind: AnalyticKind::Gaussian { c },
            terms: Vec::new(),
        }
    }

    pub fn abs_power(axis: usize, power: f64, c: Multivector) -> Self {
        Self {
            m: c.dim(),
            kind: AnalyticKind::AbsPower { axis, power, c },
            terms: Vec::new(),
        }
    }

    /// `self + other`.
    pub fn plus(mut self, other: AnalyticField) -> Self {
        assert_eq!(self.m, other.m);
        self.terms.push(other);
        self
    }

    pub fn by_name(name: &str, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::UnsupportedDimension(m));
        }
        let one = Multivector::one(m);
        let field = match name {
            "zero" => Self::poly(PolyField::zero(m)),
            "one" => Self::poly(PolyField::constant(one)),
            "x1" => Self::poly(PolyField::coordinate(m, 0)),
            "x1-plus-x2e1" => Self::poly(
                PolyField::coordinate(m, 0)
                    .add(&PolyField::coordinate(m, 1).right_mul(&Multivector::basis_vector(m, 1))),
            ),
            "quadratic" => {
                let mut j = MultiIndex::zero(m);
                j.0[0] = 1;
                j.0[1] = 1;
                let mut k = MultiIndex::zero(m);
                k.0[2] = 2;
                let mut l = MultiIndex::zero(m);
                l.0[0] = 2;
                Self::poly(PolyField::from_terms(
                    m,
                    [
                        (j, one.clone()),
                        (k, Multivector::blade(m, 0b11, 1.0)),
                        (l, Multivector::basis_vector(m, 2).scale(0.5)),
                        (MultiIndex::unit(m, 2), Multivector::basis_vector(m, 1)),
                    ],
                )?)
            }
            "bump" => Self::poly(PolyField::unit_bump(m)),
            "gaussian-e12" => Self::gaussian(Multivector::blade(m, 0b11, 1.0)),
            "holder-x1" => Self::abs_power(0, 1.5, one),
            other => {
                return Err(Error::Invalid(format!(
                    "unknown analytic field {other:?}; expected one of {ANALYTIC_NAMES:?}"
                )))
            }
        };
        Ok(field)
    }

    fn own_derivatives(&self, x: &[f64], order: usize) -> Derivatives {
        let m = self.m;
        let mut d = Derivatives::zero(m, order);
        match &self.kind {
            AnalyticKind::Poly { u, du, d2u } => {
                d.value = u.eval(x);
                if order >= 1 {
                    for i in 0..m {
                        d.grad[i] = du[i].eval(x);
                    }
                }
                if order >= 2 {
                    for k in 0..m * m {
                        d.hess[k] = d2u[k].eval(x);
                    }
                }
            }
            AnalyticKind::Gaussian { c } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let e = (-r2).exp();
                d.value = c.scale(e);
                if order >= 1 {
                    for i in 0..m {
                        d.grad[i] = c.scale(-2.0 * x[i] * e);
                    }
                }
                if order >= 2 {
                    for i in 0..m {
                        for j in 0..m {
                            let delta = if i == j { 2.0 } else { 0.0 };
                            d.hess[i * m + j] = c.scale((4.0 * x[i] * x[j] - delta) * e);
                        }
                    }
                }
            }
            AnalyticKind::AbsPower { axis, power, c } => {
                let t = x[*axis];
                let a = t.abs();
                d.value = c.scale(a.powf(*power));
                if order >= 1 {
                    d.grad[*axis] = c.scale(power * a.powf(power - 1.0) * t.signum());
                }
                if order >= 2 {
                    d.hess[axis * m + axis] = c.scale(power * (power - 1.0) * a.powf(power - 2.0));
                }
            }
        }
        d
    }
}

impl SmoothField for AnalyticField {
    fn dim(&self) -> usize {
        self.m
    }

    fn derivatives(&self, x: &[f64], order: usize) -> Derivatives {
        let mut d = self.own_derivatives(x, order);
        for t in &self.terms {
            let e = t.derivatives(x, order);
            d.value += &e.value;
            for (a, b) in d.grad.iter_mut().zip(&e.grad) {
                *a += b;
            }
            for (a, b) in d.hess.iter_mut().zip(&e.hess) {
                *a += b;
            }
        }
        d
    }
}

/// Field given by the right product `u · a` of another field with a constant.
pub struct RightScaled<'a, F: SmoothField + ?Sized> {
    pub field: &'a F,
    pub factor: Multivector,
}

impl<F: SmoothField + ?Sized> SmoothField for RightScaled<'_, F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn derivatives(&self, x: &[f64], order: usize) -> Derivatives {
        let d = self.field.derivatives(x, order);
        Derivatives {
            value: d.value.gp(&self.factor),
            grad: d.grad.iter().map(|g| g.gp(&self.factor)).collect(),
            hess: d.hess.iter().map(|h| h.gp(&self.factor)).collect(),
        }
    }
}

/// Serialized reference to a field: a catalog name.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldSpec {
    pub name: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::StructuralSet;
    use crate::operators::{dirac_fd, second_order_fd};

    fn check_against_fd(f: &AnalyticField, x: &[f64]) {
        let st = StructuralSet::standard(3);
        let phi = StructuralSet::permuted(&[2, 0, 1]).unwrap();
        let d1 = dirac_fd(|p| Ok(f.value(p)), &st, x, 1e-5).unwrap();
        assert!(d1.max_diff(&f.dirac(&st, x)) < 1e-7, "{d1} vs {}", f.dirac(&st, x));
        let d2 = second_order_fd(|p| Ok(f.value(p)), &phi, &st, x, 1e-4).unwrap();
        assert!(d2.max_diff(&f.second_order(&phi, &st, x)) < 1e-5);
    }

    #[test]
    fn catalog_derivatives_match_differences() {
        let x = [0.31, -0.42, 0.57];
        for name in ANALYTIC_NAMES {
            let f = AnalyticField::by_name(name, 3).unwrap();
            check_against_fd(&f, &x);
        }
    }

    #[test]
    fn sums_add_derivatives() {
        let f = AnalyticField::by_name("x1", 3)
            .unwrap()
            .plus(AnalyticField::by_name("gaussian-e12", 3).unwrap());
        check_against_fd(&f, &[0.2, 0.1, -0.3]);
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(AnalyticField::by_name("nope", 3).is_err());
    }
}
