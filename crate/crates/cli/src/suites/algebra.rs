//! Clifford algebra laws and the factorization `ψ∂ψ∂ = -Δ`.

use hyperrh::clifford::Frame;
use hyperrh::{factorization_residual, validate_structural_set, Multivector, PolyField, StructuralSet};
use serde::{Deserialize, Serialize};

use super::{max_of, Settings};
use crate::report::{num, Bound, Report, Table};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraConfig {
    pub dims: Vec<usize>,
    pub triples: usize,
    pub polynomials: usize,
    pub frames: usize,
    pub degree: u32,
    /// Dimension of the factorization run.
    pub factor_dim: usize,
    pub tolerance: f64,
    /// The non-orthonormal set must miss the factorization by more than this.
    pub broken_min: f64,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            triples: 1000,
            polynomials: 100,
            frames: 20,
            degree: 3,
            factor_dim: 3,
            tolerance: 1e-12,
            broken_min: 0.1,
        }
    }
}

fn vector_part(a: &Multivector) -> Multivector {
    a.grade(1)
}

pub fn run(settings: &Settings, cfg: &AlgebraConfig) -> Report {
    let mut rng = settings.rng();
    let mut report = Report::new("verify-algebra", settings.seed);
    report.param("config", cfg);
    let mut laws = Table::new("laws", &["m", "associativity", "anticommutation", "generator_square", "inverse"]);
    for &m in &cfg.dims {
        let mut assoc: f64 = 0.0;
        let mut anti: f64 = 0.0;
        let mut inv: f64 = 0.0;
        for _ in 0..cfg.triples {
            let a = Multivector::random(m, &mut rng);
            let b = Multivector::random(m, &mut rng);
            let c = Multivector::random(m, &mut rng);
            assoc = assoc.max(a.gp(&b).gp(&c).max_diff(&a.gp(&b.gp(&c))));
            // Grade-1 parts anticommute up to -2<a,b>.
            let (va, vb) = (vector_part(&a), vector_part(&b));
            let dot: f64 = va.vector_part().iter().zip(vb.vector_part()).map(|(x, y)| x * y).sum();
            let sym = &va.gp(&vb) + &vb.gp(&va);
            anti = anti.max(sym.max_diff(&Multivector::scalar(m, -2.0 * dot)));
            if let Ok(ai) = a.inverse() {
                inv = inv.max(a.gp(&ai).max_diff(&Multivector::one(m)));
            }
        }
        let mut square: f64 = 0.0;
        for i in 1..=m {
            let ei = Multivector::basis_vector(m, i);
            square = square.max(ei.gp(&ei).max_diff(&Multivector::scalar(m, -1.0)));
            for j in 1..=m {
                if i != j {
                    let ej = Multivector::basis_vector(m, j);
                    anti = anti.max((&ei.gp(&ej) + &ej.gp(&ei)).max_abs());
                }
            }
        }
        report.check(&format!("associativity.m{m}"), assoc, Bound::AtMost(cfg.tolerance));
        report.check(&format!("anticommutation.m{m}"), anti, Bound::AtMost(cfg.tolerance));
        report.check(&format!("generator-square.m{m}"), square, Bound::AtMost(cfg.tolerance));
        report.check(&format!("inverse.m{m}"), inv, Bound::AtMost(1e-10));
        laws.push(vec![m.to_string(), num(assoc), num(anti), num(square), num(inv)]);
    }
    report.tables.push(laws);

    let m = cfg.factor_dim;
    let frames: Vec<StructuralSet> = (0..cfg.frames).map(|_| StructuralSet::random(m, &mut rng)).collect();
    let polys: Vec<PolyField> = (0..cfg.polynomials).map(|_| PolyField::random(m, cfg.degree, &mut rng)).collect();
    let mut per_frame = Table::new("factorization", &["frame", "max_residual"]);
    let mut worst: f64 = 0.0;
    for (k, f) in frames.iter().enumerate() {
        let r = max_of(polys.iter().map(|u| factorization_residual(u, f)));
        worst = worst.max(r);
        per_frame.push(vec![k.to_string(), num(r)]);
    }
    report.check("factorization.structural", worst, Bound::AtMost(cfg.tolerance));

    // {e1 + e2, e2, e3, ...} is not orthonormal.
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j || (i == 0 && j == 1) { 1.0 } else { 0.0 }).collect())
        .collect();
    let broken = Frame::from_coords(rows).expect("valid frame");
    let deviation = validate_structural_set(&broken).deviation;
    let broken_residual = max_of(polys.iter().map(|u| factorization_residual(u, &broken)));
    per_frame.push(vec!["non-orthonormal".into(), num(broken_residual)]);
    report.check("factorization.non-orthonormal", broken_residual, Bound::AtLeast(cfg.broken_min));
    report.check("structural-deviation.non-orthonormal", deviation, Bound::AtLeast(1.0));
    report.tables.push(per_frame);
    report
}
