//! Closed forms, homogeneity and finite-difference hyperholomorphicity of the kernels.

use hyperrh::kernels::kernel_harmonicity_residual;
use hyperrh::{sphere_area, KernelContext, StructuralSet};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{core_err, Settings};
use crate::report::{num, point, Bound, Report, Series, Table};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub points: usize,
    pub residual_points: usize,
    /// Finite-difference steps, halving.
    pub steps: Vec<f64>,
    pub tolerance: f64,
    pub min_ratio: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            points: 100,
            residual_points: 10,
            steps: vec![0.04, 0.02, 0.01, 0.005],
            tolerance: 1e-12,
            min_ratio: 3.0,
        }
    }
}

fn random_point<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 0.5 && r < 2.0 {
            return x;
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn run(settings: &Settings, cfg: &KernelConfig) -> Result<Report, CliError> {
    let m = settings.m.unwrap_or(3);
    let mut rng = settings.rng();
    let phi = StructuralSet::random(m, &mut rng);
    let psi = StructuralSet::random(m, &mut rng);
    let ctx = KernelContext::new(phi, psi.clone()).map_err(core_err)?;
    let same = KernelContext::new(psi.clone(), psi).map_err(core_err)?;
    let sigma = sphere_area(m);
    let mut report = Report::new("verify-kernels", settings.seed);
    report.param("m", m);
    report.param("config", cfg);

    let mut closed: f64 = 0.0;
    let mut hom_psi: f64 = 0.0;
    let mut hom_phipsi: f64 = 0.0;
    let mut values = Table::new("closed-form", &["x1", "x2", "x3", "k_psipsi", "expected"]);
    for k in 0..cfg.points {
        let x = random_point(m, &mut rng);
        let r = norm(&x);
        let expected = r.powi(2 - m as i32) / (sigma * (m as f64 - 2.0));
        let k_same = same.k_phipsi(&x).map_err(core_err)?;
        let mut target = hyperrh::Multivector::zero(m);
        target.coeffs_mut()[0] = expected;
        closed = closed.max(k_same.max_diff(&target));
        if k < 10 {
            let mut row = point(&x[..3.min(m)]);
            row.resize(3, String::new());
            row.extend([num(k_same.scalar_part()), num(expected)]);
            values.push(row);
        }
        let lambda = 2.0;
        let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let degree = |a: f64, b: f64| (b / a).ln() / lambda.ln();
        let d1 = degree(ctx.k_psi(&x).map_err(core_err)?.norm(), ctx.k_psi(&y).map_err(core_err)?.norm());
        let d2 = degree(ctx.k_phipsi(&x).map_err(core_err)?.norm(), ctx.k_phipsi(&y).map_err(core_err)?.norm());
        hom_psi = hom_psi.max((d1 - (1.0 - m as f64)).abs());
        hom_phipsi = hom_phipsi.max((d2 - (2.0 - m as f64)).abs());
    }
    report.check("k-psipsi-closed-form", closed, Bound::AtMost(cfg.tolerance));
    report.check("homogeneity.k-psi", hom_psi, Bound::AtMost(cfg.tolerance));
    report.check("homogeneity.k-phipsi", hom_phipsi, Bound::AtMost(cfg.tolerance));
    report.tables.push(values);

    let pts: Vec<Vec<f64>> = (0..cfg.residual_points).map(|_| random_point(m, &mut rng)).collect();
    let mut table = Table::new("residuals", &["h", "cauchy", "second_order", "teodorescu"]);
    let names = ["cauchy", "second-order", "teodorescu"];
    let mut series: Vec<Series> = names.iter().map(|n| Series::new(n, "log_h", "log_residual")).collect();
    let mut levels = Vec::new();
    for &h in &cfg.steps {
        let mut worst = [0.0f64; 3];
        for x in &pts {
            let r = kernel_harmonicity_residual(&ctx, x, h).map_err(core_err)?;
            worst[0] = worst[0].max(r.cauchy);
            worst[1] = worst[1].max(r.second_order);
            worst[2] = worst[2].max(r.teodorescu);
        }
        table.push(vec![num(h), num(worst[0]), num(worst[1]), num(worst[2])]);
        for (s, w) in series.iter_mut().zip(worst) {
            s.points.push((h.ln(), w.ln()));
        }
        levels.push(worst);
    }
    for (i, name) in names.iter().enumerate() {
        let ratio = levels.windows(2).map(|w| w[0][i] / w[1][i]).fold(f64::INFINITY, f64::min);
        report.check(&format!("refinement-ratio.{name}"), ratio, Bound::AtLeast(cfg.min_ratio));
    }
    report.tables.push(table);
    report.series.extend(series);
    Ok(report)
}
