//! Jump of the Cauchy transform `𝒞_φψ g` across `Γ` by the ε-sweep protocol.

use std::sync::Arc;

use hyperrh::geometry::jet::jet_from_function;
use hyperrh::geometry::mesh::icosphere;
use hyperrh::integral::{cauchy_psi, interpolate, second_term, two_sided_gap, P1Density, SurfaceQuadrature, SurfaceRule};
use hyperrh::{AnalyticField, KernelContext, Multivector, StructuralSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{core_err, max_of, Settings};
use crate::report::{num, point, Bound, Report, Table};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpConfig {
    pub sphere_level: u32,
    pub field: String,
    pub alpha: f64,
    pub probes: usize,
    pub jump_tol: f64,
    pub second_tol: f64,
}

impl Default for JumpConfig {
    fn default() -> Self {
        Self {
            sphere_level: 4,
            field: "gaussian-e12".into(),
            alpha: 1.0,
            probes: 20,
            jump_tol: 5e-2,
            second_tol: 1e-2,
        }
    }
}

pub fn run(settings: &Settings, cfg: &JumpConfig) -> Result<Report, CliError> {
    let mut rng = settings.rng();
    let ctx = KernelContext::new(StructuralSet::random(3, &mut rng), StructuralSet::random(3, &mut rng)).map_err(core_err)?;
    let level = cfg.sphere_level + settings.refine;
    let mesh = Arc::new(icosphere([0.0; 3], 1.0, level).map_err(core_err)?);
    let f = AnalyticField::by_name(&cfg.field, 3).map_err(core_err)?;
    let jet = jet_from_function(&f, &mesh, cfg.alpha).map_err(core_err)?;
    let values: Vec<Multivector> = jet.samples.iter().map(|s| s.value.clone()).collect();
    let grads: Vec<Multivector> = jet
        .samples
        .iter()
        .map(|s| {
            let mut w = Multivector::zero(3);
            for (l, g) in s.grad.iter().enumerate() {
                ctx.psi.vector(l).gp_acc(g, 1.0, &mut w);
            }
            w
        })
        .collect();
    let q = SurfaceQuadrature::new(mesh.clone(), SurfaceRule::ThreePoint);
    let first = P1Density::new(&q, P1Density::normal_factors(&q, &ctx.psi), values.clone());
    let second = P1Density::new(&q, P1Density::normal_factors(&q, &ctx.phi), grads);

    let mut report = Report::new("jump-test", settings.seed);
    report.param("resolution", settings.resolution_label());
    report.param("sphere_level", level);
    report.param("triangles", mesh.num_triangles());
    report.param("config", cfg);

    let n = mesh.num_triangles();
    let probes: Vec<usize> = (0..cfg.probes).map(|i| i * n / cfg.probes.max(1)).collect();
    let rows = probes
        .par_iter()
        .map(|&t| -> hyperrh::Result<_> {
            let x = mesh.centroids()[t];
            let normal = mesh.normals()[t];
            let h = mesh.local_spacing(&x);
            let full = two_sided_gap(
                |p| Ok(cauchy_psi(&q, &ctx, &first, p)? + second_term(&q, &ctx, &second, p)?),
                &x,
                &normal,
                h,
            )?;
            let cont = two_sided_gap(|p| second_term(&q, &ctx, &second, p), &x, &normal, h)?;
            let g0 = interpolate(&mesh, &values, t, &x);
            Ok((x, full.max_diff(&g0), cont.max_abs()))
        })
        .collect::<hyperrh::Result<Vec<_>>>()
        .map_err(core_err)?;
    let mut table = Table::new("probes", &["x1", "x2", "x3", "jump_error", "second_term_gap"]);
    for (x, e, c) in &rows {
        let mut row = point(x);
        row.extend([num(*e), num(*c)]);
        table.push(row);
    }
    report.check("jump", max_of(rows.iter().map(|r| r.1)), Bound::AtMost(cfg.jump_tol));
    report.check("second-term-continuity", max_of(rows.iter().map(|r| r.2)), Bound::AtMost(cfg.second_tol));
    report.tables.push(table);
    Ok(report)
}
