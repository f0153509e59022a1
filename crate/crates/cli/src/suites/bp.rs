//! Both Borel–Pompeiu formulas, indicator calibration and the Teodorescu relations.

use std::sync::Arc;

use hyperrh::geometry::mesh::icosphere;
use hyperrh::geometry::{whitney_decompose, P3};
use hyperrh::integral::{
    cauchy_psi, psi_density, teodorescu_dirac_fd, teodorescu_phi, teodorescu_second_order_fd, BorelPompeiu, Kernel,
    SurfaceQuadrature, SurfaceRule, VolumeDensity, VolumeQuadrature,
};
use hyperrh::{AnalyticField, KernelContext, Multivector, StructuralSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{core_err, max_of, spiral, Settings};
use crate::report::{num, point, Bound, Report, Table};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpConfig {
    /// Icosphere level and Whitney depth at `1x`; each doubling adds one to both.
    pub sphere_level: u32,
    pub whitney_depth: u32,
    /// Probes on each side of the sphere.
    pub probes_per_side: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Fields for the first-order formula.
    pub first_fields: Vec<String>,
    /// Fields for the second-order formula.
    pub second_fields: Vec<String>,
    pub first_tol: f64,
    pub second_tol: f64,
    pub min_ratio: f64,
    pub indicator_tol: f64,
    pub teodorescu_tol: f64,
    pub fd_step: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            sphere_level: 4,
            whitney_depth: 6,
            probes_per_side: 5,
            inner_radius: 0.5,
            outer_radius: 1.5,
            first_fields: vec!["x1".into(), "quadratic".into()],
            second_fields: vec!["x1".into(), "quadratic".into()],
            first_tol: 3e-2,
            second_tol: 5e-2,
            min_ratio: 1.5,
            indicator_tol: 1e-2,
            teodorescu_tol: 2e-2,
            fd_step: 0.02,
        }
    }
}

struct Level {
    q: SurfaceQuadrature,
    vq: VolumeQuadrature,
}

fn level(sphere: u32, depth: u32) -> Result<Level, CliError> {
    let mesh = Arc::new(icosphere([0.0; 3], 1.0, sphere).map_err(core_err)?);
    let cubes = whitney_decompose(mesh.as_ref(), depth).map_err(core_err)?;
    let vq = VolumeQuadrature::new(&cubes, mesh.as_ref());
    Ok(Level {
        q: SurfaceQuadrature::new(mesh, SurfaceRule::ThreePoint),
        vq,
    })
}

pub fn probes(cfg: &BpConfig) -> Vec<P3> {
    let dirs = spiral(cfg.probes_per_side);
    let mut pts: Vec<P3> = dirs.iter().map(|d| d.map(|v| v * cfg.inner_radius)).collect();
    pts.extend(dirs.iter().map(|d| [-d[0] * cfg.outer_radius, -d[1] * cfg.outer_radius, -d[2] * cfg.outer_radius]));
    pts
}

/// Worst first- and second-order residual per field at one resolution.
fn bp_residuals(
    lv: &Level,
    ctx: &KernelContext,
    cfg: &BpConfig,
    pts: &[P3],
    table: &mut Table,
    label: &str,
) -> Result<(f64, f64), CliError> {
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    let names: Vec<&String> = cfg.first_fields.iter().chain(&cfg.second_fields).collect();
    for (k, name) in names.iter().enumerate() {
        let order = if k < cfg.first_fields.len() { 1 } else { 2 };
        let u = AnalyticField::by_name(name, 3).map_err(core_err)?;
        let bp = BorelPompeiu::new(&lv.q, &lv.vq, ctx, &u).map_err(core_err)?;
        let terms = pts
            .par_iter()
            .map(|x| if order == 1 { bp.first(x) } else { bp.second(x) })
            .collect::<hyperrh::Result<Vec<_>>>()
            .map_err(core_err)?;
        for t in &terms {
            let mut row = vec![label.to_string(), order.to_string(), name.to_string()];
            row.extend(point(&t.point));
            row.push(num(t.residual));
            table.push(row);
        }
        let worst = max_of(terms.iter().map(|t| t.residual));
        if order == 1 {
            first = first.max(worst);
        } else {
            second = second.max(worst);
        }
    }
    Ok((first, second))
}

pub fn run(settings: &Settings, cfg: &BpConfig) -> Result<Report, CliError> {
    let mut rng = settings.rng();
    let ctx = KernelContext::new(StructuralSet::random(3, &mut rng), StructuralSet::random(3, &mut rng)).map_err(core_err)?;
    let (sl, wd) = (cfg.sphere_level + settings.refine, cfg.whitney_depth + settings.refine);
    let mut report = Report::new("verify-bp", settings.seed);
    report.param("resolution", settings.resolution_label());
    report.param("sphere_level", sl);
    report.param("whitney_depth", wd);
    report.param("config", cfg);
    let pts = probes(cfg);
    let fine = level(sl, wd)?;
    let coarse = level(sl.saturating_sub(1), wd.saturating_sub(1))?;
    report.param("triangles", fine.q.mesh().num_triangles());
    report.param("volume_cells", fine.vq.cells().len());
    let mut table = Table::new("residuals", &["level", "order", "field", "x1", "x2", "x3", "residual"]);
    let (c1, c2) = bp_residuals(&coarse, &ctx, cfg, &pts, &mut table, "coarse")?;
    let (f1, f2) = bp_residuals(&fine, &ctx, cfg, &pts, &mut table, "fine")?;
    report.tables.push(table);
    report.check("first-order", f1, Bound::AtMost(cfg.first_tol));
    report.check("second-order", f2, Bound::AtMost(cfg.second_tol));
    report.check("refinement-ratio.first-order", c1 / f1, Bound::AtLeast(cfg.min_ratio));
    report.check("refinement-ratio.second-order", c2 / f2, Bound::AtLeast(cfg.min_ratio));

    // Indicator calibration: 𝒞_ψ[1] against 1_Ω.
    let one = AnalyticField::by_name("one", 3).map_err(core_err)?;
    let rho = psi_density(&fine.q, &ctx, &one);
    let mut indicator = Table::new("indicator", &["x1", "x2", "x3", "cauchy_one", "error"]);
    let mut worst: f64 = 0.0;
    for x in &pts {
        let c = cauchy_psi(&fine.q, &ctx, &rho, x).map_err(core_err)?;
        let target = if fine.q.mesh().contains_point(x) { Multivector::one(3) } else { Multivector::zero(3) };
        let e = c.max_diff(&target);
        worst = worst.max(e);
        let mut row = point(x);
        row.extend([num(c.scalar_part()), num(e)]);
        indicator.push(row);
    }
    report.check("indicator", worst, Bound::AtMost(cfg.indicator_tol));
    report.tables.push(indicator);

    let teo = teodorescu_relations(&fine, &ctx, cfg, &pts)?;
    for (name, v) in [("teodorescu.interior", teo.0), ("teodorescu.exterior", teo.1)] {
        report.check(name, v, Bound::AtMost(cfg.teodorescu_tol));
    }
    report.tables.push(teo.2);
    Ok(report)
}

/// `ψ∂T_ψv = v·1_Ω`, `ψ∂T_φψv = T_φv` and `φ∂ψ∂T_φψv = v·1_Ω` by finite differences.
fn teodorescu_relations(lv: &Level, ctx: &KernelContext, cfg: &BpConfig, pts: &[P3]) -> Result<(f64, f64, Table), CliError> {
    let mut table = Table::new("teodorescu", &["field", "x1", "x2", "x3", "inside", "rel1", "trel1", "trel2"]);
    let (mut interior, mut exterior): (f64, f64) = (0.0, 0.0);
    for name in ["one", "quadratic"] {
        let v = AnalyticField::by_name(name, 3).map_err(core_err)?;
        let vf = &v;
        let dens = VolumeDensity::new(&lv.vq, move |y: &P3| hyperrh::SmoothField::value(vf, y));
        let rows = pts
            .par_iter()
            .map(|x| -> hyperrh::Result<(P3, bool, [f64; 3])> {
                let inside = lv.q.mesh().contains_point(x);
                let target = if inside { hyperrh::SmoothField::value(&v, x) } else { Multivector::zero(3) };
                let d_psi = teodorescu_dirac_fd(&lv.vq, ctx, Kernel::Psi, &dens, x, cfg.fd_step)?;
                let d_phipsi = teodorescu_dirac_fd(&lv.vq, ctx, Kernel::Repr, &dens, x, cfg.fd_step)?;
                let t_phi = teodorescu_phi(&lv.vq, ctx, &dens, x)?;
                let dd = teodorescu_second_order_fd(&lv.vq, ctx, Kernel::Repr, &dens, x, cfg.fd_step)?;
                Ok((*x, inside, [d_psi.max_diff(&target), d_phipsi.max_diff(&t_phi), dd.max_diff(&target)]))
            })
            .collect::<hyperrh::Result<Vec<_>>>()
            .map_err(core_err)?;
        for (x, inside, r) in rows {
            let worst = max_of(r);
            if inside {
                interior = interior.max(worst);
            } else {
                exterior = exterior.max(worst);
            }
            let mut row = vec![name.to_string()];
            row.extend(point(&x));
            row.push(inside.to_string());
            row.extend(r.iter().map(|v| num(*v)));
            table.push(row);
        }
    }
    Ok((interior, exterior, table))
}
