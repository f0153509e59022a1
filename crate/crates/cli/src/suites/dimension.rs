//! Box dimension, d-sum trends, Whitney proportionality and the Whitney extension checks.

use std::sync::Arc;

use hyperrh::geometry::jet::jet_from_function;
use hyperrh::geometry::mesh::{icosphere, koch_extrusion, koch_island, KOCH_HEIGHT};
use hyperrh::geometry::prism::{d_sum_trend, ExtrudedPolygon};
use hyperrh::geometry::dimension::geometric_radii;
use hyperrh::geometry::{box_dimension_estimate, d_summability_integral, whitney_decompose, BoundaryMesh, WhitneyExtension, P3};
use hyperrh::stats::loglog_slope;
use hyperrh::{AnalyticField, SmoothField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{core_err, max_of, spiral, Settings};
use crate::report::{num, Bound, Report, Series, Table};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionConfig {
    pub koch_level: u32,
    pub koch_rows: usize,
    /// Covering radii `[largest, smallest, count]`.
    pub koch_radii: (f64, f64, usize),
    pub sphere_level: u32,
    pub sphere_radii: (f64, f64, usize),
    pub koch_target: f64,
    pub koch_tol: f64,
    pub sphere_tol: f64,
    /// Koch level of the prism used for d-sum trends.
    pub trend_level: u32,
    pub d_above: f64,
    pub d_below: f64,
    pub whitney_depth: u32,
    pub extension: ExtensionConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionConfig {
    pub field: String,
    pub alpha: f64,
    /// Icosphere levels of the trace sweep.
    pub trace_levels: Vec<u32>,
    pub trace_samples: usize,
    pub trace_slack: f64,
    /// Icosphere level and distances of the second-derivative sweep.
    pub growth_level: u32,
    pub growth_distances: Vec<f64>,
    pub growth_directions: usize,
    pub growth_slack: f64,
    pub partition_points: usize,
    pub partition_tol: f64,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self {
            field: "gaussian-e12".into(),
            alpha: 1.0,
            trace_levels: vec![1, 2, 3, 4],
            trace_samples: 200,
            trace_slack: 0.2,
            growth_level: 5,
            growth_distances: vec![0.4, 0.2, 0.1, 0.05],
            growth_directions: 20,
            growth_slack: 0.1,
            partition_points: 200,
            partition_tol: 1e-10,
        }
    }
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self {
            koch_level: 3,
            koch_rows: 16,
            koch_radii: (0.2, 0.02, 6),
            sphere_level: 4,
            sphere_radii: (0.4, 0.08, 6),
            koch_target: 2.26,
            koch_tol: 0.08,
            sphere_tol: 0.1,
            trend_level: 7,
            d_above: 2.4,
            d_below: 2.1,
            whitney_depth: 5,
            extension: ExtensionConfig::default(),
        }
    }
}

fn radii(r: (f64, f64, usize)) -> Vec<f64> {
    geometric_radii(r.0, r.1, r.2)
}

pub fn run(settings: &Settings, cfg: &DimensionConfig) -> Result<Report, CliError> {
    let mut report = Report::new("dimension", settings.seed);
    report.param("resolution", settings.resolution_label());
    report.param("config", cfg);
    let koch = koch_extrusion(cfg.koch_level, KOCH_HEIGHT, cfg.koch_rows).map_err(core_err)?;
    let sphere = icosphere([0.0; 3], 1.0, cfg.sphere_level + settings.refine).map_err(core_err)?;

    let mut cover = Table::new("covering", &["surface", "tau", "count"]);
    let mut covering_series = Vec::new();
    for (name, mesh, r, target, tol) in [
        ("koch", &koch, cfg.koch_radii, cfg.koch_target, cfg.koch_tol),
        ("sphere", &sphere, cfg.sphere_radii, 2.0, cfg.sphere_tol),
    ] {
        let bd = box_dimension_estimate(mesh, &radii(r)).map_err(core_err)?;
        report.check(&format!("box-dimension.{name}"), bd.estimate, Bound::within(target, tol));
        report.param(&format!("box-dimension.{name}.whole"), bd.whole);
        let mut s = Series::new(&format!("covering-{name}"), "log_inv_tau", "log_count");
        for (tau, n) in &bd.counts {
            cover.push(vec![name.into(), num(*tau), n.to_string()]);
            s.points.push(((1.0 / tau).ln(), (*n as f64).ln()));
        }
        covering_series.push(s);
        if name == "koch" {
            let integral = d_summability_integral(&bd.counts, cfg.d_above);
            report.param("d-summability-integral.koch", integral.last().map(|p| p.1));
        }
    }
    report.tables.push(cover);
    report.series.extend(covering_series);

    // d-sum trends on the extruded prefractal, resolved down to its segment length.
    let prism = ExtrudedPolygon::new(koch_island(cfg.trend_level), KOCH_HEIGHT).map_err(core_err)?;
    let feature = 3f64.powi(-(cfg.trend_level as i32));
    let mut dsum = Table::new("d-sum", &["d", "depth", "increment", "partial_sum"]);
    for (label, d, want_flat) in [("above", cfg.d_above, true), ("below", cfg.d_below, false)] {
        let trend = d_sum_trend(&prism, feature, d).map_err(core_err)?;
        // A negative increment slope means the partial sums flatten.
        let bound = if want_flat { Bound::AtMost(0.0) } else { Bound::AtLeast(0.0) };
        report.check(&format!("d-sum-trend.{label}"), trend.slope, bound);
        report.param(&format!("d-sum-window.{label}"), trend.window);
        let mut s = Series::new(&format!("d-sum-{label}"), "depth", "partial_d_sum");
        for (k, inc, partial) in &trend.report.per_depth {
            dsum.push(vec![num(d), k.to_string(), num(*inc), num(*partial)]);
            s.points.push((f64::from(*k), *partial));
        }
        report.series.push(s);
    }
    report.tables.push(dsum);

    let mut whitney = Table::new("whitney", &["surface", "cubes", "proportional_fraction", "covered_volume"]);
    for (name, mesh) in [("koch", &koch), ("sphere", &sphere)] {
        let cubes = whitney_decompose(mesh, cfg.whitney_depth + settings.refine).map_err(core_err)?;
        let frac = cubes.proportionality_fraction();
        report.check(&format!("whitney-proportionality.{name}"), frac, Bound::AtLeast(1.0));
        whitney.push(vec![
            name.into(),
            cubes.whitney().count().to_string(),
            num(frac),
            num(cubes.covered_volume()),
        ]);
    }
    report.tables.push(whitney);

    extension_checks(&cfg.extension, &mut report)?;
    Ok(report)
}

fn extension_for(field: &AnalyticField, level: u32, alpha: f64) -> Result<(Arc<BoundaryMesh>, WhitneyExtension), CliError> {
    let mesh = Arc::new(icosphere([0.0; 3], 1.0, level).map_err(core_err)?);
    let jet = jet_from_function(field, &mesh, alpha).map_err(core_err)?;
    let ext = WhitneyExtension::new(jet, mesh.clone()).map_err(core_err)?;
    Ok((mesh, ext))
}

fn hessian_norm(d: &hyperrh::Derivatives) -> f64 {
    d.hess.iter().map(|h| h.norm().powi(2)).sum::<f64>().sqrt()
}

/// Trace convergence, second-derivative growth and partition of unity.
pub fn extension_checks(cfg: &ExtensionConfig, report: &mut Report) -> Result<(), CliError> {
    let f = AnalyticField::by_name(&cfg.field, 3).map_err(core_err)?;
    let mut trace = Table::new("extension-trace", &["level", "spacing", "max_error"]);
    let mut series = Series::new("extension-trace", "log_spacing", "log_error");
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for &level in &cfg.trace_levels {
        let (mesh, ext) = extension_for(&f, level, cfg.alpha)?;
        let n = mesh.num_triangles();
        let k = cfg.trace_samples.min(n);
        let err = max_of(
            (0..k)
                .into_par_iter()
                .map(|i| {
                    let c = mesh.centroids()[i * n / k];
                    ext.value(&c).max_diff(&f.value(&c))
                })
                .collect::<Vec<_>>(),
        );
        let h = mesh.mean_edge();
        trace.push(vec![level.to_string(), num(h), num(err)]);
        series.points.push((h.ln(), err.ln()));
        hs.push(h);
        errs.push(err);
    }
    let slope = loglog_slope(&hs, &errs).unwrap_or(f64::NAN);
    report.check("extension-trace-exponent", slope, Bound::AtLeast(1.0 + cfg.alpha - cfg.trace_slack));
    report.tables.push(trace);
    report.series.push(series);

    let (mesh, ext) = extension_for(&f, cfg.growth_level, cfg.alpha)?;
    let dirs = spiral(cfg.growth_directions);
    let mut growth = Table::new("extension-growth", &["distance", "max_hessian"]);
    let mut gseries = Series::new("extension-growth", "log_distance", "log_hessian");
    let mut ds = Vec::new();
    let mut hmax = Vec::new();
    for &t in &cfg.growth_distances {
        let vals: Vec<f64> = dirs
            .par_iter()
            .map(|d| {
                let x: P3 = d.map(|v| v * (1.0 - t));
                hessian_norm(&ext.derivatives(&x, 2))
            })
            .collect();
        let m = max_of(vals);
        let dist = max_of(dirs.iter().map(|d| mesh.nearest(&d.map(|v| v * (1.0 - t))).distance));
        growth.push(vec![num(dist), num(m)]);
        gseries.points.push((dist.ln(), m.ln()));
        ds.push(dist);
        hmax.push(m);
    }
    let gslope = loglog_slope(&ds, &hmax).unwrap_or(f64::NAN);
    report.check("extension-hessian-exponent", gslope, Bound::AtLeast(cfg.alpha - 1.0 - cfg.growth_slack));
    report.tables.push(growth);
    report.series.push(gseries);

    // Partition of unity on a shell sweep inside and outside Γ.
    let pts: Vec<P3> = spiral(cfg.partition_points)
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let r = 0.3 + 1.2 * (i as f64 + 0.5) / cfg.partition_points as f64;
            d.map(|v| v * r)
        })
        .collect();
    let pu = max_of(
        pts.par_iter()
            .map(|x| {
                let w = ext.partition_weights(x);
                if w.is_empty() {
                    1.0
                } else {
                    (w.iter().sum::<f64>() - 1.0).abs()
                }
            })
            .collect::<Vec<_>>(),
    );
    report.check("partition-of-unity", pu, Bound::AtMost(cfg.partition_tol));
    Ok(())
}
