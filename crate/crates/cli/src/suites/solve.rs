//! Riemann–Hilbert solve from a JSON problem description, with verification.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hyperrh::clifford::blade_key;
use hyperrh::geometry::jet::{jet_from_function, LipschitzJet};
use hyperrh::geometry::mesh::{build_boundary_mesh, FractalDescriptor, GeometryFamily};
use hyperrh::rh::verify::DECAY_FLOOR;
use hyperrh::rh::{
    probe_points, psi_derivative_fd_gap, solve, verify_rh_conditions, RHProblem, RHSolution,
    SolverMode, VerifyOptions,
};
use hyperrh::{AnalyticField, KernelContext, Multivector, StructuralSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{core_err, max_of, Settings};
use crate::report::{num, point, Bound, Report, Series, Table};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum JetSource {
    /// A named analytic field sampled at the mesh vertices.
    Analytic(String),
    /// A jet CSV with columns `x1,x2,x3` and the value and gradient coefficients.
    Csv(PathBuf),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub family: GeometryFamily,
    /// Prefractal level (Koch extrusion only).
    pub level: u32,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            family: GeometryFamily::UnitBall,
            level: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    /// Sphere refinement level, or wall rows of a Koch extrusion.
    pub mesh: u32,
    pub whitney_depth: u32,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            mesh: 4,
            whitney_depth: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Boundary identities of the fractal formula.
    pub identity: f64,
    /// One-sided traces of the smooth formula.
    pub trace: f64,
    pub psi_derivative: f64,
    pub harmonicity: f64,
    /// Smooth against fractal agreement at the probes.
    pub compare: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            trace: 5e-2,
            psi_derivative: 3e-2,
            harmonicity: 5e-2,
            compare: 5e-2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub m: usize,
    pub mode: SolverMode,
    pub geometry: Geometry,
    pub alpha: f64,
    pub d: f64,
    pub a: BTreeMap<String, f64>,
    pub b: BTreeMap<String, f64>,
    pub jet: JetSource,
    pub resolution: Resolution,
    pub tolerances: Tolerances,
    /// Probes on each side of `Γ`.
    pub probes: usize,
    /// Probes per side for the `ψ∂u` finite-difference check; 0 skips it.
    pub derivative_probes: usize,
    pub fd_step: f64,
    /// Boundary samples checked; absent means all.
    pub boundary_samples: Option<usize>,
    /// Also solve with the other formula and compare at the probes.
    pub compare: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            m: 3,
            mode: SolverMode::Fractal,
            geometry: Geometry::default(),
            alpha: 1.0,
            d: 2.5,
            a: BTreeMap::from([(String::new(), 2.0)]),
            b: BTreeMap::from([(String::new(), 1.0), ("12".into(), 1.0)]),
            jet: JetSource::Analytic("x1-plus-x2e1".into()),
            resolution: Resolution::default(),
            tolerances: Tolerances::default(),
            probes: 5,
            derivative_probes: 1,
            fd_step: 1e-3,
            boundary_samples: Some(20),
            compare: false,
        }
    }
}

/// Builds the problem; `base` resolves a relative jet CSV path.
pub fn prepare(settings: &Settings, cfg: &SolveConfig, base: Option<&Path>) -> Result<RHProblem, CliError> {
    let m = settings.m.unwrap_or(cfg.m);
    let desc = FractalDescriptor {
        family: cfg.geometry.family,
        level: cfg.geometry.level,
        box_dimension: None,
        d: cfg.d,
    };
    if cfg.mode == SolverMode::Fractal {
        desc.validate_fractal().map_err(core_err)?;
    }
    let mesh = Arc::new(build_boundary_mesh(&desc, cfg.resolution.mesh + settings.refine).map_err(core_err)?);
    let jet = match &cfg.jet {
        JetSource::Analytic(name) => {
            let f = AnalyticField::by_name(name, m).map_err(core_err)?;
            jet_from_function(&f, &mesh, cfg.alpha).map_err(core_err)?
        }
        JetSource::Csv(p) => {
            let path = match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p.clone(),
            };
            let file = std::fs::File::open(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            LipschitzJet::read_csv(file, m, cfg.alpha).map_err(core_err)?
        }
    };
    let mut rng = settings.rng();
    let ctx = KernelContext::new(StructuralSet::random(m, &mut rng), StructuralSet::random(m, &mut rng)).map_err(core_err)?;
    let a = Multivector::from_blade_map(m, &cfg.a).map_err(core_err)?;
    let b = Multivector::from_blade_map(m, &cfg.b).map_err(core_err)?;
    Ok(RHProblem::new(ctx, a, b, jet, mesh, cfg.mode, cfg.d)
        .map_err(core_err)?
        .with_whitney_depth(cfg.resolution.whitney_depth + settings.refine))
}

fn coefficient_header(m: usize) -> Vec<String> {
    (0..1usize << m)
        .map(|b| {
            let k = blade_key(b);
            if k.is_empty() {
                "u".to_string()
            } else {
                format!("u_e{k}")
            }
        })
        .collect()
}

/// `u` at the probes on both sides.
pub fn probe_values(solution: &RHSolution, per_side: usize) -> Result<Vec<(P3Row, Multivector)>, CliError> {
    let (inside, outside) = probe_points(solution, per_side);
    let pts: Vec<P3Row> = inside
        .into_iter()
        .map(|p| (p, true))
        .chain(outside.into_iter().map(|p| (p, false)))
        .collect();
    let values = pts
        .par_iter()
        .map(|(p, _)| solution.u(p))
        .collect::<hyperrh::Result<Vec<_>>>()
        .map_err(core_err)?;
    Ok(pts.into_iter().zip(values).collect())
}

/// A probe point and whether it lies inside `Γ`.
pub type P3Row = ([f64; 3], bool);

pub fn run(settings: &Settings, cfg: &SolveConfig, base: Option<&Path>) -> Result<Report, CliError> {
    let problem = &prepare(settings, cfg, base)?;
    let m = problem.ctx.m;
    let mut report = Report::new("solve", settings.seed);
    report.param("resolution", settings.resolution_label());
    report.param("config", cfg);
    let solution = solve(problem).map_err(core_err)?;
    report.param("provenance", &solution.provenance);

    let options = VerifyOptions {
        boundary_samples: cfg.boundary_samples,
        ..VerifyOptions::default()
    };
    let rh = verify_rh_conditions(&solution, problem, &options).map_err(core_err)?;
    let (label, tol) = match cfg.mode {
        SolverMode::Fractal => ("identity", cfg.tolerances.identity),
        SolverMode::Smooth => ("trace", cfg.tolerances.trace),
    };
    report.check(&format!("{label}.first"), rh.first_max, Bound::AtMost(tol));
    report.check(&format!("{label}.second"), rh.second_max, Bound::AtMost(tol));
    let mut boundary = Table::new("boundary", &["x1", "x2", "x3", "first", "second"]);
    for r in &rh.boundary {
        let mut row = point(&r.point);
        row.extend([num(r.first), num(r.second)]);
        boundary.push(row);
    }
    report.tables.push(boundary);

    let decay = &rh.decay;
    for (name, slope, norms, rate) in [
        ("u", decay.u_slope, &decay.u_norms, m as f64 - 2.0),
        ("psi-derivative", decay.du_slope, &decay.du_norms, m as f64 - 1.0),
    ] {
        match slope {
            Some(s) => report.check(&format!("decay.{name}"), s, Bound::within(-rate, hyperrh::rh::verify::SLOPE_SLACK)),
            None => report.check(&format!("decay.{name}-vanishes"), max_of(norms.iter().copied()), Bound::AtMost(DECAY_FLOOR)),
        };
    }
    let mut decay_table = Table::new("decay", &["radius", "u_norm", "psi_derivative_norm"]);
    let mut s = Series::new("decay", "log_radius", "log_u_norm");
    let mut sd = Series::new("decay-psi-derivative", "log_radius", "log_psi_derivative_norm");
    for ((r, u), du) in decay.radii.iter().zip(&decay.u_norms).zip(&decay.du_norms) {
        decay_table.push(vec![num(*r), num(*u), num(*du)]);
        s.points.push((r.ln(), u.ln()));
        sd.points.push((r.ln(), du.ln()));
    }
    report.tables.push(decay_table);
    report.series.extend([s, sd]);
    report.check("harmonicity", rh.harmonicity_max, Bound::AtMost(cfg.tolerances.harmonicity));

    let probes = probe_values(&solution, cfg.probes)?;
    let mut header = vec!["x1".to_string(), "x2".into(), "x3".into(), "inside".into()];
    header.extend(coefficient_header(m));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("probes", &header);
    for ((p, inside), u) in &probes {
        let mut row = point(p);
        row.push(inside.to_string());
        row.extend(u.coeffs().iter().map(|c| num(*c)));
        table.push(row);
    }
    report.tables.push(table);

    if cfg.derivative_probes > 0 {
        let (inside, outside) = probe_points(&solution, cfg.derivative_probes);
        let pts: Vec<[f64; 3]> = inside.into_iter().chain(outside).collect();
        let gaps = pts
            .par_iter()
            .map(|x| psi_derivative_fd_gap(&solution, problem, x, cfg.fd_step))
            .collect::<hyperrh::Result<Vec<_>>>()
            .map_err(core_err)?;
        report.check("psi-derivative", max_of(gaps), Bound::AtMost(cfg.tolerances.psi_derivative));
    }

    if cfg.compare {
        let other = match cfg.mode {
            SolverMode::Smooth => SolverMode::Fractal,
            SolverMode::Fractal => SolverMode::Smooth,
        };
        let twin = RHProblem::new(problem.ctx.clone(), problem.a.clone(), problem.b.clone(), problem.jet.clone(), problem.mesh.clone(), other, problem.d)
            .map_err(core_err)?
            .with_whitney_depth(problem.whitney_depth);
        let other_solution = solve(&twin).map_err(core_err)?;
        let diffs = probes
            .par_iter()
            .map(|((p, _), u)| Ok(other_solution.u(p)?.max_diff(u)))
            .collect::<hyperrh::Result<Vec<_>>>()
            .map_err(core_err)?;
        report.check("smooth-vs-fractal", max_of(diffs), Bound::AtMost(cfg.tolerances.compare));
    }
    Ok(report)
}
