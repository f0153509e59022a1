use std::collections::BTreeMap;
use std::sync::Arc;

use hyperrh::geometry::jet::{jet_from_function, LipschitzJet};
use hyperrh::geometry::mesh::icosphere;
use hyperrh::geometry::BoundaryMesh;
use hyperrh::rh::{
    probe_points, psi_derivative_fd_gap, solve, solve_fractal_general, verify_rh_conditions, RHProblem, RHSolution,
    SolverMode, VerifyOptions,
};
use hyperrh::{AnalyticField, Error, KernelContext, Multivector, StructuralSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx() -> KernelContext {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    KernelContext::new(StructuralSet::random(3, &mut rng), StructuralSet::random(3, &mut rng)).unwrap()
}

fn mv(pairs: &[(&str, f64)]) -> Multivector {
    let map: BTreeMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Multivector::from_blade_map(3, &map).unwrap()
}

fn jet(name: &str, mesh: &BoundaryMesh) -> LipschitzJet {
    jet_from_function(&AnalyticField::by_name(name, 3).unwrap(), mesh, 1.0).unwrap()
}

fn problem(jet: LipschitzJet, mesh: &Arc<BoundaryMesh>, a: Multivector, b: Multivector, mode: SolverMode, depth: u32) -> RHProblem {
    RHProblem::new(ctx(), a, b, jet, mesh.clone(), mode, 2.5).unwrap().with_whitney_depth(depth)
}

fn probes(sol: &RHSolution) -> Vec<[f64; 3]> {
    let (i, o) = probe_points(sol, 5);
    i.into_iter().chain(o).collect()
}

fn sphere(level: u32) -> Arc<BoundaryMesh> {
    Arc::new(icosphere([0.0; 3], 1.0, level).unwrap())
}

#[test]
fn zero_datum_gives_zero_solution() {
    let mesh = sphere(2);
    for mode in [SolverMode::Smooth, SolverMode::Fractal] {
        let p = problem(jet("zero", &mesh), &mesh, mv(&[("", 2.0)]), mv(&[("", 1.0), ("12", 1.0)]), mode, 3);
        let sol = solve(&p).unwrap();
        for x in probes(&sol) {
            assert_eq!(sol.u(&x).unwrap().max_abs(), 0.0);
        }
    }
}

#[test]
fn fractal_identities_hold_on_the_boundary() {
    let mesh = sphere(2);
    let p = problem(jet("quadratic", &mesh), &mesh, mv(&[("", 2.0)]), mv(&[("", 1.0), ("12", 1.0)]), SolverMode::Fractal, 3);
    let sol = solve(&p).unwrap();
    let opts = VerifyOptions {
        boundary_samples: Some(12),
        harmonic_probes: 1,
        ..VerifyOptions::default()
    };
    let report = verify_rh_conditions(&sol, &p, &opts).unwrap();
    assert!(report.first_max < 1e-10 && report.second_max < 1e-10, "{} {}", report.first_max, report.second_max);
}

#[test]
fn equal_constants_shortcut_matches_general_formula() {
    let mesh = sphere(2);
    let a = mv(&[("", 1.5), ("13", -0.5)]);
    let p = problem(jet("quadratic", &mesh), &mesh, a.clone(), a, SolverMode::Fractal, 3);
    let simple = solve(&p).unwrap();
    let general = solve_fractal_general(&p).unwrap();
    assert!(simple.provenance.simple_path && !general.provenance.simple_path);
    for x in probes(&simple) {
        assert!(simple.u(&x).unwrap().max_diff(&general.u(&x).unwrap()) < 1e-10);
    }
}

#[test]
fn fractal_solution_is_linear_in_the_datum() {
    let mesh = sphere(2);
    let (a, b) = (mv(&[("", 2.0)]), mv(&[("", 1.0), ("12", 1.0)]));
    let f = AnalyticField::by_name("x1", 3).unwrap();
    let g = AnalyticField::by_name("gaussian-e12", 3).unwrap();
    let fg = AnalyticField::by_name("x1", 3).unwrap().plus(AnalyticField::by_name("gaussian-e12", 3).unwrap());
    let solve_with = |field: &AnalyticField, scale: f64| {
        let mut j = jet_from_function(field, &mesh, 1.0).unwrap();
        for s in &mut j.samples {
            s.value.scale_mut(scale);
            s.grad.iter_mut().for_each(|d| d.scale_mut(scale));
        }
        solve(&problem(j, &mesh, a.clone(), b.clone(), SolverMode::Fractal, 3)).unwrap()
    };
    let (uf, ug, ufg, u3) = (solve_with(&f, 1.0), solve_with(&g, 1.0), solve_with(&fg, 1.0), solve_with(&g, -3.0));
    for x in probes(&uf) {
        let sum = &uf.u(&x).unwrap() + &ug.u(&x).unwrap();
        assert!(ufg.u(&x).unwrap().max_diff(&sum) < 1e-12);
        assert!(u3.u(&x).unwrap().max_diff(&ug.u(&x).unwrap().scale(-3.0)) < 1e-12);
    }
}

#[test]
fn smooth_and_fractal_agree_for_linear_data() {
    let mesh = sphere(2);
    let (a, b) = (mv(&[("", 2.0)]), mv(&[("", 1.0), ("12", 1.0)]));
    let smooth = solve(&problem(jet("x1-plus-x2e1", &mesh), &mesh, a.clone(), b.clone(), SolverMode::Smooth, 3)).unwrap();
    let fractal = solve(&problem(jet("x1-plus-x2e1", &mesh), &mesh, a, b, SolverMode::Fractal, 3)).unwrap();
    for x in probes(&smooth) {
        assert!(smooth.u(&x).unwrap().max_diff(&fractal.u(&x).unwrap()) < 5e-2);
    }
}

#[test]
fn smooth_solution_satisfies_traces_and_decays() {
    let mesh = sphere(3);
    let p = problem(jet("quadratic", &mesh), &mesh, mv(&[("", 2.0)]), mv(&[("", 1.0), ("12", 1.0)]), SolverMode::Smooth, 0);
    let sol = solve(&p).unwrap();
    let report = verify_rh_conditions(&sol, &p, &VerifyOptions::default()).unwrap();
    assert!(report.first_max < 5e-2 && report.second_max < 5e-2);
    assert!(report.decay.u_decays && report.decay.du_decays, "{:?}", report.decay);
    assert!(report.harmonicity_max < 5e-2);
    for x in probes(&sol) {
        assert!(psi_derivative_fd_gap(&sol, &p, &x, 1e-3).unwrap() < 3e-2);
    }
}

#[test]
fn hypothesis_and_constants_are_checked() {
    let mesh = sphere(1);
    let j = jet_from_function(&AnalyticField::by_name("x1", 3).unwrap(), &mesh, 0.5).unwrap();
    let r = RHProblem::new(ctx(), mv(&[("", 1.0)]), mv(&[("", 1.0)]), j, mesh.clone(), SolverMode::Fractal, 2.5);
    assert!(matches!(r, Err(Error::HypothesisViolated { .. })));
    // 1 + e123 is a zero divisor in R_{0,3}.
    let r = RHProblem::new(ctx(), mv(&[("", 1.0), ("123", 1.0)]), mv(&[("", 1.0)]), jet("x1", &mesh), mesh, SolverMode::Smooth, 2.5);
    assert!(matches!(r, Err(Error::NonInvertibleConstant { .. })));
}
