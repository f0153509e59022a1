use std::sync::Arc;

use hyperrh::geometry::dimension::geometric_radii;
use hyperrh::geometry::jet::jet_from_function;
use hyperrh::geometry::mesh::{icosphere, koch_extrusion, KOCH_HEIGHT};
use hyperrh::geometry::{box_dimension_estimate, whitney_decompose, WhitneyExtension};
use hyperrh::{AnalyticField, SmoothField};
use proptest::prelude::*;

#[test]
fn sphere_box_dimension_is_two() {
    let mesh = icosphere([0.0; 3], 1.0, 4).unwrap();
    let bd = box_dimension_estimate(&mesh, &geometric_radii(0.4, 0.08, 6)).unwrap();
    assert!((bd.estimate - 2.0).abs() < 0.1, "{}", bd.estimate);
}

#[test]
fn koch_prefractal_box_dimension() {
    let mesh = koch_extrusion(3, KOCH_HEIGHT, 16).unwrap();
    let bd = box_dimension_estimate(&mesh, &geometric_radii(0.2, 0.02, 6)).unwrap();
    assert!((bd.estimate - 2.26).abs() < 0.08, "{}", bd.estimate);
}

#[test]
fn whitney_cubes_are_proportional() {
    let mesh = icosphere([0.0; 3], 1.0, 3).unwrap();
    let cubes = whitney_decompose(&mesh, 5).unwrap();
    assert_eq!(cubes.proportionality_fraction(), 1.0);
    for q in cubes.whitney() {
        let c = q.center();
        let dist = mesh.nearest(&c).distance;
        assert!(dist >= 0.5 * q.diameter());
    }
    let ball = 4.0 / 3.0 * std::f64::consts::PI;
    assert!(cubes.covered_volume() < ball * 1.01);
}

#[test]
fn extension_reproduces_linear_data() {
    let mesh = Arc::new(icosphere([0.0; 3], 1.0, 2).unwrap());
    let f = AnalyticField::by_name("x1-plus-x2e1", 3).unwrap();
    let jet = jet_from_function(&f, &mesh, 1.0).unwrap();
    let ext = WhitneyExtension::new(jet, mesh.clone()).unwrap();
    for x in [[0.2, 0.1, -0.3], [0.9, 0.0, 0.1], [1.3, -0.4, 0.2]] {
        assert!(ext.value(&x).max_diff(&f.value(&x)) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_of_unity(r in 0.2..1.8f64, theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU) {
        thread_local! {
            static EXT: WhitneyExtension = {
                let mesh = Arc::new(icosphere([0.0; 3], 1.0, 2).unwrap());
                let f = AnalyticField::by_name("quadratic", 3).unwrap();
                WhitneyExtension::new(jet_from_function(&f, &mesh, 1.0).unwrap(), mesh).unwrap()
            };
        }
        let x = [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()];
        EXT.with(|ext| {
            let w = ext.partition_weights(&x);
            if !w.is_empty() {
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                prop_assert!(w.iter().all(|v| *v >= 0.0));
            }
            Ok(())
        })?;
    }
}
