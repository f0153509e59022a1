use std::sync::Arc;

use hyperrh::geometry::jet::jet_from_function;
use hyperrh::geometry::mesh::icosphere;
use hyperrh::geometry::whitney_decompose;
use hyperrh::integral::{
    cauchy_psi, interpolate, psi_density, second_term, teodorescu_phipsi, two_sided_gap, BorelPompeiu, P1Density,
    SurfaceQuadrature, SurfaceRule, VolumeDensity, VolumeQuadrature,
};
use hyperrh::{AnalyticField, KernelContext, Multivector, StructuralSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx(seed: u64) -> KernelContext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KernelContext::new(StructuralSet::random(3, &mut rng), StructuralSet::random(3, &mut rng)).unwrap()
}

fn sphere(level: u32) -> SurfaceQuadrature {
    SurfaceQuadrature::new(Arc::new(icosphere([0.0; 3], 1.0, level).unwrap()), SurfaceRule::ThreePoint)
}

#[test]
fn cauchy_transform_of_one_is_the_indicator() {
    let ctx = ctx(2);
    let q = sphere(3);
    let one = AnalyticField::by_name("one", 3).unwrap();
    let rho = psi_density(&q, &ctx, &one);
    for (x, inside) in [([0.1, 0.2, -0.3], true), ([0.0, 0.5, 0.4], true), ([1.4, 0.3, 0.0], false), ([0.0, -2.0, 1.0], false)] {
        let c = cauchy_psi(&q, &ctx, &rho, &x).unwrap();
        let target = if inside { Multivector::one(3) } else { Multivector::zero(3) };
        assert!(c.max_diff(&target) < 1e-3, "{x:?}");
    }
}

#[test]
fn newton_potential_of_the_unit_ball() {
    let psi = StructuralSet::random(3, &mut ChaCha8Rng::seed_from_u64(8));
    let ctx = KernelContext::new(psi.clone(), psi).unwrap();
    let mesh = icosphere([0.0; 3], 1.0, 3).unwrap();
    let cubes = whitney_decompose(&mesh, 5).unwrap();
    let vq = VolumeQuadrature::new(&cubes, &mesh);
    let v = VolumeDensity::new(&vq, |_| Multivector::one(3));
    for x in [[0.2, 0.1, 0.0], [0.0, 0.0, 1.8]] {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let exact = if r2 < 1.0 { (3.0 - r2) / 6.0 } else { 1.0 / (3.0 * r2.sqrt()) };
        let t = teodorescu_phipsi(&vq, &ctx, &v, &x).unwrap();
        assert!((t.scalar_part() - exact).abs() < 2e-2, "{x:?}: {} vs {exact}", t.scalar_part());
    }
}

#[test]
fn borel_pompeiu_on_a_coarse_sphere() {
    let ctx = ctx(4);
    let mesh = Arc::new(icosphere([0.0; 3], 1.0, 3).unwrap());
    let cubes = whitney_decompose(mesh.as_ref(), 5).unwrap();
    let vq = VolumeQuadrature::new(&cubes, mesh.as_ref());
    let q = SurfaceQuadrature::new(mesh, SurfaceRule::ThreePoint);
    let u = AnalyticField::by_name("quadratic", 3).unwrap();
    let bp = BorelPompeiu::new(&q, &vq, &ctx, &u).unwrap();
    for x in [[0.3, -0.2, 0.1], [1.5, 0.2, -0.1]] {
        assert!(bp.first(&x).unwrap().residual < 3e-2);
        assert!(bp.second(&x).unwrap().residual < 5e-2);
    }
}

#[test]
fn cauchy_transform_jumps_by_the_datum() {
    let ctx = ctx(6);
    let q = sphere(3);
    let mesh = q.mesh().clone();
    let f = AnalyticField::by_name("gaussian-e12", 3).unwrap();
    let jet = jet_from_function(&f, &mesh, 1.0).unwrap();
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
    let first = P1Density::new(&q, P1Density::normal_factors(&q, &ctx.psi), values.clone());
    let second = P1Density::new(&q, P1Density::normal_factors(&q, &ctx.phi), grads);
    for t in [0, 300, 900] {
        let x = mesh.centroids()[t];
        let n = mesh.normals()[t];
        let h = mesh.local_spacing(&x);
        let gap = two_sided_gap(
            |p| Ok(cauchy_psi(&q, &ctx, &first, p)? + second_term(&q, &ctx, &second, p)?),
            &x,
            &n,
            h,
        )
        .unwrap();
        assert!(gap.max_diff(&interpolate(&mesh, &values, t, &x)) < 5e-2);
        let cont = two_sided_gap(|p| second_term(&q, &ctx, &second, p), &x, &n, h).unwrap();
        assert!(cont.max_abs() < 1e-2);
    }
}
