use hyperrh::kernels::kernel_harmonicity_residual;
use hyperrh::{dirac_fd, sphere_area, KernelContext, StructuralSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn frames(seed: u64, m: usize) -> KernelContext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KernelContext::new(StructuralSet::random(m, &mut rng), StructuralSet::random(m, &mut rng)).unwrap()
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 3).prop_filter("away from the origin", |x| x.iter().map(|v| v * v).sum::<f64>() > 0.1)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn equal_frames_give_the_newton_kernel(seed in any::<u64>(), x in point()) {
        let psi = StructuralSet::random(3, &mut ChaCha8Rng::seed_from_u64(seed));
        let ctx = KernelContext::new(psi.clone(), psi).unwrap();
        let k = ctx.k_phipsi(&x).unwrap();
        let expected = 1.0 / (sphere_area(3) * norm(&x));
        prop_assert!((k.scalar_part() - expected).abs() < 1e-12);
        prop_assert!((k.norm() - expected).abs() < 1e-12);
    }

    #[test]
    fn kernels_are_homogeneous(seed in any::<u64>(), x in point(), lambda in 0.2..5.0f64) {
        let ctx = frames(seed, 3);
        let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let kx = ctx.k_psi(&x).unwrap().scale(lambda.powi(-2));
        prop_assert!(ctx.k_psi(&y).unwrap().max_diff(&kx) < 1e-12 * kx.max_abs().max(1.0));
        let gx = ctx.k_phipsi(&x).unwrap().scale(lambda.powi(-1));
        prop_assert!(ctx.k_phipsi(&y).unwrap().max_diff(&gx) < 1e-12 * gx.max_abs().max(1.0));
    }
}

#[test]
fn cauchy_kernel_is_the_dirac_of_the_newton_kernel() {
    let ctx = frames(11, 3);
    let same = KernelContext::new(ctx.psi.clone(), ctx.psi.clone()).unwrap();
    for x in [[0.3, -0.7, 0.5], [1.2, 0.1, -0.4], [-0.2, -0.3, -0.9]] {
        let d = dirac_fd(|p| same.k_phipsi(p), &ctx.psi, &x, 1e-4).unwrap();
        assert!(d.max_diff(&ctx.k_psi(&x).unwrap()) < 1e-6);
    }
}

#[test]
fn residuals_shrink_quadratically() {
    let ctx = frames(5, 3);
    let x = [0.6, -0.4, 0.8];
    let r: Vec<_> = [0.04, 0.02, 0.01, 0.005].iter().map(|h| kernel_harmonicity_residual(&ctx, &x, *h).unwrap()).collect();
    for w in r.windows(2) {
        assert!(w[0].cauchy / w[1].cauchy > 3.0);
        assert!(w[0].second_order / w[1].second_order > 3.0);
        assert!(w[0].teodorescu / w[1].teodorescu > 3.0);
    }
}

#[test]
fn four_dimensional_kernels() {
    let ctx = frames(9, 4);
    let x = [0.5, 0.2, -0.3, 0.7];
    let r = kernel_harmonicity_residual(&ctx, &x, 1e-3).unwrap();
    assert!(r.cauchy < 1e-4 && r.second_order < 1e-4 && r.teodorescu < 1e-4);
}

#[test]
fn origin_is_singular() {
    let ctx = frames(1, 3);
    assert!(ctx.k_psi(&[0.0; 3]).is_err());
}
