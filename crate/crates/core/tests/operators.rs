use hyperrh::operators::counterexample_report;
use hyperrh::{dirac_fd, dirac_poly, second_order_apply, PolyField, StructuralSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn finite_differences_match_exact_dirac(seed in any::<u64>(), x in prop::collection::vec(-1.0..1.0f64, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StructuralSet::random(3, &mut rng);
        let u = PolyField::random(3, 2, &mut rng);
        let exact = dirac_poly(&u, &psi).eval(&x);
        let fd = dirac_fd(|p| Ok(u.eval(p)), &psi, &x, 1e-3).unwrap();
        prop_assert!(exact.max_diff(&fd) < 1e-8 * u.max_coeff().max(1.0));
    }

    #[test]
    fn equal_frames_reduce_to_minus_laplacian(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StructuralSet::random(3, &mut rng);
        let u = PolyField::random(3, 3, &mut rng);
        let lhs = second_order_apply(&u, &psi, &psi);
        prop_assert!(lhs.add(&u.laplacian()).is_zero(1e-12));
    }
}

#[test]
fn counterexample_in_dimension_four() {
    let report = counterexample_report(&StructuralSet::standard(4)).unwrap();
    assert_eq!(report.harmonicity_residual, 0.0);
    assert_eq!(report.laplacian, -8.0);
    assert!(report.violates_maximum_principle);
    assert!(report.value_at_origin > report.boundary_max);
}

#[test]
fn counterexample_needs_even_dimension() {
    assert!(counterexample_report(&StructuralSet::standard(3)).is_err());
}
