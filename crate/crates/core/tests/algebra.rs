use std::collections::BTreeMap;

use hyperrh::{dirac_poly, factorization_residual, Multivector, PolyField, StructuralSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mv(m: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-2.0..2.0f64, 1usize << m).prop_map(move |c| Multivector::from_coeffs(m, &c).unwrap())
}

fn triple() -> impl Strategy<Value = (Multivector, Multivector, Multivector)> {
    (2usize..=4).prop_flat_map(|m| (mv(m), mv(m), mv(m)))
}

proptest! {
    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        prop_assert!(a.gp(&b).gp(&c).max_diff(&a.gp(&b.gp(&c))) < 1e-12);
    }

    #[test]
    fn product_distributes((a, b, c) in triple()) {
        let left = a.gp(&(&b + &c));
        let right = &a.gp(&b) + &a.gp(&c);
        prop_assert!(left.max_diff(&right) < 1e-12);
    }

    #[test]
    fn inverse_is_two_sided((a, _, _) in triple()) {
        if let Ok(ai) = a.inverse() {
            let m = a.dim();
            let scale = ai.max_abs().max(1.0);
            prop_assert!(a.gp(&ai).max_diff(&Multivector::one(m)) < 1e-9 * scale);
            prop_assert!(ai.gp(&a).max_diff(&Multivector::one(m)) < 1e-9 * scale);
        }
    }

    #[test]
    fn vectors_square_to_minus_norm(v in prop::collection::vec(-3.0..3.0f64, 3)) {
        let mut x = Multivector::zero(3);
        for (i, c) in v.iter().enumerate() {
            x.axpy(*c, &Multivector::basis_vector(3, i + 1));
        }
        let n2: f64 = v.iter().map(|c| c * c).sum();
        prop_assert!(x.gp(&x).max_diff(&Multivector::scalar(3, -n2)) < 1e-12);
    }

    #[test]
    fn blade_map_round_trips((a, _, _) in triple()) {
        let back = Multivector::from_blade_map(a.dim(), &a.to_blade_map()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn dirac_squares_to_minus_laplacian(seed in any::<u64>(), m in 3usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = StructuralSet::random(m, &mut rng);
        let u = PolyField::random(m, 3, &mut rng);
        prop_assert!(factorization_residual(&u, &frame) < 1e-12);
    }

    #[test]
    fn dirac_is_linear(seed in any::<u64>(), s in -3.0..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = StructuralSet::random(3, &mut rng);
        let u = PolyField::random(3, 2, &mut rng);
        let v = PolyField::random(3, 2, &mut rng);
        let lhs = dirac_poly(&u.add(&v.scale(s)), &frame);
        let rhs = dirac_poly(&u, &frame).add(&dirac_poly(&v, &frame).scale(s));
        prop_assert!(lhs.add(&rhs.scale(-1.0)).is_zero(1e-12));
    }
}

#[test]
fn unknown_blade_rejected() {
    let map = BTreeMap::from([("15".to_string(), 1.0)]);
    assert!(Multivector::from_blade_map(3, &map).is_err());
}

#[test]
fn non_orthonormal_set_breaks_factorization() {
    let frame = hyperrh::Frame::from_coords(vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let worst = (0..20)
        .map(|_| factorization_residual(&PolyField::random(3, 3, &mut rng), &frame))
        .fold(0.0, f64::max);
    assert!(worst > 0.1);
}
