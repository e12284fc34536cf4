//! Capacity axioms on the supported shapes.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use symcap::regions::{capacity, inclusion_check, map_region, scale_region, PhaseRegion};
use symcap::symcore::{random_symplectic, PhasePoint};

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(2 * n, 2 * n, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(2 * n, 2 * n) * 0.3
}

fn shapes(n: usize, rng: &mut ChaCha8Rng) -> Vec<PhaseRegion<f64>> {
    let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    vec![
        PhaseRegion::centered_ball(n, rng.random_range(0.2..3.0)).unwrap(),
        PhaseRegion::cylinder(n - 1, PhasePoint::origin(n), rng.random_range(0.2..3.0)).unwrap(),
        PhaseRegion::solid_torus(radii.clone()).unwrap(),
        PhaseRegion::normal_ellipsoid(&radii).unwrap(),
        PhaseRegion::ellipsoid(
            PhasePoint::origin(n),
            random_spd(n, rng),
            rng.random_range(0.2..3.0),
        )
        .unwrap(),
    ]
}

#[test]
fn seeded_ball_image() {
    let s = random_symplectic::<f64>(2, 5, 1.0).unwrap();
    let ball = PhaseRegion::centered_ball(2, 1.0).unwrap();
    let image = map_region(&ball, &s, &PhasePoint::origin(2)).unwrap();
    assert_eq!(capacity(&image).unwrap().value, PI);
}

#[test]
fn ellipsoid_and_torus_agree_on_equal_radii() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=5 {
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let e = capacity(&PhaseRegion::normal_ellipsoid(&radii).unwrap())
            .unwrap()
            .value;
        let t = capacity(&PhaseRegion::solid_torus(radii.clone()).unwrap())
            .unwrap()
            .value;
        let rmin = radii.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((e - t).abs() <= 1e-12 * t);
        assert!((t - PI * rmin * rmin).abs() <= 1e-15 * t);
    }
}

#[test]
fn nested_chain_ball_torus_cylinder() {
    let radii = [1.0, 2.0, 0.7];
    let e = PhaseRegion::normal_ellipsoid(&radii).unwrap();
    let t = PhaseRegion::solid_torus(radii.to_vec()).unwrap();
    for (j, r) in radii.iter().enumerate() {
        let z = PhaseRegion::cylinder(j, PhasePoint::origin(3), *r).unwrap();
        assert!(inclusion_check(&e, &t).unwrap().contained);
        assert!(inclusion_check(&t, &z).unwrap().contained);
        assert!(inclusion_check(&e, &z).unwrap().contained);
        let chain = [&e, &t, &z].map(|r| capacity(r).unwrap().value);
        assert!(chain[0] <= chain[1] + 1e-12 && chain[1] <= chain[2] + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conformality(n in 1usize..4, seed in any::<u64>(), lambda in prop_oneof![Just(0.5), Just(2.0), Just(7.0), -5.0f64..5.0]) {
        prop_assume!(lambda.abs() > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for shape in shapes(n, &mut rng) {
            let base = capacity(&shape).unwrap().value;
            let scaled = capacity(&scale_region(&shape, lambda).unwrap()).unwrap().value;
            prop_assert!((scaled - lambda * lambda * base).abs() <= 1e-12 * lambda * lambda * base);
        }
    }

    #[test]
    fn invariance(n in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_symplectic::<f64>(n, seed, 1.0).unwrap();
        let shift = PhasePoint::new((0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        for shape in shapes(n, &mut rng) {
            let base = capacity(&shape).unwrap().value;
            let image = map_region(&shape, &s, &shift).unwrap();
            prop_assert!((capacity(&image).unwrap().value - base).abs() <= 1e-9 * base);
            if let PhaseRegion::Ellipsoid { hessian, level, .. } = &shape {
                // recompute from the pushed-forward Hessian S⁻ᵀMS⁻¹
                let inv = s.inverse();
                let m = inv.as_matrix().transpose() * hessian * inv.as_matrix();
                let m = (&m + m.transpose()) * 0.5;
                let pushed = PhaseRegion::ellipsoid(shift.clone(), m, *level).unwrap();
                prop_assert!((capacity(&pushed).unwrap().value - base).abs() <= 1e-9 * base);
            }
        }
    }

    #[test]
    fn monotone_on_supported_pairs(n in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = shapes(n, &mut rng);
        let b = shapes(n, &mut rng);
        for inner in &a {
            for outer in &b {
                if let Ok(inc) = inclusion_check(inner, outer) {
                    if inc.contained {
                        prop_assert!(capacity(inner).unwrap().value <= capacity(outer).unwrap().value + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn ball_and_cylinder_normalization(n in 1usize..6, r in 0.01f64..100.0) {
        let ball = capacity(&PhaseRegion::centered_ball(n, r).unwrap()).unwrap();
        let cyl = capacity(&PhaseRegion::cylinder(n - 1, PhasePoint::origin(n), r).unwrap()).unwrap();
        prop_assert!(ball.exact && cyl.exact);
        prop_assert_eq!(ball.value, cyl.value);
        prop_assert_eq!(ball.value, PI * r * r);
    }
}
