//! Shadow areas against Monte-Carlo estimates, and batch non-squeezing.

use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::{PI, SQRT_2};
use symcap::squeeze::oracle::{mc_intersection_area, mc_projection_area};
use symcap::squeeze::{intersection_area, nonsqueeze_verify, projection_area, shadow_report};
use symcap::symcore::{random_symplectic, SymplecticMatrix};

fn shear() -> SymplecticMatrix<f64> {
    SymplecticMatrix::lower_shear(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b
}

#[test]
fn shear_example_against_sampling() {
    let s = shear();
    for r in [1.0, 0.4] {
        let p = projection_area(&s, r, 0).unwrap();
        let i = intersection_area(&s, r, 0).unwrap();
        assert!(rel(p, SQRT_2 * PI * r * r) < 1e-12);
        assert!(rel(i, PI * r * r / SQRT_2) < 1e-12);
        assert!(rel(mc_projection_area(&s, &[0.0; 4], r, 0, 1_000_000, 1), p) < 0.01);
        assert!(rel(mc_intersection_area(&s, &[0.0; 4], r, 0, 1_000_000, 2), i) < 0.01);
    }
}

#[test]
fn random_maps_against_sampling() {
    for n in 2..=4 {
        for k in 0..3u64 {
            let s = random_symplectic::<f64>(n, 100 * n as u64 + k, 1.0).unwrap();
            for j in 0..n {
                let seed = 7 * k + j as u64;
                let p = mc_projection_area(&s, &vec![0.0; 2 * n], 1.0, j, 400_000, seed);
                let i = mc_intersection_area(&s, &vec![0.0; 2 * n], 1.0, j, 400_000, seed + 1);
                assert!(
                    rel(p, projection_area(&s, 1.0, j).unwrap()) < 0.01,
                    "n={n} k={k} j={j}"
                );
                assert!(
                    rel(i, intersection_area(&s, 1.0, j).unwrap()) < 0.01,
                    "n={n} k={k} j={j}"
                );
            }
        }
    }
}

#[test]
fn translations_do_not_change_estimates() {
    let s = random_symplectic::<f64>(2, 9, 1.0).unwrap();
    let shift = [3.0, -1.0, 0.5, 2.0];
    let exact = (
        projection_area(&s, 1.0, 1).unwrap(),
        intersection_area(&s, 1.0, 1).unwrap(),
    );
    assert!(rel(mc_projection_area(&s, &shift, 1.0, 1, 400_000, 5), exact.0) < 0.01);
    assert!(
        rel(
            mc_intersection_area(&s, &shift, 1.0, 1, 400_000, 6),
            exact.1
        ) < 0.01
    );
}

#[test]
fn planar_maps_preserve_area() {
    let r = nonsqueeze_verify::<f64>(1, 100, 3).unwrap();
    assert_eq!(r.violations, 0);
    assert!((r.min_ratio - 1.0).abs() <= 1e-9);
    assert!((r.max_intersection_ratio - 1.0).abs() <= 1e-9);
}

#[test]
fn seed_42_batch() {
    let r = nonsqueeze_verify::<f64>(3, 10_000, 42).unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.min_ratio >= 1.0 - 1e-9);
    assert!(r.intersection_strict_cases > 0);
    assert_eq!(r.worst_case_matrix.len(), 6);
}

#[test]
fn deterministic_batches() {
    let a = nonsqueeze_verify::<f64>(2, 500, 11).unwrap();
    let b = nonsqueeze_verify::<f64>(2, 500, 11).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shadow_inequalities(n in 1usize..6, seed in any::<u64>(), spread in 0.1f64..2.0) {
        let s = random_symplectic::<f64>(n, seed, spread).unwrap();
        for j in 0..n {
            let r = shadow_report(&s, 1.0, j).unwrap();
            prop_assert!(r.ratio_to_bound.0 >= 1.0 - 1e-9);
            prop_assert!(r.ratio_to_bound.1 <= 1.0 + 1e-9);
            prop_assert!(r.intersection_area > 0.0);
            prop_assert!(r.intersection_area <= r.projection_area * (1.0 + 1e-12));
        }
    }

    #[test]
    fn areas_scale_as_radius_squared(n in 1usize..5, seed in any::<u64>(), radius in 0.01f64..50.0) {
        let s = random_symplectic::<f64>(n, seed, 1.0).unwrap();
        for j in 0..n {
            let p1 = projection_area(&s, 1.0, j).unwrap();
            let i1 = intersection_area(&s, 1.0, j).unwrap();
            prop_assert!(rel(projection_area(&s, radius, j).unwrap(), p1 * radius * radius) <= 1e-12);
            prop_assert!(rel(intersection_area(&s, radius, j).unwrap(), i1 * radius * radius) <= 1e-12);
        }
    }
}
