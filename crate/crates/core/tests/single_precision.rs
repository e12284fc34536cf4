//! The same pipeline at `f32`, with tolerances scaled to single precision.

use symcap::ebk::{energy_levels, Oscillator};
use symcap::maslov::{circle_loop, maslov_index, transport_loop};
use symcap::regions::{capacity, PhaseRegion};
use symcap::squeeze::{intersection_area, projection_area};
use symcap::symcore::random_symplectic;
use symcap::williamson::symplectic_spectrum;

#[test]
fn f32_pipeline() {
    let r = nalgebra::DMatrix::<f32>::from_diagonal(&nalgebra::DVector::from_vec(vec![
        4.0, 1.0, 1.0, 4.0,
    ]));
    let mu = symplectic_spectrum(&r).unwrap().mu;
    assert!(mu.iter().all(|m| (m - 2.0).abs() < 1e-5));

    let c = capacity(&PhaseRegion::<f32>::centered_ball(3, 2.0).unwrap()).unwrap();
    assert!((c.value - 4.0 * std::f32::consts::PI).abs() < 1e-5);

    let pi = std::f32::consts::PI;
    for seed in 0..20 {
        let s = random_symplectic::<f32>(3, seed, 0.5).unwrap();
        for j in 0..3 {
            assert!(projection_area(&s, 1.0, j).unwrap() >= pi * (1.0 - 1e-4));
            assert!(intersection_area(&s, 1.0, j).unwrap() <= pi * (1.0 + 1e-4));
        }
    }

    let lp = transport_loop(
        &circle_loop::<f32>(32).unwrap(),
        &random_symplectic(1, 3, 0.5).unwrap(),
    )
    .unwrap();
    assert_eq!(maslov_index(&lp).unwrap().index, 2);

    let sp = energy_levels(
        &Oscillator {
            omega: vec![1.0f32, 2.0],
        },
        &[2, 2],
        1,
        1.0,
    )
    .unwrap();
    let e: Vec<f32> = sp.entries.iter().map(|e| e.energy).collect();
    assert_eq!(e, vec![1.5, 2.5, 3.5, 4.5]);
}
