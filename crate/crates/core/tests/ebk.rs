//! EBK levels, the capacity condition and the ground-energy bound, plus
//! 1D action quadrature against a polar-area reference.

use std::f64::consts::PI;

use proptest::prelude::*;
use symcap::ebk::{
    action_quadrature_1d, capacity_condition, energy_levels, ground_bound, projection_area_bound,
    quantized_actions, verify_energy_bound, ActionHamiltonian, ActionTable, FnHamiltonian,
    Oscillator, PowerLaw, QuadratureOptions,
};

/// Enclosed area of `{H ≤ E}` over 2π, from the radius of the level curve
/// along each ray (star-shaped about the origin) and the periodic trapezoid
/// rule on `½∮ r² dθ`.
fn polar_action(h: impl Fn(f64, f64) -> f64, energy: f64, nodes: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..nodes {
        let th = 2.0 * PI * k as f64 / nodes as f64;
        let (c, s) = (th.cos(), th.sin());
        let mut hi = 1.0;
        while h(hi * c, hi * s) < energy {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid * c, mid * s) < energy {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        sum += 0.5 * r * r;
    }
    sum / nodes as f64
}

#[test]
fn oscillator_levels_are_exact() {
    let omega = vec![1.0, 2.5, 0.7];
    let k = Oscillator {
        omega: omega.clone(),
    };
    for hbar in [1.0, 0.3] {
        let sp = energy_levels(&k, &[2, 2, 2], 4, hbar).unwrap();
        assert_eq!(sp.entries.len(), 125);
        for e in &sp.entries {
            let expected: f64 = e
                .quanta
                .iter()
                .zip(&omega)
                .map(|(n, w)| (*n as f64 + 0.5) * hbar * w)
                .sum();
            assert!((e.energy - expected).abs() <= 4.0 * f64::EPSILON * expected);
        }
        assert!(sp.entries.windows(2).all(|w| w[0].energy <= w[1].energy));
    }
}

#[test]
fn listed_actions() {
    let a = quantized_actions(&[2], 0, 1.0f64).unwrap();
    assert_eq!(a[0].actions, vec![0.5]);
    let a = quantized_actions(&[2, 2], 1, 1.0f64).unwrap();
    let hit = a.iter().find(|q| q.quanta == [1, 0]).unwrap();
    assert_eq!(hit.actions, vec![1.5, 0.5]);
    assert_eq!(
        quantized_actions(&[3], 0, 1.0f64).unwrap()[0].actions,
        vec![0.75]
    );
    assert!(quantized_actions(&[2, 0], 1, 1.0f64).is_err());
}

#[test]
fn square_law_levels() {
    let k = PowerLaw {
        dof: 1,
        exponent: 2.0,
    };
    let sp = energy_levels(&k, &[2], 6, 1.0).unwrap();
    for e in &sp.entries {
        let n = e.quanta[0] as f64;
        assert!((e.energy - (n + 0.5).powi(2)).abs() < 1e-12);
    }
    let report = verify_energy_bound(&k, &sp).unwrap();
    for (e, m) in sp.entries.iter().zip(&report.margins) {
        let n = e.quanta[0] as f64;
        assert!((m - ((n + 0.5).powi(2) - 0.25)).abs() < 1e-12);
    }
}

#[test]
fn ground_bounds() {
    let osc = Oscillator {
        omega: vec![1.0f64, 3.0],
    };
    assert!((ground_bound(&osc, 1.0).unwrap() - 2.0).abs() < 1e-15);
    let product = FnHamiltonian::new(2, true, |i: &[f64]| i[0] * i[1]);
    assert!((ground_bound(&product, 1.0).unwrap() - 0.25).abs() < 1e-15);
    let root = FnHamiltonian::new(1, true, |i: &[f64]| i[0].sqrt());
    assert!((ground_bound(&root, 2.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn decreasing_k_is_refused() {
    let k = FnHamiltonian::new(1, false, |i: &[f64]| -i[0]);
    let sp = energy_levels(&k, &[2], 3, 1.0).unwrap();
    assert!(verify_energy_bound(&k, &sp).is_err());
}

#[test]
fn capacity_and_area_examples() {
    let osc = Oscillator {
        omega: vec![1.0, 1.0],
    };
    let sp = energy_levels(&osc, &[2, 2], 3, 1.0).unwrap();
    let ground = sp.entries.iter().find(|e| e.quanta == [0, 0]).unwrap();
    let c = capacity_condition(ground, 1.0).unwrap();
    assert!((c.capacity - PI).abs() < 1e-12 && c.satisfied);
    let e30 = sp.entries.iter().find(|e| e.quanta == [3, 0]).unwrap();
    assert!((capacity_condition(e30, 1.0).unwrap().capacity - PI).abs() < 1e-12);
    let e20 = sp.entries.iter().find(|e| e.quanta == [2, 0]).unwrap();
    let areas = projection_area_bound(e20, 1.0).unwrap();
    assert!((areas[0].area - 5.0 * PI).abs() < 1e-12 && (areas[1].area - PI).abs() < 1e-12);
    assert!(areas.iter().all(|a| a.satisfied));

    let mut thin = ground.clone();
    thin.radii = vec![0.5, 1.0];
    let c = capacity_condition(&thin, 1.0).unwrap();
    assert!((c.capacity - PI / 4.0).abs() < 1e-12 && !c.satisfied);
    thin.radii = vec![0.9, 1.0];
    let areas = projection_area_bound(&thin, 1.0).unwrap();
    assert!(!areas[0].satisfied && areas[1].satisfied);
}

#[test]
fn table_levels_match_direct_interpolation() {
    // saturating 2(1 − e^{−0.3 I}), sampled coarsely
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|i| 2.0 * (1.0 - (-0.3 * i).exp()))
        .collect();
    let k = ActionTable::new(grid.clone(), values.clone()).unwrap();
    let sp = energy_levels(&k, &[2], 8, 1.0).unwrap();
    for e in &sp.entries {
        let i = e.actions[0];
        let seg = grid
            .iter()
            .rposition(|g| *g <= i)
            .unwrap()
            .min(grid.len() - 2);
        let t = (i - grid[seg]) / (grid[seg + 1] - grid[seg]);
        let direct = values[seg] * (1.0 - t) + values[seg + 1] * t;
        assert!((e.energy - direct).abs() < 1e-12);
    }
}

#[test]
fn harmonic_quadrature() {
    let opts = QuadratureOptions::default();
    for w in [0.5, 1.0, 3.0] {
        for e in [0.1, 1.0, 7.0] {
            let i = action_quadrature_1d(|x: f64, p: f64| 0.5 * (p * p + w * w * x * x), e, &opts)
                .unwrap();
            assert!((i - e / w).abs() <= 1e-8 * e / w, "w={w} e={e}");
        }
    }
    assert!(
        action_quadrature_1d(|x: f64, p: f64| 0.5 * (p * p + x * x) + 1.0, 0.5, &opts).is_err()
    );
}

#[test]
fn quartic_quadrature_against_polar_reference() {
    let opts = QuadratureOptions::default();
    for (lambda, e) in [(0.1, 1.0), (0.05, 3.0), (1.0, 0.4)] {
        let h = move |x: f64, p: f64| 0.5 * p * p + 0.5 * x * x + lambda * x.powi(4);
        let i = action_quadrature_1d(h, e, &opts).unwrap();
        let reference = polar_action(h, e, 4096);
        assert!(
            (i - reference).abs() <= 1e-8 * reference,
            "λ={lambda} E={e}: {i} vs {reference}"
        );
        assert!(i < e);
    }
    // first order in λ: ⟨x⁴⟩ over the unperturbed orbit is 3I²/2
    let lambda = 1e-4;
    let e = 1.0;
    let i = action_quadrature_1d(
        move |x: f64, p: f64| 0.5 * (p * p + x * x) + lambda * x.powi(4),
        e,
        &opts,
    )
    .unwrap();
    assert!((i - (e - 1.5 * lambda * e * e)).abs() < 10.0 * lambda * lambda);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn even_indices_meet_the_capacity_condition(
        m in prop::collection::vec(1i64..=4, 1..=3),
        hbar in 0.05f64..5.0,
    ) {
        let m: Vec<i64> = m.into_iter().map(|v| 2 * v).collect();
        let k = PowerLaw { dof: m.len(), exponent: 1.3 };
        let sp = energy_levels(&k, &m, 3, hbar).unwrap();
        for e in &sp.entries {
            prop_assert!(capacity_condition(e, hbar).unwrap().satisfied);
            prop_assert!(projection_area_bound(e, hbar).unwrap().iter().all(|a| a.satisfied));
        }
    }

    #[test]
    fn ground_entry_is_the_minimum(
        m in prop::collection::vec(1i64..=3, 1..=3),
        omega in prop::collection::vec(0.1f64..4.0, 3),
        hbar in 0.1f64..3.0,
    ) {
        let n = m.len();
        let m: Vec<i64> = m.into_iter().map(|v| 2 * v).collect();
        let k = Oscillator { omega: omega[..n].to_vec() };
        let sp = energy_levels(&k, &m, 3, hbar).unwrap();
        prop_assert!(sp.entries[0].quanta.iter().all(|q| *q == 0));
        let report = verify_energy_bound(&k, &sp).unwrap();
        prop_assert_eq!(report.violations, 0);
        let slack = 1e-12 * (1.0 + report.ground_bound.abs());
        let gap = sp.entries[0].energy - report.ground_bound;
        if m.iter().all(|v| *v == 2) {
            prop_assert!(gap.abs() <= slack);
        } else {
            prop_assert!(gap > slack);
        }
    }

    #[test]
    fn hbar_scales_linear_spectra(lambda in 0.1f64..10.0, w0 in 0.2f64..3.0, w1 in 0.2f64..3.0) {
        let k = Oscillator { omega: vec![w0, w1] };
        let base = energy_levels(&k, &[2, 4], 3, 1.0).unwrap();
        let scaled = energy_levels(&k, &[2, 4], 3, lambda).unwrap();
        for (a, b) in base.entries.iter().zip(&scaled.entries) {
            prop_assert_eq!(&a.quanta, &b.quanta);
            for (x, y) in a.actions.iter().zip(&b.actions) {
                prop_assert!((y - lambda * x).abs() <= 1e-12 * lambda * x);
            }
            prop_assert!((b.energy - lambda * a.energy).abs() <= 1e-12 * lambda * a.energy);
        }
        let g1 = ground_bound(&k, 1.0).unwrap();
        prop_assert!((ground_bound(&k, lambda).unwrap() - lambda * g1).abs() <= 1e-12 * lambda * g1);
        prop_assert!(k.is_monotone());
    }
}
