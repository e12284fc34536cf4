//! Built-in acceptance suite, run by `symcap selftest`.
//!
//! Each check is deterministic given the config; the report serializes to
//! byte-identical JSON for identical configs.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::ebk::{
    action_quadrature_1d, audit_hamiltonian, capacity_condition, energy_levels, ground_bound,
    projection_area_bound, verify_energy_bound, ActionHamiltonian, Oscillator, PowerLaw,
    QuadratureOptions,
};
use crate::error::{Error, Result};
use crate::linalg::inf_norm;
use crate::maslov::{circle_loop, maslov_index, torus_cycle_loop, transport_loop};
use crate::regions::{capacity, inclusion_check, map_region, scale_region, PhaseRegion};
use crate::squeeze::oracle::{mc_intersection_area, mc_projection_area};
use crate::squeeze::{
    derive_seed, intersection_area, nonsqueeze_verify_with, projection_area, SqueezeOptions,
};
use crate::symcore::{random_symplectic, PhasePoint, QuadraticHamiltonian, SymplecticMatrix};
use crate::williamson::{normal_radii, symplectic_spectrum, williamson_decompose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelftestConfig {
    pub hbar: f64,
    /// Relative slack for the symplectic-invariance and non-squeezing checks.
    pub tol: f64,
    pub seed: u64,
    /// Monte-Carlo samples per shadow estimate.
    pub samples: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            tol: 1e-9,
            seed: 0,
            samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub config: SelftestConfig,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

type Check = fn(&SelftestConfig) -> Result<(bool, String)>;

const CHECKS: [(u32, &str, Check); 10] = [
    (1, "oscillator levels", oscillator_levels),
    (2, "ground ellipse", ground_ellipse),
    (3, "capacity normalization", capacity_normalization),
    (4, "capacity axioms", capacity_axioms),
    (5, "linear non-squeezing", linear_nonsqueezing),
    (6, "shadow oracle agreement", shadow_oracles),
    (7, "williamson", williamson),
    (8, "maslov", maslov),
    (9, "ebk capacity chain", ebk_chain),
    (10, "action quadrature", action_quadrature),
];

fn run_checks(config: &SelftestConfig) -> Vec<CriterionResult> {
    CHECKS
        .iter()
        .map(|(id, name, check)| {
            let (passed, detail) = match check(config) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CriterionResult {
                id: *id,
                name,
                passed,
                detail,
            }
        })
        .collect()
}

/// Runs every check; the last one repeats the others and compares the
/// serialized results byte for byte.
pub fn run(config: &SelftestConfig) -> Result<SelftestReport> {
    if !(config.hbar > 0.0 && config.hbar.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "hbar must be positive, got {}",
            config.hbar
        )));
    }
    if !(config.tol > 0.0 && config.tol.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tol must be positive, got {}",
            config.tol
        )));
    }
    if config.samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let mut criteria = run_checks(config);
    let first = serde_json::to_string(&criteria)?;
    let second = serde_json::to_string(&run_checks(config))?;
    let same = first == second;
    criteria.push(CriterionResult {
        id: 11,
        name: "determinism",
        passed: same,
        detail: format!(
            "repeated run {} ({} bytes)",
            if same { "identical" } else { "differs" },
            first.len()
        ),
    });
    let passed = criteria.iter().all(|c| c.passed);
    Ok(SelftestReport {
        config: *config,
        criteria,
        passed,
    })
}

fn rng(config: &SelftestConfig, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(config.seed, tag))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn oscillator_levels(c: &SelftestConfig) -> Result<(bool, String)> {
    let omegas = [1.0, 2.5, 0.7, 3.3];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=4 {
        let k = Oscillator {
            omega: omegas[..n].to_vec(),
        };
        let s = energy_levels(&k, &vec![2; n], 5, c.hbar)?;
        for e in &s.entries {
            let expect: f64 = e
                .quanta
                .iter()
                .zip(&omegas)
                .map(|(q, w)| (*q as f64 + 0.5) * c.hbar * w)
                .sum();
            worst = worst.max(rel(e.energy, expect));
            count += 1;
        }
        let ground: f64 = omegas[..n].iter().map(|w| 0.5 * c.hbar * w).sum();
        worst = worst
            .max(rel(s.entries[0].energy, ground))
            .max(rel(ground_bound(&k, c.hbar)?, ground));
    }
    Ok((
        worst <= 8.0 * f64::EPSILON,
        format!("{count} levels, max relative error {worst:e}"),
    ))
}

fn ground_ellipse(c: &SelftestConfig) -> Result<(bool, String)> {
    let h = QuadraticHamiltonian::oscillator(1.0, 1.0)?;
    let e0 = 0.5 * c.hbar;
    let r = normal_radii(h.hessian(), e0)?;
    let area = std::f64::consts::PI * r[0] * r[0];
    let half_h = std::f64::consts::PI * c.hbar;
    let cap = capacity(&PhaseRegion::ellipsoid(
        PhasePoint::origin(1),
        h.hessian().clone(),
        e0,
    )?)?
    .value;
    let action = action_quadrature_1d(
        |x: f64, p: f64| 0.5 * (x * x + p * p),
        e0,
        &QuadratureOptions::default(),
    )?;
    let quad_area = 2.0 * std::f64::consts::PI * action;
    let ok = (r[0] - c.hbar.sqrt()).abs() <= 1e-12
        && (area - half_h).abs() <= 1e-12
        && (cap - half_h).abs() <= 1e-12
        && rel(quad_area, half_h) <= 1e-8;
    Ok((
        ok,
        format!(
            "radius {:e}, area {area:e}, capacity {cap:e}, quadrature area {quad_area:e}",
            r[0]
        ),
    ))
}

fn capacity_normalization(c: &SelftestConfig) -> Result<(bool, String)> {
    use std::f64::consts::PI;
    let mut ok = true;
    for radius in [0.5, 1.0, std::f64::consts::SQRT_2, 3.0] {
        for n in 1..=3 {
            let ball = capacity(&PhaseRegion::centered_ball(n, radius)?)?;
            let cyl = capacity(&PhaseRegion::cylinder(
                n - 1,
                PhasePoint::origin(n),
                radius,
            )?)?;
            ok &= ball.exact
                && cyl.exact
                && ball.value == PI * radius * radius
                && cyl.value == ball.value;
        }
    }
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let t = capacity(&PhaseRegion::solid_torus(vec![c.hbar.sqrt(); n])?)?;
        ok &= t.exact;
        worst = worst.max(rel(t.value, PI * c.hbar));
    }
    ok &= worst <= 4.0 * f64::EPSILON;
    Ok((
        ok,
        format!("balls and cylinders exact; ground tori max relative error {worst:e}"),
    ))
}

fn random_spd(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    &b * b.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.2
}

fn pushforward(hessian: &DMatrix<f64>, s: &SymplecticMatrix<f64>) -> DMatrix<f64> {
    let inv = s.inverse();
    let m = inv.as_matrix();
    let out = m.transpose() * hessian * m;
    (&out + out.transpose()) * 0.5
}

fn capacity_axioms(c: &SelftestConfig) -> Result<(bool, String)> {
    let mut rng = rng(c, 4);
    let mut conformal_ok = true;
    let shapes: Vec<PhaseRegion<f64>> = vec![
        PhaseRegion::centered_ball(2, 1.3)?,
        PhaseRegion::cylinder(1, PhasePoint::origin(2), 0.8)?,
        PhaseRegion::solid_torus(vec![1.0, 0.6])?,
        PhaseRegion::ellipsoid(PhasePoint::origin(2), random_spd(&mut rng, 4), 1.7)?,
    ];
    for shape in &shapes {
        let base = capacity(shape)?.value;
        for lambda in [0.5, 2.0, 7.0] {
            let scaled = capacity(&scale_region(shape, lambda)?)?.value;
            conformal_ok &= rel(scaled, lambda * lambda * base) <= 4.0 * f64::EPSILON;
        }
    }

    let mut nested_ok = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=3);
        let m1 = random_spd(&mut rng, 2 * n);
        let m2 = random_spd(&mut rng, 2 * n);
        let l1: f64 = rng.random_range(0.5..2.0);
        // smallest level of ½z·M₂z containing E₁, then some room
        let w = crate::linalg::spectral_apply(&crate::linalg::validate_spd(&m1, 1e-12)?, |v| {
            1.0 / v.sqrt()
        });
        let lam = nalgebra::SymmetricEigen::new(&w * &m2 * &w)
            .eigenvalues
            .max();
        let l2 = l1 * lam * (1.0 + rng.random_range(1e-6..0.5));
        let e1 = PhaseRegion::ellipsoid(PhasePoint::origin(n), m1.clone(), l1)?;
        let e2 = PhaseRegion::ellipsoid(PhasePoint::origin(n), m2.clone(), l2)?;
        // boundary samples of E₁ stay inside E₂
        let mut sampled = true;
        for _ in 0..50 {
            let g = DVector::from_fn(2 * n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let z = &w * (g.normalize() * (2.0 * l1).sqrt());
            sampled &= 0.5 * z.dot(&(&m2 * &z)) <= l2 * (1.0 + 1e-12);
        }
        let contained = inclusion_check(&e1, &e2)?.contained;
        let (c1, c2) = (capacity(&e1)?.value, capacity(&e2)?.value);
        if sampled && contained && c1 <= c2 * (1.0 + 1e-12) {
            nested_ok += 1;
        }
    }

    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let s = random_symplectic::<f64>(2, derive_seed(c.seed, 4_000 + k), 1.0)?;
        let shift = PhasePoint::new((0..4).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        for shape in &shapes {
            let base = capacity(shape)?.value;
            let image = map_region(shape, &s, &shift)?;
            worst = worst.max(rel(capacity(&image)?.value, base));
            // explicit ellipsoid image, recomputed from its own Hessian
            let explicit = match shape {
                PhaseRegion::Ball { radius, .. } => {
                    Some((DMatrix::identity(4, 4) * (2.0 / (radius * radius)), 1.0))
                }
                PhaseRegion::Ellipsoid { hessian, level, .. } => Some((hessian.clone(), *level)),
                _ => None,
            };
            if let Some((m, level)) = explicit {
                let pushed = PhaseRegion::ellipsoid(shift.clone(), pushforward(&m, &s), level)?;
                worst = worst.max(rel(capacity(&pushed)?.value, base));
            }
        }
    }
    let ok = conformal_ok && nested_ok == 500 && worst <= c.tol;
    Ok((
        ok,
        format!("conformality {}, nested pairs {nested_ok}/500, invariance max relative error {worst:e}", if conformal_ok { "exact" } else { "off" }),
    ))
}

fn linear_nonsqueezing(c: &SelftestConfig) -> Result<(bool, String)> {
    let opts = SqueezeOptions {
        tol: c.tol,
        ..SqueezeOptions::default()
    };
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for n in [1, 2, 3, 5] {
        let r =
            nonsqueeze_verify_with::<f64>(n, 10_000, derive_seed(c.seed, 5_000 + n as u64), &opts)?;
        violations += r.violations;
        min_ratio = min_ratio.min(r.min_ratio);
    }
    Ok((
        violations == 0,
        format!("40000 trials, {violations} violations, min projection ratio {min_ratio:e}"),
    ))
}

fn shadow_oracles(c: &SelftestConfig) -> Result<(bool, String)> {
    use std::f64::consts::{PI, SQRT_2};
    let mut cases = vec![];
    let shear =
        SymplecticMatrix::lower_shear(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))?;
    let closed = (
        projection_area(&shear, 1.0, 0)?,
        intersection_area(&shear, 1.0, 0)?,
    );
    let shear_ok = rel(closed.0, SQRT_2 * PI) <= 1e-12 && rel(closed.1, PI / SQRT_2) <= 1e-12;
    cases.push(shear);
    for k in 0..20 {
        cases.push(random_symplectic::<f64>(
            2,
            derive_seed(c.seed, 6_000 + k),
            1.0,
        )?);
    }
    let gaps = (0..2 * cases.len())
        .into_par_iter()
        .map(|idx| {
            let (s, j) = (&cases[idx / 2], idx % 2);
            let seed = derive_seed(c.seed, 60_000 + idx as u64);
            let p = mc_projection_area(s, &[0.0; 4], 1.0, j, c.samples, seed);
            let i = mc_intersection_area(s, &[0.0; 4], 1.0, j, c.samples, seed ^ 1);
            Ok(rel(p, projection_area(s, 1.0, j)?).max(rel(i, intersection_area(s, 1.0, j)?)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = gaps.into_iter().fold(0.0, f64::max);
    Ok((
        shear_ok && worst <= 0.01,
        format!(
            "shear closed forms {}, 21 maps, max relative gap {worst:e}",
            if shear_ok { "match" } else { "off" }
        ),
    ))
}

fn williamson(c: &SelftestConfig) -> Result<(bool, String)> {
    let mut rng = rng(c, 7);
    let mut worst_residual: f64 = 0.0;
    let mut worst_invariance: f64 = 0.0;
    for k in 0..200u64 {
        let n = 1 + (k as usize % 10);
        let r = random_spd(&mut rng, 2 * n);
        let d = williamson_decompose(&r)?;
        worst_residual = worst_residual.max(d.residual / inf_norm(&r));
        let s = random_symplectic::<f64>(n, derive_seed(c.seed, 7_000 + k), 0.5)?;
        let moved = s.as_matrix().transpose() * &r * s.as_matrix();
        let moved = (&moved + moved.transpose()) * 0.5;
        let mu2 = symplectic_spectrum(&moved)?.mu;
        for (a, b) in d.spectrum.mu.iter().zip(&mu2) {
            worst_invariance = worst_invariance.max(rel(*b, *a));
        }
    }
    let mut worst_pair: f64 = 0.0;
    for (a, b) in [
        (4.0f64, 1.0f64),
        (0.3, 7.0),
        (2.0, 2.0),
        (1e-3, 50.0),
        (9.0, 0.25),
    ] {
        let mu =
            symplectic_spectrum(&DMatrix::from_diagonal(&DVector::from_vec(vec![a, b])))?.mu[0];
        worst_pair = worst_pair.max(rel(mu, (a * b).sqrt()));
    }
    let ok = worst_residual <= 1e-8 && worst_invariance <= 1e-8 && worst_pair <= 1e-10;
    Ok((ok, format!("residual/|R| {worst_residual:e}, congruence drift {worst_invariance:e}, diag(a,b) error {worst_pair:e}")))
}

fn maslov(c: &SelftestConfig) -> Result<(bool, String)> {
    let mut rng = rng(c, 8);
    let circle = maslov_index(&circle_loop::<f64>(64)?)?.index;
    let mut ok = circle == 2;
    let mut cycles = 0;
    for n in 1..=4 {
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
        for j in 0..n {
            let lp = torus_cycle_loop(&radii, j, 64)?;
            let m = maslov_index(&lp)?.index;
            let refined = maslov_index(&torus_cycle_loop(&radii, j, 128)?)?.index;
            let doubled = maslov_index(&lp.doubled()?)?.index;
            ok &= m == 2 && m % 2 == 0 && refined == m && doubled == m;
            cycles += 1;
        }
    }
    let mut transported = 0;
    for k in 0..50u64 {
        let n = 1 + (k as usize % 4);
        let s = random_symplectic::<f64>(n, derive_seed(c.seed, 8_000 + k), 1.0)?;
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
        let lp = torus_cycle_loop(&radii, k as usize % n, 64)?;
        if maslov_index(&transport_loop(&lp, &s)?)?.index == maslov_index(&lp)?.index {
            transported += 1;
        }
    }
    ok &= transported == 50;
    Ok((
        ok,
        format!("circle {circle}, {cycles} torus cycles, transport invariant {transported}/50"),
    ))
}

fn ebk_chain(c: &SelftestConfig) -> Result<(bool, String)> {
    let oscillator = Oscillator {
        omega: vec![1.0, 1.7, 0.4],
    };
    let power = PowerLaw {
        dof: 3,
        exponent: 1.5,
    };
    let cases: [(&dyn ActionHamiltonian<f64>, [i64; 3]); 2] =
        [(&oscillator, [2, 2, 2]), (&power, [4, 2, 6])];
    let mut entries = 0;
    let mut violations = 0;
    for (k, maslov) in cases {
        let audit = audit_hamiltonian(k, 1000, 10.0 * c.hbar, derive_seed(c.seed, 9))?;
        if audit.monotonicity_failures > 0 || !audit.gradient_ok {
            violations += 1;
        }
        let s = energy_levels(k, &maslov, 9, c.hbar)?;
        violations += verify_energy_bound(k, &s)?.violations;
        for e in &s.entries {
            entries += 1;
            if !capacity_condition(e, c.hbar)?.satisfied {
                violations += 1;
            }
            violations += projection_area_bound(e, c.hbar)?
                .iter()
                .filter(|a| !a.satisfied)
                .count();
        }
    }
    Ok((
        entries >= 1000 && violations == 0,
        format!("{entries} entries, {violations} violations"),
    ))
}

/// `(1/2π)·½∮ r(φ)² dφ` for a level set star-shaped about the origin, with
/// `r(φ)` found by bisection and the periodic trapezoid rule.
fn polar_reference_action(h: impl Fn(f64, f64) -> f64, energy: f64, nodes: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..nodes {
        let phi = std::f64::consts::TAU * k as f64 / nodes as f64;
        let (cx, sy) = (phi.cos(), phi.sin());
        let mut hi = 1.0;
        while h(hi * cx, hi * sy) < energy {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid * cx, mid * sy) < energy {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let r = 0.5 * (lo + hi);
        sum += r * r;
    }
    0.5 * sum * std::f64::consts::TAU / nodes as f64 / std::f64::consts::TAU
}

fn action_quadrature(c: &SelftestConfig) -> Result<(bool, String)> {
    let opts = QuadratureOptions::default();
    let mut worst_harmonic: f64 = 0.0;
    for omega in [0.5, 1.0, 3.0] {
        let e = 1.5 * c.hbar;
        let i = action_quadrature_1d(
            |x: f64, p: f64| 0.5 * (p * p + omega * omega * x * x),
            e,
            &opts,
        )?;
        worst_harmonic = worst_harmonic.max(rel(i, e / omega));
    }
    let quartic = |x: f64, p: f64| 0.5 * (p * p + x * x) + 0.1 * x.powi(4);
    let i = action_quadrature_1d(quartic, 1.0, &opts)?;
    let reference = polar_reference_action(quartic, 1.0, 4096);
    let gap = rel(i, reference);
    let ok = worst_harmonic <= 1e-8 && gap <= 1e-6 && i < 1.0;
    Ok((ok, format!("harmonic max relative error {worst_harmonic:e}, quartic I = {i:e} vs reference {reference:e}")))
}
