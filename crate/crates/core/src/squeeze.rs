//! Shadow areas of linear symplectic images of balls on conjugate planes,
//! and batch verification of linear non-squeezing.
//!
//! `S(B(R)) = {z : zᵀ(SSᵀ)⁻¹z ≤ R²}`. Its orthogonal projection on the
//! plane `(x_j, p_j)` is the ellipse with Gram block `P·SSᵀ·Pᵀ`, and its
//! slice by that plane has quadratic form `P·(SSᵀ)⁻¹·Pᵀ`; hence
//!
//! * projection area `= πR²·√det(P SSᵀ Pᵀ) ≥ πR²`,
//! * intersection area `= πR² / √det(P (SSᵀ)⁻¹ Pᵀ) ≤ πR²`.
//!
//! The intersection equals `πR²` only in special cases (for instance when
//! the preimage of the plane is `J`-invariant); a shear already gives
//! `πR²/√2`. Reports count those strict cases instead of assuming equality.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gram_root_det2, plane_rows};
use crate::scalar::{lit, to_f64, tol_floor, Real};
use crate::symcore::{random_symplectic, SymplecticMatrix};

pub mod oracle;

fn check_args<T: Real>(s: &SymplecticMatrix<T>, radius: T, plane: usize) -> Result<()> {
    if plane >= s.dof() {
        return Err(Error::Dimension(format!(
            "plane {plane} out of range for n={}",
            s.dof()
        )));
    }
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok(())
}

fn ball_area<T: Real>(radius: T) -> T {
    T::PI() * radius * radius
}

/// Area of the orthogonal projection of `S(B(R))` on conjugate plane `plane`.
pub fn projection_area<T: Real>(s: &SymplecticMatrix<T>, radius: T, plane: usize) -> Result<T> {
    check_args(s, radius, plane)?;
    // det(P SSᵀ Pᵀ) is the Gram determinant of rows (j, n+j)
    let rows = plane_rows(s.as_matrix(), plane).transpose();
    Ok(ball_area(radius) * gram_root_det2(rows))
}

/// Area of `S(B(R)) ∩ {conjugate plane}`.
pub fn intersection_area<T: Real>(s: &SymplecticMatrix<T>, radius: T, plane: usize) -> Result<T> {
    check_args(s, radius, plane)?;
    // (SSᵀ)⁻¹ = S⁻ᵀS⁻¹ with the exact symplectic inverse
    let inv = s.inverse();
    let m = inv.as_matrix();
    let n = s.dof();
    let cols = DMatrix::from_fn(m.nrows(), 2, |r, c| {
        m[(r, if c == 0 { plane } else { n + plane })]
    });
    let root = gram_root_det2(cols);
    if !(root > T::zero()) {
        return Err(Error::Numerical(format!(
            "slice form has determinant {:e}",
            to_f64(root * root)
        )));
    }
    Ok(ball_area(radius) / root)
}

/// Both shadow areas on one plane, and their ratios to `πR²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowReport {
    /// 0-based conjugate-pair index.
    pub plane: usize,
    pub projection_area: f64,
    pub intersection_area: f64,
    /// `(projection, intersection) / πR²`.
    pub ratio_to_bound: (f64, f64),
}

/// Shadow areas of `S(B(R))`. A translation `S(B(R)) + c` has the same
/// report when the slicing plane passes through `c`.
pub fn shadow_report<T: Real>(
    s: &SymplecticMatrix<T>,
    radius: T,
    plane: usize,
) -> Result<ShadowReport> {
    let proj = projection_area(s, radius, plane)?;
    let inter = intersection_area(s, radius, plane)?;
    let bound = ball_area(radius);
    Ok(ShadowReport {
        plane,
        projection_area: to_f64(proj),
        intersection_area: to_f64(inter),
        ratio_to_bound: (to_f64(proj / bound), to_f64(inter / bound)),
    })
}

/// Parameters of a batch non-squeezing run.
#[derive(Debug, Clone, Copy)]
pub struct SqueezeOptions {
    pub radius: f64,
    /// Passed to [`random_symplectic`].
    pub spread: f64,
    /// Relative slack on the `≥ πR²` and `≤ πR²` assertions.
    pub tol: f64,
}

impl Default for SqueezeOptions {
    fn default() -> Self {
        Self {
            radius: 1.0,
            spread: 1.0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub plane: usize,
    pub projection_ratio: f64,
    pub intersection_ratio: f64,
}

/// Outcome of [`nonsqueeze_verify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonsqueezeReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub radius: f64,
    /// Count of (trial, plane) pairs breaking any asserted inequality.
    pub violations: usize,
    /// Smallest projection area over `πR²`.
    pub min_ratio: f64,
    pub min_intersection_ratio: f64,
    pub max_intersection_ratio: f64,
    /// Planes whose slice area equals `πR²` within tolerance.
    pub intersection_equality_cases: usize,
    /// Planes whose slice area is strictly below `πR²`: the equality
    /// suggested by the area-preservation argument does not hold there.
    pub intersection_strict_cases: usize,
    pub worst_trial: usize,
    pub worst_case_matrix: Vec<Vec<f64>>,
    pub failures: Vec<TrialFailure>,
}

/// Mixes a batch seed with a trial index (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs [`nonsqueeze_verify_with`] with default options.
pub fn nonsqueeze_verify<T: Real>(n: usize, trials: usize, seed: u64) -> Result<NonsqueezeReport> {
    nonsqueeze_verify_with::<T>(n, trials, seed, &SqueezeOptions::default())
}

/// Draws `trials` random symplectic matrices and checks, on every conjugate
/// plane, `projection ≥ πR²(1−tol)`, `intersection ≤ πR²(1+tol)` and
/// `intersection ≤ projection`. Trials run in parallel with per-trial
/// derived seeds and are merged in trial order.
pub fn nonsqueeze_verify_with<T: Real>(
    n: usize,
    trials: usize,
    seed: u64,
    opts: &SqueezeOptions,
) -> Result<NonsqueezeReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let radius = lit::<T>(opts.radius);
    let results: Vec<Result<(SymplecticMatrix<T>, Vec<ShadowReport>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = random_symplectic::<T>(n, derive_seed(seed, trial as u64), opts.spread)?;
            let reports = (0..n)
                .map(|j| shadow_report(&s, radius, j))
                .collect::<Result<Vec<_>>>()?;
            Ok((s, reports))
        })
        .collect();

    let tol = to_f64(tol_floor::<T>(opts.tol));
    let mut report = NonsqueezeReport {
        n,
        trials,
        seed,
        radius: opts.radius,
        violations: 0,
        min_ratio: f64::INFINITY,
        min_intersection_ratio: f64::INFINITY,
        max_intersection_ratio: 0.0,
        intersection_equality_cases: 0,
        intersection_strict_cases: 0,
        worst_trial: 0,
        worst_case_matrix: Vec::new(),
        failures: Vec::new(),
    };
    let mut worst: Option<DMatrix<f64>> = None;
    for (trial, res) in results.into_iter().enumerate() {
        let (s, reports) = res?;
        for r in reports {
            let (proj, inter) = r.ratio_to_bound;
            let bad = proj < 1.0 - tol || inter > 1.0 + tol || inter > proj * (1.0 + tol);
            if bad {
                report.violations += 1;
                report.failures.push(TrialFailure {
                    trial,
                    plane: r.plane,
                    projection_ratio: proj,
                    intersection_ratio: inter,
                });
            }
            if inter >= 1.0 - tol {
                report.intersection_equality_cases += 1;
            } else {
                report.intersection_strict_cases += 1;
            }
            report.min_intersection_ratio = report.min_intersection_ratio.min(inter);
            report.max_intersection_ratio = report.max_intersection_ratio.max(inter);
            if proj < report.min_ratio {
                report.min_ratio = proj;
                report.worst_trial = trial;
                worst = Some(s.as_matrix().map(to_f64));
            }
        }
    }
    if let Some(w) = worst {
        report.worst_case_matrix = w
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn shear() -> SymplecticMatrix<f64> {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        SymplecticMatrix::lower_shear(&c).unwrap()
    }

    #[test]
    fn identity_shadows_are_the_disk() {
        let id = SymplecticMatrix::<f64>::identity(3);
        for j in 0..3 {
            assert_relative_eq!(
                projection_area(&id, 2.0, j).unwrap(),
                4.0 * PI,
                epsilon = 1e-14
            );
            assert_relative_eq!(
                intersection_area(&id, 2.0, j).unwrap(),
                4.0 * PI,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn planar_maps_preserve_area() {
        for seed in 0..20 {
            let s = random_symplectic::<f64>(1, seed, 1.5).unwrap();
            assert_relative_eq!(
                projection_area(&s, 1.0, 0).unwrap(),
                PI,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                intersection_area(&s, 1.0, 0).unwrap(),
                PI,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn shear_closed_forms() {
        let s = shear();
        assert_relative_eq!(
            projection_area(&s, 1.0, 0).unwrap(),
            2f64.sqrt() * PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            intersection_area(&s, 1.0, 0).unwrap(),
            PI / 2f64.sqrt(),
            max_relative = 1e-14
        );
        let r = shadow_report(&s, 1.0, 1).unwrap();
        assert_relative_eq!(r.ratio_to_bound.0, 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn plane_out_of_range() {
        let id = SymplecticMatrix::<f64>::identity(2);
        assert!(matches!(
            projection_area(&id, 1.0, 2),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            intersection_area(&id, 1.0, 5),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn areas_scale_quadratically() {
        let s = random_symplectic::<f64>(2, 77, 1.0).unwrap();
        let a1 = projection_area(&s, 1.0, 1).unwrap();
        let a3 = projection_area(&s, 3.0, 1).unwrap();
        assert_relative_eq!(a3, 9.0 * a1, max_relative = 1e-14);
        let i1 = intersection_area(&s, 1.0, 0).unwrap();
        let i3 = intersection_area(&s, 3.0, 0).unwrap();
        assert_relative_eq!(i3, 9.0 * i1, max_relative = 1e-14);
    }

    #[test]
    fn batch_planar_ratios_are_one() {
        let r = nonsqueeze_verify::<f64>(1, 100, 3).unwrap();
        assert_eq!(r.violations, 0);
        assert!((r.min_ratio - 1.0).abs() <= 1e-9);
        assert!((r.max_intersection_ratio - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn batch_is_deterministic() {
        let a = nonsqueeze_verify::<f64>(3, 50, 42).unwrap();
        let b = nonsqueeze_verify::<f64>(3, 50, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        assert!(a.min_ratio >= 1.0 - 1e-9);
        assert!(a.intersection_strict_cases > 0);
        assert_eq!(a.worst_case_matrix.len(), 6);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
