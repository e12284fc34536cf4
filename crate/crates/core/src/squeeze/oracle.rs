//! Monte-Carlo estimates of shadow areas, independent of the determinant
//! formulas: the projection from the convex hull of sampled support points,
//! the slice by hit-or-miss sampling of the plane.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{to_f64, Real};
use crate::symcore::SymplecticMatrix;

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Area of the convex hull of planar points (Andrew's monotone chain).
pub fn hull_area(points: &mut [(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * points.len().min(1 << 16));
    for &p in points.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in points.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    let mut twice = 0.0;
    for k in 0..hull.len() {
        let (a, b) = (hull[k], hull[(k + 1) % hull.len()]);
        twice += a.0 * b.1 - b.0 * a.1;
    }
    0.5 * twice.abs()
}

fn as_f64<T: Real>(s: &SymplecticMatrix<T>) -> DMatrix<f64> {
    s.as_matrix().map(to_f64)
}

/// Projection of `S(B(R)) + shift` on conjugate plane `plane`, estimated by
/// the hull of `samples` projected support points: for a uniformly random
/// in-plane direction `u`, the ball point maximizing `u·Az` is
/// `R·Aᵀu/|Aᵀu|`, where `A` holds rows `(j, n+j)` of `S`. Uniform sphere
/// samples would be too sparse near the rim once `n ≥ 3`.
pub fn mc_projection_area<T: Real>(
    s: &SymplecticMatrix<T>,
    shift: &[f64],
    radius: f64,
    plane: usize,
    samples: usize,
    seed: u64,
) -> f64 {
    let m = as_f64(s);
    let n = m.nrows() / 2;
    let (a0, a1) = (m.row(plane).transpose(), m.row(n + plane).transpose());
    let origin = (
        shift.get(plane).copied().unwrap_or(0.0),
        shift.get(n + plane).copied().unwrap_or(0.0),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let dir = &a0 * angle.cos() + &a1 * angle.sin();
        let z = dir.normalize() * radius;
        pts.push((origin.0 + a0.dot(&z), origin.1 + a1.dot(&z)));
    }
    hull_area(&mut pts)
}

/// Slice of `S(B(R)) + shift` by the conjugate plane through `shift`,
/// estimated by hit-or-miss; membership is `|S⁻¹(z − shift)| ≤ R` with a
/// general LU inverse, so the estimate does not depend on `shift`. A pilot pass over the bounding box of the projection
/// locates the slice, and the main pass samples a margin around it.
pub fn mc_intersection_area<T: Real>(
    s: &SymplecticMatrix<T>,
    shift: &[f64],
    radius: f64,
    plane: usize,
    samples: usize,
    seed: u64,
) -> f64 {
    let m = as_f64(s);
    let n = m.nrows() / 2;
    let inv = m
        .clone()
        .try_inverse()
        .expect("symplectic matrices are invertible");
    let r2 = radius * radius;
    // z − shift has only the two in-plane coordinates, so S⁻¹(z − shift)
    // is u·(column j) + v·(column n+j)
    let (a, b): (Vec<f64>, Vec<f64>) = (0..m.nrows())
        .map(|k| (inv[(k, plane)], inv[(k, n + plane)]))
        .unzip();
    let inside = |u: f64, v: f64| {
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x * u + y * v).powi(2))
            .sum::<f64>()
            <= r2
    };
    let _ = shift;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // extent of S(B(R)) along a coordinate axis is R·|row|
    let outer = (
        radius * m.row(plane).norm(),
        radius * m.row(n + plane).norm(),
    );
    let pilot = (samples / 10).max(10_000);
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..pilot {
        let u: f64 = rng.random_range(-outer.0..outer.0);
        let v: f64 = rng.random_range(-outer.1..outer.1);
        if inside(u, v) {
            lo = (lo.0.min(u), lo.1.min(v));
            hi = (hi.0.max(u), hi.1.max(v));
        }
    }
    let mut boxes = vec![outer];
    if lo.0.is_finite() {
        let grow = |l: f64, h: f64, cap: f64| (1.25 * l.abs().max(h.abs())).min(cap);
        boxes.insert(0, (grow(lo.0, hi.0, outer.0), grow(lo.1, hi.1, outer.1)));
    }
    let mut estimate = 0.0;
    for half in boxes {
        let mut hits = 0usize;
        let mut touched = false;
        for _ in 0..samples {
            let u: f64 = rng.random_range(-half.0..half.0);
            let v: f64 = rng.random_range(-half.1..half.1);
            if inside(u, v) {
                hits += 1;
                touched |= u.abs() > 0.98 * half.0 || v.abs() > 0.98 * half.1;
            }
        }
        estimate = 4.0 * half.0 * half.1 * hits as f64 / samples as f64;
        if !touched || half == outer {
            break;
        }
    }
    estimate
}
