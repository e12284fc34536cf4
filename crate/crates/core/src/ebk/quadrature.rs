//! Action of a closed one-degree-of-freedom orbit, `I = (1/2π)·area`.
//!
//! The level set `H(x, p) = E` is assumed to be a graph `p₋(x) ≤ p ≤ p₊(x)`
//! over an interval whose ends are the zeros of `E − H(x, 0)` (so `H(x, ·)` is
//! minimal at `p = 0`, as for `p²/2m + V(x)`). Under `x = c − h·cos θ` the
//! square-root endpoint behavior becomes smooth and an adaptive
//! Gauss–Kronrod rule does the rest.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Relative tolerance of the area.
    pub rel_tol: f64,
    /// Half-width of the first search window around `center`.
    pub initial_window: f64,
    /// Windows beyond this half-width are treated as an unbounded orbit.
    pub max_window: f64,
    /// Point the turning-point search starts from.
    pub center: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            initial_window: 1.0,
            max_window: 1e8,
            center: 0.0,
        }
    }
}

const GRID: usize = 2048;
const BISECT_TOL: f64 = 1e-12;

// Kronrod 15 nodes (non-negative half), Kronrod weights, Gauss 7 weights.
#[allow(clippy::excessive_precision)]
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, a: T, b: T) -> Result<(T, T)> {
    let c = (a + b) * lit(0.5);
    let h = (b - a) * lit(0.5);
    let fc = f(c)?;
    let mut kronrod = fc * lit(WK[7]);
    let mut gauss = fc * lit(WG[3]);
    for i in 0..7 {
        let dx = h * lit(XK[i]);
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += s * lit(WK[i]);
        if i % 2 == 1 {
            gauss += s * lit(WG[i / 2]);
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

fn adaptive<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, a: T, b: T, rel_tol: T) -> Result<T> {
    let mut pieces = vec![(a, b, gk15(f, a, b)?)];
    for _ in 0..2000 {
        let total: T = pieces.iter().fold(T::zero(), |acc, p| acc + p.2 .0);
        let err: T = pieces.iter().fold(T::zero(), |acc, p| acc + p.2 .1);
        if err <= rel_tol * total.abs() {
            return Ok(total);
        }
        let worst = (0..pieces.len())
            .max_by(|&i, &j| {
                pieces[i]
                    .2
                     .1
                    .partial_cmp(&pieces[j].2 .1)
                    .expect("finite error")
            })
            .expect("non-empty");
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = (lo + hi) * lit(0.5);
        pieces.push((lo, mid, gk15(f, lo, mid)?));
        pieces.push((mid, hi, gk15(f, mid, hi)?));
    }
    Err(Error::Numerical(
        "action quadrature did not converge".into(),
    ))
}

fn bisect<T: Real, F: Fn(T) -> T>(g: F, mut inside: T, mut outside: T, tol: T) -> T {
    // g(inside) < 0 <= g(outside)
    for _ in 0..200 {
        if (outside - inside).abs() <= tol {
            break;
        }
        let mid = (inside + outside) * lit(0.5);
        if g(mid) < T::zero() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    (inside + outside) * lit(0.5)
}

/// Finds `x₋ < x₊` bounding the well that contains the lowest grid value of
/// `H(x, 0) − E`.
fn turning_points<T: Real, H: Fn(T, T) -> T>(
    h: &H,
    energy: T,
    opts: &QuadratureOptions,
) -> Result<(T, T)> {
    let g = |x: T| h(x, T::zero()) - energy;
    let center = lit::<T>(opts.center);
    let mut window = opts.initial_window;
    let mut below = false;
    while window <= opts.max_window {
        let step = lit::<T>(2.0 * window / GRID as f64);
        let xs: Vec<T> = (0..=GRID)
            .map(|k| center - lit::<T>(window) + step * lit(k as f64))
            .collect();
        let gs: Vec<T> = xs.iter().map(|x| g(*x)).collect();
        if gs.iter().any(|v| to_f64(*v).is_nan()) {
            return Err(Error::Evaluation {
                actions: vec![],
                message: "H is NaN on the search window".into(),
            });
        }
        let lowest = (0..=GRID)
            .min_by(|&i, &j| gs[i].partial_cmp(&gs[j]).expect("finite"))
            .expect("non-empty grid");
        if gs[lowest] < T::zero() {
            below = true;
            let right = (lowest..=GRID).find(|&k| gs[k] >= T::zero());
            let left = (0..=lowest).rev().find(|&k| gs[k] >= T::zero());
            if let (Some(r), Some(l)) = (right, left) {
                let tol = lit::<T>(BISECT_TOL);
                let xr = bisect(g, xs[r - 1], xs[r], tol);
                let xl = bisect(g, xs[l + 1], xs[l], tol);
                return Ok((xl, xr));
            }
        }
        window *= 2.0;
    }
    if below {
        Err(Error::NonCompactOrbit(format!(
            "level set H = {energy} is not bounded in x"
        )))
    } else {
        Err(Error::InvalidInput(format!(
            "energy {energy} is below the potential minimum; the level set is empty"
        )))
    }
}

/// Momentum on the level set at `x`, searched from `p = 0` in direction `sign`.
fn momentum<T: Real, H: Fn(T, T) -> T>(h: &H, energy: T, x: T, sign: T) -> Result<T> {
    let g = |p: T| h(x, sign * p) - energy;
    if g(T::zero()) >= T::zero() {
        return Ok(T::zero());
    }
    let mut hi = T::one();
    let mut n = 0;
    while g(hi) < T::zero() {
        hi *= lit(2.0);
        n += 1;
        if n > 200 || !hi.is_finite() {
            return Err(Error::NonCompactOrbit(format!(
                "level set is unbounded in p at x = {x}"
            )));
        }
    }
    let tol = hi * T::default_epsilon() * lit(4.0);
    Ok(bisect(g, T::zero(), hi, tol))
}

/// `(1/2π)·∮ p dx` on the closed curve `H(x, p) = energy`.
pub fn action_quadrature_1d<T: Real, H: Fn(T, T) -> T>(
    h: H,
    energy: T,
    opts: &QuadratureOptions,
) -> Result<T> {
    if !energy.is_finite() {
        return Err(Error::InvalidInput("energy must be finite".into()));
    }
    let (a, b) = turning_points(&h, energy, opts)?;
    let c = (a + b) * lit(0.5);
    let half = (b - a) * lit(0.5);
    let mut integrand = |theta: T| -> Result<T> {
        let x = c - half * theta.cos();
        let width = momentum(&h, energy, x, T::one())? + momentum(&h, energy, x, -T::one())?;
        Ok(width * half * theta.sin())
    };
    let tol = lit::<T>(opts.rel_tol).max(T::default_epsilon() * lit(64.0));
    let area = adaptive(&mut integrand, T::zero(), T::PI(), tol)?;
    Ok(area / T::two_pi())
}
