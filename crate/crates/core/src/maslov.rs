//! Lagrangian frames, the identification of Lagrangian planes with
//! symmetric unitary matrices `w = (X + iP)(X − iP)⁻¹`, and Maslov indices
//! of loops as winding numbers of `det w`.

use nalgebra::{Complex, DMatrix, SVD};

use crate::error::{Error, Result};
use crate::linalg::inf_norm;
use crate::scalar::{lit, to_f64, tol_floor, Real};
use crate::symcore::SymplecticMatrix;

/// Maximum number of bisection levels when a phase step is too large.
pub const MAX_REFINEMENT_DEPTH: usize = 20;

/// Closure tolerance on `sin` of the largest principal angle.
pub const CLOSURE_TOL: f64 = 1e-8;

/// An `n`-dimensional Lagrangian plane spanned by the columns of `[X; P]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame<T: Real> {
    x: DMatrix<T>,
    p: DMatrix<T>,
}

fn complexify<T: Real>(re: &DMatrix<T>, im: &DMatrix<T>, sign: T) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(re.nrows(), re.ncols(), |r, c| {
        Complex::new(re[(r, c)], sign * im[(r, c)])
    })
}

/// Unitary factor of the polar decomposition.
fn unitary_polar<T: Real>(z: DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let svd = SVD::new(z, true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => Ok(u * vt),
        _ => Err(Error::Numerical("polar decomposition failed".into())),
    }
}

impl<T: Real> LagrangianFrame<T> {
    /// Validates rank and isotropy (`XᵀP` symmetric).
    pub fn new(x: DMatrix<T>, p: DMatrix<T>) -> Result<Self> {
        let n = x.nrows();
        if n == 0 || !x.is_square() || p.shape() != x.shape() {
            return Err(Error::Dimension(format!(
                "X is {:?}, P is {:?}; both must be n×n",
                x.shape(),
                p.shape()
            )));
        }
        if x.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("frame has non-finite entries".into()));
        }
        let tol = tol_floor::<T>(1e-10);
        let mut stacked = DMatrix::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&x);
        stacked.view_mut((n, 0), (n, n)).copy_from(&p);
        let sv = stacked.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > tol * smax) {
            return Err(Error::NotLagrangian(format!(
                "rank deficient: singular values {:e}..{:e}",
                to_f64(smin),
                to_f64(smax)
            )));
        }
        let scale = inf_norm(&x) + inf_norm(&p);
        let iso = inf_norm(&(x.transpose() * &p - p.transpose() * &x));
        if iso > tol * scale * scale {
            return Err(Error::NotLagrangian(format!(
                "XᵀP − PᵀX has norm {:e}",
                to_f64(iso)
            )));
        }
        Ok(Self { x, p })
    }

    /// The horizontal plane `p = 0`.
    pub fn horizontal(n: usize) -> Self {
        Self {
            x: DMatrix::identity(n, n),
            p: DMatrix::zeros(n, n),
        }
    }

    /// The vertical plane `x = 0`.
    pub fn vertical(n: usize) -> Self {
        Self {
            x: DMatrix::zeros(n, n),
            p: DMatrix::identity(n, n),
        }
    }

    pub fn dof(&self) -> usize {
        self.x.nrows()
    }

    pub fn x(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn p(&self) -> &DMatrix<T> {
        &self.p
    }

    pub fn stacked(&self) -> DMatrix<T> {
        let n = self.dof();
        let mut m = DMatrix::zeros(2 * n, n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.x);
        m.view_mut((n, 0), (n, n)).copy_from(&self.p);
        m
    }

    /// Same plane, different basis: `[X; P]·G`.
    pub fn rebased(&self, g: &DMatrix<T>) -> Result<Self> {
        Self::new(&self.x * g, &self.p * g)
    }

    /// `X + iP` made unitary (orthonormal real frame of the same plane).
    fn unitary(&self) -> Result<DMatrix<Complex<T>>> {
        unitary_polar(complexify(&self.x, &self.p, T::one()))
    }

    fn from_unitary(u: &DMatrix<Complex<T>>) -> Result<Self> {
        Self::new(u.map(|c| c.re), u.map(|c| c.im))
    }

    /// `sin` of the largest principal angle between the two planes.
    pub fn plane_distance(&self, other: &Self) -> Result<T> {
        let a = self.unitary()?;
        let b = other.unitary()?;
        let (ra, rb) = (realify(&a), realify(&b));
        let resid = &rb - &ra * (ra.transpose() * &rb);
        Ok(resid.singular_values().max())
    }
}

fn realify<T: Real>(u: &DMatrix<Complex<T>>) -> DMatrix<T> {
    let n = u.nrows();
    DMatrix::from_fn(2 * n, u.ncols(), |r, c| {
        if r < n {
            u[(r, c)].re
        } else {
            u[(r - n, c)].im
        }
    })
}

/// `w = (X + iP)(X − iP)⁻¹`, symmetric and unitary; depends only on the
/// plane.
pub fn souriau_map<T: Real>(frame: &LagrangianFrame<T>) -> Result<DMatrix<Complex<T>>> {
    let plus = complexify(frame.x(), frame.p(), T::one());
    let minus = complexify(frame.x(), frame.p(), -T::one());
    let inv = minus
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NotLagrangian("X − iP is singular".into()))?;
    Ok(plus * inv)
}

fn souriau_det<T: Real>(frame: &LagrangianFrame<T>) -> Result<Complex<T>> {
    Ok(souriau_map(frame)?.determinant())
}

/// A closed path of Lagrangian planes sampled at increasing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianLoop<T: Real> {
    frames: Vec<LagrangianFrame<T>>,
    params: Vec<T>,
    closed: bool,
}

impl<T: Real> LagrangianLoop<T> {
    /// Builds a loop; `closed` records whether the end plane matches the
    /// start plane within [`CLOSURE_TOL`].
    pub fn new(frames: Vec<LagrangianFrame<T>>, params: Vec<T>) -> Result<Self> {
        if frames.len() < 2 || frames.len() != params.len() {
            return Err(Error::InvalidInput(format!(
                "need >= 2 frames with one parameter each (got {} frames, {} params)",
                frames.len(),
                params.len()
            )));
        }
        let n = frames[0].dof();
        if frames.iter().any(|f| f.dof() != n) {
            return Err(Error::Dimension("frames have differing dimensions".into()));
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "parameters must be strictly increasing".into(),
            ));
        }
        let distance = frames[0].plane_distance(frames.last().expect("len >= 2"))?;
        let closed = distance <= tol_floor(CLOSURE_TOL);
        Ok(Self {
            frames,
            params,
            closed,
        })
    }

    pub fn frames(&self) -> &[LagrangianFrame<T>] {
        &self.frames
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dof(&self) -> usize {
        self.frames[0].dof()
    }

    /// Sin of the largest principal angle between the end planes.
    pub fn closure_distance(&self) -> Result<T> {
        self.frames[0].plane_distance(self.frames.last().expect("len >= 2"))
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let (t0, t1) = (self.params[0], *self.params.last().expect("len >= 2"));
        Self {
            frames: self.frames.iter().rev().cloned().collect(),
            params: self.params.iter().rev().map(|t| t0 + t1 - *t).collect(),
            closed: self.closed,
        }
    }

    /// The loop traversed `k ≥ 1` times.
    pub fn repeated(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("repeat count must be >= 1".into()));
        }
        let period = *self.params.last().expect("len >= 2") - self.params[0];
        let mut frames = self.frames.clone();
        let mut params = self.params.clone();
        for rep in 1..k {
            let shift = period * lit::<T>(rep as f64);
            frames.extend(self.frames.iter().skip(1).cloned());
            params.extend(self.params.iter().skip(1).map(|t| *t + shift));
        }
        Ok(Self {
            frames,
            params,
            closed: self.closed,
        })
    }

    /// Loop with every interval split into two by frame interpolation.
    pub fn doubled(&self) -> Result<Self> {
        let mut frames = Vec::with_capacity(2 * self.frames.len());
        let mut params = Vec::with_capacity(2 * self.frames.len());
        let half = lit::<T>(0.5);
        for k in 0..self.frames.len() - 1 {
            frames.push(self.frames[k].clone());
            params.push(self.params[k]);
            frames.push(interpolate(&self.frames[k], &self.frames[k + 1])?);
            params.push((self.params[k] + self.params[k + 1]) * half);
        }
        frames.push(self.frames.last().expect("len >= 2").clone());
        params.push(*self.params.last().expect("len >= 2"));
        Ok(Self {
            frames,
            params,
            closed: self.closed,
        })
    }
}

/// Plane halfway between two planes: orthonormalize both frames, align the
/// second to the first by an orthogonal Procrustes rotation, average, and
/// project back onto U(n) (every unitary `X + iP` is a Lagrangian frame).
pub fn interpolate<T: Real>(
    a: &LagrangianFrame<T>,
    b: &LagrangianFrame<T>,
) -> Result<LagrangianFrame<T>> {
    let ua = a.unitary()?;
    let ub = b.unitary()?;
    let cross = realify(&ub).transpose() * realify(&ua);
    let svd = SVD::new(cross, true, true);
    let align = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => u * vt,
        _ => return Err(Error::Numerical("Procrustes alignment failed".into())),
    };
    let align_c = align.map(|v| Complex::new(v, T::zero()));
    let mid = (ua + ub * align_c) * Complex::new(lit::<T>(0.5), T::zero());
    LagrangianFrame::from_unitary(&unitary_polar(mid)?)
}

/// Maslov index of a loop with its raw winding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaslovResult<T: Real> {
    pub index: i64,
    pub raw_winding: T,
    /// Deepest bisection level used.
    pub refinement_depth: usize,
}

fn phase_step<T: Real>(
    a: &LagrangianFrame<T>,
    b: &LagrangianFrame<T>,
    da: Complex<T>,
    db: Complex<T>,
    depth: usize,
    deepest: &mut usize,
) -> Result<T> {
    let q = db / da;
    let step = q.im.atan2(q.re);
    let limit = T::FRAC_PI_2();
    if step.abs() < limit {
        return Ok(step);
    }
    if depth >= MAX_REFINEMENT_DEPTH {
        return Err(Error::SamplingTooCoarse {
            step: to_f64(step),
            depth,
        });
    }
    let mid = interpolate(a, b)?;
    let dm = souriau_det(&mid)?;
    *deepest = (*deepest).max(depth + 1);
    Ok(phase_step(a, &mid, da, dm, depth + 1, deepest)?
        + phase_step(&mid, b, dm, db, depth + 1, deepest)?)
}

/// Winding number of `det w(t)` around the loop. Steps whose principal phase
/// increment reaches `π/2` are bisected (up to [`MAX_REFINEMENT_DEPTH`]).
pub fn maslov_index<T: Real>(lp: &LagrangianLoop<T>) -> Result<MaslovResult<T>> {
    if !lp.is_closed() {
        return Err(Error::NotClosed {
            distance: to_f64(lp.closure_distance()?),
        });
    }
    let dets = lp
        .frames()
        .iter()
        .map(souriau_det)
        .collect::<Result<Vec<_>>>()?;
    let mut total = T::zero();
    let mut deepest = 0;
    for k in 0..dets.len() - 1 {
        total += phase_step(
            &lp.frames[k],
            &lp.frames[k + 1],
            dets[k],
            dets[k + 1],
            0,
            &mut deepest,
        )?;
    }
    let raw = total / T::two_pi();
    let index = raw.round();
    if (raw - index).abs() >= lit(0.1) {
        return Err(Error::NonIntegerWinding { raw: to_f64(raw) });
    }
    Ok(MaslovResult {
        index: to_f64(index) as i64,
        raw_winding: raw,
        refinement_depth: deepest,
    })
}

/// Tangent planes of the torus `T^n(R₁..Rₙ)` along its `j`-th basic cycle:
/// circle `j` runs through `t ∈ [0, 2π]`, the others sit at angle 0.
pub fn torus_cycle_loop<T: Real>(
    radii: &[T],
    j: usize,
    samples: usize,
) -> Result<LagrangianLoop<T>> {
    let n = radii.len();
    if j >= n {
        return Err(Error::Dimension(format!(
            "cycle {j} out of range for n={n}"
        )));
    }
    if samples < 16 {
        return Err(Error::InvalidInput(format!(
            "need >= 16 samples, got {samples}"
        )));
    }
    if radii.iter().any(|r| !(*r > T::zero())) {
        return Err(Error::InvalidInput("torus radii must be positive".into()));
    }
    let mut frames = Vec::with_capacity(samples + 1);
    let mut params = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let t = T::two_pi() * lit::<T>(k as f64) / lit::<T>(samples as f64);
        let mut x = DMatrix::zeros(n, n);
        let mut p = DMatrix::zeros(n, n);
        for (i, r) in radii.iter().enumerate() {
            let angle = if i == j { t } else { T::zero() };
            let (s, c) = angle.sin_cos();
            x[(i, i)] = -*r * s;
            p[(i, i)] = *r * c;
        }
        frames.push(LagrangianFrame::new(x, p)?);
        params.push(t);
    }
    LagrangianLoop::new(frames, params)
}

/// Tangent planes of the unit circle in the plane.
pub fn circle_loop<T: Real>(samples: usize) -> Result<LagrangianLoop<T>> {
    torus_cycle_loop(&[T::one()], 0, samples)
}

fn transported<T: Real>(
    s: &SymplecticMatrix<T>,
    f: &LagrangianFrame<T>,
) -> Result<LagrangianFrame<T>> {
    let n = f.dof();
    let img = s.as_matrix() * f.stacked();
    LagrangianFrame::new(img.rows(0, n).into_owned(), img.rows(n, n).into_owned())
}

/// Image of a loop under a linear symplectic map.
///
/// `S` can compress a large turn of the plane into a short stretch of the
/// loop, which a plain frame-wise image would alias. Since principal angles
/// grow by at most `κ(S) = ‖S‖₂²` under `S`, source intervals are bisected
/// until their largest principal angle is below `π/(4nκ)`; the image then
/// turns `det w` by less than `π/2` per step.
pub fn transport_loop<T: Real>(
    lp: &LagrangianLoop<T>,
    s: &SymplecticMatrix<T>,
) -> Result<LagrangianLoop<T>> {
    let n = lp.dof();
    if s.dof() != n {
        return Err(Error::Dimension(format!("loop n={n}, map n={}", s.dof())));
    }
    if s.is_identity() {
        return Ok(lp.clone());
    }
    let sigma = s.as_matrix().singular_values().max();
    let kappa = sigma * sigma;
    let bound = (T::PI() / (lit::<T>(4.0 * n as f64) * kappa)).sin();
    let mut frames = Vec::with_capacity(lp.frames.len());
    let mut params = Vec::with_capacity(lp.frames.len());
    for k in 0..lp.frames.len() - 1 {
        subdivide(
            &lp.frames[k],
            &lp.frames[k + 1],
            lp.params[k],
            lp.params[k + 1],
            bound,
            0,
            &mut frames,
            &mut params,
        )?;
    }
    frames.push(lp.frames.last().expect("len >= 2").clone());
    params.push(*lp.params.last().expect("len >= 2"));
    let frames = frames
        .iter()
        .map(|f| transported(s, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(LagrangianLoop {
        frames,
        params,
        closed: lp.closed,
    })
}

/// Pushes `a` and the interior points of `[a, b]` needed to meet `bound`.
#[allow(clippy::too_many_arguments)]
fn subdivide<T: Real>(
    a: &LagrangianFrame<T>,
    b: &LagrangianFrame<T>,
    ta: T,
    tb: T,
    bound: T,
    depth: usize,
    frames: &mut Vec<LagrangianFrame<T>>,
    params: &mut Vec<T>,
) -> Result<()> {
    if a.plane_distance(b)? <= bound {
        frames.push(a.clone());
        params.push(ta);
        return Ok(());
    }
    if depth >= MAX_REFINEMENT_DEPTH {
        return Err(Error::SamplingTooCoarse {
            step: to_f64(a.plane_distance(b)?),
            depth,
        });
    }
    let mid = interpolate(a, b)?;
    let tm = (ta + tb) * lit(0.5);
    subdivide(a, &mid, ta, tm, bound, depth + 1, frames, params)?;
    subdivide(&mid, b, tm, tb, bound, depth + 1, frames, params)
}
