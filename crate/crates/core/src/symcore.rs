//! Phase-space conventions, symplectic matrices and exact flows of quadratic
//! Hamiltonians.
//!
//! Coordinates are ordered `(x₁..xₙ, p₁..pₙ)`; conjugate pair `j` (0-based)
//! occupies indices `(j, n+j)` and `J = [[0, I], [-I, 0]]`.

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{expm, inf_norm, standard_j, validate_spd};
use crate::scalar::{lit, to_f64, tol_floor, Real};

/// Default relative tolerance for symplectic validation.
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-9;

/// A point `z = (x, p)` of phase space ℝ²ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T: Real> {
    coords: DVector<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(coords))
    }

    pub fn from_vector(coords: DVector<T>) -> Result<Self> {
        if coords.len() < 2 || !coords.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "phase point needs an even length >= 2, got {}",
                coords.len()
            )));
        }
        Ok(Self { coords })
    }

    /// Builds `z` from separate position and momentum vectors.
    pub fn from_xp(x: &[T], p: &[T]) -> Result<Self> {
        if x.len() != p.len() {
            return Err(Error::Dimension(format!(
                "x has {} entries, p has {}",
                x.len(),
                p.len()
            )));
        }
        Self::new(x.iter().chain(p.iter()).copied().collect())
    }

    pub fn origin(n: usize) -> Self {
        Self {
            coords: DVector::zeros(2 * n.max(1)),
        }
    }

    /// Degrees of freedom `n`.
    pub fn dof(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn x(&self, j: usize) -> T {
        self.coords[j]
    }

    pub fn p(&self, j: usize) -> T {
        self.coords[self.dof() + j]
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.coords
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|v| *v == T::zero())
    }

    pub fn scaled(&self, lambda: T) -> Self {
        Self {
            coords: &self.coords * lambda,
        }
    }

    /// `σ(self, other) = p·x' − p'·x`.
    pub fn sigma(&self, other: &Self) -> T {
        crate::linalg::sigma(&self.coords, &other.coords)
    }
}

/// Outcome of [`is_symplectic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticCheck<T: Real> {
    pub symplectic: bool,
    /// `‖MᵀJM − J‖∞`.
    pub residual: T,
    /// `tol·‖M‖∞²`, the bound the residual was compared against.
    pub threshold: T,
}

/// Tests `MᵀJM = J` in the relative sense `‖MᵀJM − J‖∞ ≤ tol·‖M‖∞²`.
pub fn is_symplectic<T: Real>(m: &DMatrix<T>, tol: T) -> Result<SymplecticCheck<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "order {} is not even and positive",
            m.nrows()
        )));
    }
    let j = standard_j::<T>(m.nrows() / 2);
    let residual = if m.iter().all(|v| v.is_finite()) {
        inf_norm(&(m.transpose() * &j * m - &j))
    } else {
        T::max_value().unwrap()
    };
    let norm = inf_norm(m);
    let threshold = tol * norm * norm;
    Ok(SymplecticCheck {
        symplectic: residual <= threshold,
        residual,
        threshold,
    })
}

/// A `2n×2n` real matrix certified to satisfy `SᵀJS = J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix<T: Real> {
    entries: DMatrix<T>,
    n: usize,
}

impl<T: Real> SymplecticMatrix<T> {
    /// Validates at the default tolerance.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, tol_floor(DEFAULT_SYMPLECTIC_TOL))
    }

    /// Validates `SᵀJS = J` and `det S = 1`, both relative to `‖S‖∞²`.
    pub fn with_tolerance(m: DMatrix<T>, tol: T) -> Result<Self> {
        let check = is_symplectic(&m, tol)?;
        if !check.symplectic {
            return Err(Error::NotSymplectic {
                residual: to_f64(check.residual),
                threshold: to_f64(check.threshold),
            });
        }
        let det = m.clone().determinant();
        let det_tol = check.threshold.max(tol);
        if (det - T::one()).abs() > det_tol {
            return Err(Error::NotSymplectic {
                residual: to_f64((det - T::one()).abs()),
                threshold: to_f64(det_tol),
            });
        }
        let n = m.nrows() / 2;
        Ok(Self { entries: m, n })
    }

    /// Wraps a matrix that is symplectic by construction.
    pub(crate) fn from_trusted(m: DMatrix<T>) -> Self {
        let n = m.nrows() / 2;
        Self { entries: m, n }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_trusted(DMatrix::identity(2 * n, 2 * n))
    }

    /// `J` itself, which lies in Sp(n).
    pub fn standard_j(n: usize) -> Self {
        Self::from_trusted(standard_j(n))
    }

    /// Independent rotations of each conjugate plane by the given angles.
    pub fn plane_rotations(angles: &[T]) -> Self {
        let n = angles.len();
        let mut m = DMatrix::identity(2 * n, 2 * n);
        for (j, a) in angles.iter().enumerate() {
            let (s, c) = a.sin_cos();
            m[(j, j)] = c;
            m[(j, n + j)] = s;
            m[(n + j, j)] = -s;
            m[(n + j, n + j)] = c;
        }
        Self::from_trusted(m)
    }

    /// `diag(λ₁..λₙ, 1/λ₁..1/λₙ)`.
    pub fn squeeze(factors: &[T]) -> Result<Self> {
        if factors.iter().any(|f| *f == T::zero() || !f.is_finite()) {
            return Err(Error::InvalidInput(
                "squeeze factors must be finite and nonzero".into(),
            ));
        }
        if factors.is_empty() {
            return Err(Error::Dimension("need at least one squeeze factor".into()));
        }
        let diag: Vec<T> = factors
            .iter()
            .copied()
            .chain(factors.iter().map(|f| T::one() / *f))
            .collect();
        Ok(Self::from_trusted(DMatrix::from_diagonal(
            &DVector::from_vec(diag),
        )))
    }

    /// Lower shear `[[I, 0], [C, I]]` for symmetric `C`.
    pub fn lower_shear(c: &DMatrix<T>) -> Result<Self> {
        if !c.is_square() || crate::linalg::asymmetry(c) > tol_floor(1e-12) {
            return Err(Error::InvalidInput(
                "shear block must be square and symmetric".into(),
            ));
        }
        let n = c.nrows();
        let mut m = DMatrix::identity(2 * n, 2 * n);
        m.view_mut((n, 0), (n, n)).copy_from(c);
        Ok(Self::from_trusted(m))
    }

    /// `exp(J·A)` for symmetric `A`: the time-one flow of `½ z·Az`.
    pub fn exp_hamiltonian(a: &DMatrix<T>) -> Result<Self> {
        let n = a.nrows() / 2;
        if !a.is_square() || a.nrows() != 2 * n || n == 0 {
            return Err(Error::Dimension("generator must be 2n×2n".into()));
        }
        Ok(Self::from_trusted(expm(
            &(standard_j::<T>(n) * crate::linalg::symmetrize(a)),
        )?))
    }

    pub fn dof(&self) -> usize {
        self.n
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.entries
    }

    /// `S⁻¹ = −J Sᵀ J`, exact up to rounding.
    pub fn inverse(&self) -> Self {
        let j = standard_j::<T>(self.n);
        Self::from_trusted(-(&j * self.entries.transpose() * &j))
    }

    pub fn transpose(&self) -> Self {
        Self::from_trusted(self.entries.transpose())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot compose n={} with n={}",
                self.n, other.n
            )));
        }
        Ok(Self::from_trusted(&self.entries * &other.entries))
    }

    pub fn apply(&self, z: &PhasePoint<T>) -> Result<PhasePoint<T>> {
        if z.dof() != self.n {
            return Err(Error::Dimension(format!(
                "point has n={}, map has n={}",
                z.dof(),
                self.n
            )));
        }
        Ok(PhasePoint {
            coords: &self.entries * z.as_vector(),
        })
    }

    pub fn check(&self, tol: T) -> SymplecticCheck<T> {
        is_symplectic(&self.entries, tol).expect("shape validated at construction")
    }

    pub fn is_identity(&self) -> bool {
        self.entries == DMatrix::identity(2 * self.n, 2 * self.n)
    }
}

impl<T: Real> Mul for &SymplecticMatrix<T> {
    type Output = SymplecticMatrix<T>;

    fn mul(self, rhs: Self) -> SymplecticMatrix<T> {
        assert_eq!(self.n, rhs.n, "symplectic dimension mismatch");
        SymplecticMatrix::from_trusted(&self.entries * &rhs.entries)
    }
}

/// Deterministic pseudo-random element of Sp(n).
///
/// Built as `exp(J A₁)·U₁·exp(J A₂)·U₂` with symmetric `Aₖ` whose entries are
/// standard normal scaled by `spread/√(2n)` and `Uₖ` independent rotations
/// of the conjugate planes. The result mixes all coordinates.
pub fn random_symplectic<T: Real>(n: usize, seed: u64, spread: f64) -> Result<SymplecticMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be >= 1".into()));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "spread must be positive, got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * n;
    let scale = spread / (dim as f64).sqrt();
    let mut s = SymplecticMatrix::<T>::identity(n);
    for _ in 0..2 {
        let mut a = DMatrix::<T>::zeros(dim, dim);
        for r in 0..dim {
            for c in r..dim {
                let v: f64 = rng.sample(StandardNormal);
                a[(r, c)] = lit(v * scale);
                a[(c, r)] = a[(r, c)];
            }
        }
        let angles: Vec<T> = (0..n)
            .map(|_| lit(rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        s = &(&s * &SymplecticMatrix::exp_hamiltonian(&a)?)
            * &SymplecticMatrix::plane_rotations(&angles);
    }
    let check = s.check(tol_floor(DEFAULT_SYMPLECTIC_TOL));
    if !check.symplectic {
        return Err(Error::Numerical(format!(
            "generated matrix drifted from Sp(n): residual {:e}",
            to_f64(check.residual)
        )));
    }
    Ok(s)
}

/// `H(z) = ½ z·Rz` with a positive-definite symmetric Hessian `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian<T: Real> {
    hessian: DMatrix<T>,
}

impl<T: Real> QuadraticHamiltonian<T> {
    pub fn new(hessian: DMatrix<T>) -> Result<Self> {
        if !hessian.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "Hessian order {} is odd",
                hessian.nrows()
            )));
        }
        validate_spd(&hessian, tol_floor(1e-12))?;
        Ok(Self {
            hessian: crate::linalg::symmetrize(&hessian),
        })
    }

    /// Diagonal Hessian `diag(r₁..r₂ₙ)`.
    pub fn diagonal(entries: &[T]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// `p²/2m + ½mω²x²` in one degree of freedom.
    pub fn oscillator(mass: T, omega: T) -> Result<Self> {
        Self::diagonal(&[mass * omega * omega, T::one() / mass])
    }

    pub fn hessian(&self) -> &DMatrix<T> {
        &self.hessian
    }

    pub fn dof(&self) -> usize {
        self.hessian.nrows() / 2
    }

    pub fn energy(&self, z: &PhasePoint<T>) -> T {
        let v = z.as_vector();
        (v.transpose() * &self.hessian * v)[(0, 0)] * lit::<T>(0.5)
    }
}

/// Exact flow `exp(t·J·R)` of a quadratic Hamiltonian.
pub fn quad_propagator<T: Real>(h: &QuadraticHamiltonian<T>, t: T) -> Result<SymplecticMatrix<T>> {
    if !t.is_finite() {
        return Err(Error::InvalidInput(
            "propagation time must be finite".into(),
        ));
    }
    let n = h.dof();
    let generator = standard_j::<T>(n) * h.hessian() * t;
    Ok(SymplecticMatrix::from_trusted(expm(&generator)?))
}

/// `max_t |H(z(t)) − H(z₀)| / H(z₀)` along the exact flow.
pub fn flow_energy_drift<T: Real>(
    h: &QuadraticHamiltonian<T>,
    z0: &PhasePoint<T>,
    times: &[T],
) -> Result<T> {
    if z0.dof() != h.dof() {
        return Err(Error::Dimension(format!(
            "z0 has n={}, Hamiltonian has n={}",
            z0.dof(),
            h.dof()
        )));
    }
    let e0 = h.energy(z0);
    if e0 == T::zero() {
        return Err(Error::Degenerate(
            "H(z0) = 0; relative drift undefined".into(),
        ));
    }
    let mut worst = T::zero();
    for &t in times {
        let z = quad_propagator(h, t)?.apply(z0)?;
        let drift = (h.energy(&z) - e0).abs() / e0;
        if drift > worst {
            worst = drift;
        }
    }
    Ok(worst)
}
