//! Symplectic spectra and Williamson normal forms of positive-definite
//! quadratic forms.
//!
//! For a Hessian `R` there is `S ∈ Sp(n)` with
//! `SᵀRS = diag(μ₁..μₙ, μ₁..μₙ)`; the `μⱼ` are the moduli of the eigenvalues
//! `±iμⱼ` of `JR` and are also the angular frequencies of the flow of
//! `½ z·Rz`. The ellipsoid `½ z·Rz ≤ level` has normal radii
//! `√(2·level/μⱼ)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, spectral_apply, standard_j, validate_spd};
use crate::scalar::{lit, to_f64, tol_floor, Real};
use crate::symcore::SymplecticMatrix;

/// Symplectic eigenvalues of a Hessian together with the derived radii of
/// the unit-level ellipsoid and the flow frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum<T: Real> {
    /// Ascending.
    pub mu: Vec<T>,
    /// `√(2/μⱼ)`: radii of `½ z·Rz ≤ 1` in normal form (descending).
    pub radii: Vec<T>,
    /// Angular frequencies of `exp(tJR)`; equal to `mu`.
    pub omega: Vec<T>,
}

impl<T: Real> SymplecticSpectrum<T> {
    fn from_mu(mu: Vec<T>) -> Self {
        let two = lit::<T>(2.0);
        let radii = mu.iter().map(|m| (two / *m).sqrt()).collect();
        Self {
            omega: mu.clone(),
            radii,
            mu,
        }
    }

    pub fn dof(&self) -> usize {
        self.mu.len()
    }

    /// CSV with header `j,mu,radius,omega`; `j` counts from 1.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["j", "mu", "radius", "omega"]).map_err(io)?;
        for k in 0..self.mu.len() {
            w.write_record(&[
                (k + 1).to_string(),
                format!("{:e}", to_f64(self.mu[k])),
                format!("{:e}", to_f64(self.radii[k])),
                format!("{:e}", to_f64(self.omega[k])),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// A Williamson normal form `SᵀRS = D`.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition<T: Real> {
    pub s: SymplecticMatrix<T>,
    pub spectrum: SymplecticSpectrum<T>,
    /// `‖SᵀRS − D‖∞`.
    pub residual: T,
}

fn validated<T: Real>(r: &DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    if !r.nrows().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "Hessian order {} is odd",
            r.nrows()
        )));
    }
    validate_spd(r, tol_floor(1e-12))
}

fn sorted_eigenvalues<T: Real>(m: DMatrix<T>) -> Vec<T> {
    let mut ev: Vec<T> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

/// Symplectic eigenvalues `μ₁ ≤ … ≤ μₙ` of a positive-definite Hessian.
pub fn symplectic_spectrum<T: Real>(r: &DMatrix<T>) -> Result<SymplecticSpectrum<T>> {
    let eig = validated(r)?;
    let n = r.nrows() / 2;
    let root = spectral_apply(&eig, |l| l.sqrt());
    // K = R^{1/2} J R^{1/2} is skew and similar to JR; -K² has μⱼ² twice.
    let k = &root * standard_j::<T>(n) * &root;
    let gram = k.transpose() * &k;
    let ev = sorted_eigenvalues(crate::linalg::symmetrize(&gram));
    let half = lit::<T>(0.5);
    let mu = (0..n)
        .map(|j| ((ev[2 * j] + ev[2 * j + 1]) * half).max(T::zero()).sqrt())
        .collect();
    Ok(SymplecticSpectrum::from_mu(mu))
}

/// Radii `Rⱼ = √(2·level/μⱼ)` of `½ z·Rz ≤ level` in normal form, ordered
/// like the spectrum (so descending).
pub fn normal_radii<T: Real>(r: &DMatrix<T>, level: T) -> Result<Vec<T>> {
    if !(level > T::zero()) || !level.is_finite() {
        return Err(Error::InvalidInput(format!(
            "level must be positive, got {level}"
        )));
    }
    let spec = symplectic_spectrum(r)?;
    let two_level = lit::<T>(2.0) * level;
    Ok(spec.mu.iter().map(|m| (two_level / *m).sqrt()).collect())
}

fn orthogonalize<T: Real>(mut v: DVector<T>, basis: &[DVector<T>]) -> DVector<T> {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&v);
            v.axpy(-c, b, T::one());
        }
    }
    v
}

/// Computes `S ∈ Sp(n)` with `SᵀRS = diag(μ, μ)`.
///
/// With `K = R^{-1/2} J R^{-1/2}` (skew, eigenvalues `±i/μⱼ`), an orthonormal
/// basis `uⱼ, vⱼ = −μⱼ K uⱼ` of each invariant plane brings `K` to
/// `[[0, D⁻¹], [−D⁻¹, 0]]`; then `S = R^{-1/2} [U V] D^{1/2}`. Repeated
/// eigenvalues are handled by Gram–Schmidt deflation inside the eigenspace.
pub fn williamson_decompose<T: Real>(r: &DMatrix<T>) -> Result<WilliamsonDecomposition<T>> {
    let eig = validated(r)?;
    let n = r.nrows() / 2;
    let dim = 2 * n;
    let inv_root = spectral_apply(&eig, |l| T::one() / l.sqrt());
    let k_raw = &inv_root * standard_j::<T>(n) * &inv_root;
    let k = (&k_raw - k_raw.transpose()) * lit::<T>(0.5);

    let gram = crate::linalg::symmetrize(&(k.transpose() * &k));
    let geig = SymmetricEigen::new(gram);
    let mut candidates: Vec<DVector<T>> = (0..dim)
        .map(|c| geig.eigenvectors.column(c).into_owned())
        .collect();

    let mut basis: Vec<DVector<T>> = Vec::with_capacity(dim);
    let mut pairs: Vec<(T, DVector<T>, DVector<T>)> = Vec::with_capacity(n);
    for _ in 0..n {
        let (best, resid) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, orthogonalize(c.clone(), &basis)))
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).expect("finite norms"))
            .ok_or_else(|| Error::Numerical("ran out of Williamson candidates".into()))?;
        candidates.swap_remove(best);
        let rn = resid.norm();
        if rn < lit(1e-6) {
            return Err(Error::Numerical(format!(
                "Williamson deflation lost rank (residual norm {:e})",
                to_f64(rn)
            )));
        }
        let u = resid / rn;
        let mut v = orthogonalize(-(&k * &u), &basis);
        let ku = v.dot(&u);
        v.axpy(-ku, &u, T::one());
        let vn = v.norm();
        if vn == T::zero() {
            return Err(Error::Numerical("degenerate invariant plane".into()));
        }
        let v = v / vn;
        let inv_mu = u.dot(&(&k * &v));
        if !(inv_mu > T::zero()) {
            return Err(Error::Numerical(format!(
                "non-positive pairing {:e}",
                to_f64(inv_mu)
            )));
        }
        basis.push(u.clone());
        basis.push(v.clone());
        pairs.push((T::one() / inv_mu, u, v));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite μ"));

    let mut s = DMatrix::<T>::zeros(dim, dim);
    for (j, (mu, u, v)) in pairs.iter().enumerate() {
        let sq = mu.sqrt();
        s.set_column(j, &(&inv_root * u * sq));
        s.set_column(n + j, &(&inv_root * v * sq));
    }

    let spectrum = symplectic_spectrum(r)?;
    let diag: Vec<T> = spectrum
        .mu
        .iter()
        .chain(spectrum.mu.iter())
        .copied()
        .collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(diag));
    let residual = inf_norm(&(s.transpose() * r * &s - d));
    let bound = tol_floor::<T>(1e-8) * inf_norm(r);
    if residual > bound {
        return Err(Error::Numerical(format!(
            "Williamson residual {:e} exceeds {:e} (n={n})",
            to_f64(residual),
            to_f64(bound)
        )));
    }
    let s = SymplecticMatrix::new(s)
        .map_err(|e| Error::Numerical(format!("Williamson basis not symplectic: {e}")))?;
    Ok(WilliamsonDecomposition {
        s,
        spectrum,
        residual,
    })
}
