//! Dense linear-algebra helpers: norms, the standard symplectic matrix,
//! symmetric square roots and the matrix exponential.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Operator ∞-norm (maximum absolute row sum).
pub fn inf_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.row_iter()
        .map(|row| row.iter().fold(T::zero(), |acc, v| acc + v.abs()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Operator 1-norm (maximum absolute column sum).
pub fn one_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.column_iter()
        .map(|col| col.iter().fold(T::zero(), |acc, v| acc + v.abs()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |a, v| if v.abs() > a { v.abs() } else { a })
}

/// The standard symplectic matrix `J = [[0, I], [-I, 0]]` for `n` degrees of
/// freedom, so that `(Jz)·z' = p·x' − p'·x`.
pub fn standard_j<T: Real>(n: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = T::one();
        j[(n + k, k)] = -T::one();
    }
    j
}

/// `σ(z, z') = (Jz)·z'`.
pub fn sigma<T: Real>(z: &DVector<T>, w: &DVector<T>) -> T {
    let n = z.len() / 2;
    (0..n).fold(T::zero(), |acc, k| acc + z[n + k] * w[k] - w[n + k] * z[k])
}

/// Relative asymmetry `‖M − Mᵀ‖∞ / ‖M‖∞`.
pub fn asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let scale = inf_norm(m);
    if scale == T::zero() {
        return T::zero();
    }
    inf_norm(&(m - m.transpose())) / scale
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

/// Symmetric positive-definite check. Returns the eigendecomposition of the
/// symmetrized input on success.
pub fn validate_spd<T: Real>(
    m: &DMatrix<T>,
    sym_tol: T,
) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let asym = asymmetry(m);
    if asym > sym_tol {
        return Err(Error::NotSymmetric {
            asymmetry: to_f64(asym),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let floor = lit::<T>(1e-12) * inf_norm(m);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap(), |a, b| if b < a { b } else { a });
    if min <= floor {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: to_f64(min),
            floor: to_f64(floor),
        });
    }
    Ok(eig)
}

/// `V f(Λ) Vᵀ` for a symmetric eigendecomposition.
pub fn spectral_apply<T: Real>(
    eig: &SymmetricEigen<T, nalgebra::Dyn>,
    f: impl Fn(T) -> T,
) -> DMatrix<T> {
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    v * d * v.transpose()
}

/// Rows `(j, n+j)` of `m`: the conjugate plane selector applied on the left.
pub fn plane_rows<T: Real>(m: &DMatrix<T>, j: usize) -> DMatrix<T> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(2, m.ncols(), |r, c| m[(if r == 0 { j } else { n + j }, c)])
}

/// Principal 2×2 block on the conjugate plane `(j, n+j)`.
pub fn plane_block<T: Real>(m: &DMatrix<T>, j: usize) -> DMatrix<T> {
    let n = m.nrows() / 2;
    let idx = [j, n + j];
    DMatrix::from_fn(2, 2, |r, c| m[(idx[r], idx[c])])
}

/// `√det(AᵀA)` for a tall `A` with two columns, from the triangular factor
/// of a QR decomposition (no cancellation in forming `AᵀA`).
pub fn gram_root_det2<T: Real>(a: DMatrix<T>) -> T {
    let r = a.qr().r();
    (r[(0, 0)] * r[(1, 1)]).abs()
}

pub fn det2<T: Real>(m: &DMatrix<T>) -> T {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("expm needs a square matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "expm argument has non-finite entries".into(),
        ));
    }
    let dim = a.nrows();
    let norm = to_f64(one_norm(a));
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * lit::<T>(0.5f64.powi(squarings));
    let b: Vec<T> = PADE13.iter().map(|&c| lit(c)).collect();
    let ident = DMatrix::<T>::identity(dim, dim);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = &a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular Padé denominator in expm".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm_of_rotation_generator() {
        let t: f64 = 2.5;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-14);
        assert_relative_eq!(e[(0, 1)], t.sin(), epsilon = 1e-14);
        assert_relative_eq!(e[(1, 0)], -t.sin(), epsilon = 1e-14);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![12.0, -3.0, 0.5]));
        let e = expm(&a).unwrap();
        for (k, v) in [12.0f64, -3.0, 0.5].iter().enumerate() {
            assert_relative_eq!(e[(k, k)], v.exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn expm_matches_taylor_series_on_nilpotent() {
        // exp of a strictly upper triangular matrix terminates.
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0]);
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 3.5, 0.0, 1.0, 3.0, 0.0, 0.0, 1.0]);
        assert!((expm(&a).unwrap() - expected).amax() < 1e-14);
    }

    #[test]
    fn j_encodes_the_standard_form() {
        let j = standard_j::<f64>(2);
        let z = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let w = DVector::from_vec(vec![-1.0, 0.5, 2.0, -3.0]);
        assert_relative_eq!((&j * &z).dot(&w), sigma(&z, &w), epsilon = 1e-15);
        assert!((&j * &j + DMatrix::identity(4, 4)).amax() == 0.0);
    }

    #[test]
    fn spd_validation_errors() {
        let nonsym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            validate_spd(&nonsym, 1e-12),
            Err(Error::NotSymmetric { .. })
        ));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        match validate_spd(&indefinite, 1e-12) {
            Err(Error::NotPositiveDefinite { eigenvalue, .. }) => assert_eq!(eigenvalue, -2.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
