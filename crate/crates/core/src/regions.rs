//! Canonical phase-space regions and their symplectic capacities.
//!
//! Every region handled here belongs to the family on which all symplectic
//! capacities agree (balls, cylinders, ellipsoids, solid tori and their
//! affine symplectic images), so [`capacity`] returns one exact number that
//! is simultaneously the lower and upper Gromov capacity. Anything outside
//! that family is refused rather than estimated.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{plane_block, spectral_apply, validate_spd};
use crate::scalar::{lit, to_f64, tol_floor, Real};
use crate::symcore::{PhasePoint, SymplecticMatrix};
use crate::williamson::symplectic_spectrum;

/// A region of phase space ℝ²ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseRegion<T: Real> {
    /// `|z − c| ≤ R`.
    Ball { center: PhasePoint<T>, radius: T },
    /// `½(z − c)·M(z − c) ≤ level`.
    Ellipsoid {
        center: PhasePoint<T>,
        hessian: DMatrix<T>,
        level: T,
    },
    /// `D²(R₁) × … × D²(Rₙ)`, one closed disk per conjugate plane.
    SolidTorus { radii: Vec<T> },
    /// `Z_j(c, r)`: points whose `(x_j, p_j)` lie within `r` of `c`'s.
    Cylinder {
        plane: usize,
        center: PhasePoint<T>,
        radius: T,
    },
    /// `S(inner) + shift`.
    AffineImage {
        map: SymplecticMatrix<T>,
        shift: PhasePoint<T>,
        inner: Box<PhaseRegion<T>>,
    },
}

fn positive<T: Real>(what: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

impl<T: Real> PhaseRegion<T> {
    pub fn ball(center: PhasePoint<T>, radius: T) -> Result<Self> {
        positive("ball radius", radius)?;
        Ok(Self::Ball { center, radius })
    }

    pub fn centered_ball(n: usize, radius: T) -> Result<Self> {
        Self::ball(PhasePoint::origin(n), radius)
    }

    pub fn ellipsoid(center: PhasePoint<T>, hessian: DMatrix<T>, level: T) -> Result<Self> {
        positive("ellipsoid level", level)?;
        if hessian.nrows() != 2 * center.dof() {
            return Err(Error::Dimension(format!(
                "Hessian is {}x{}, center has n={}",
                hessian.nrows(),
                hessian.ncols(),
                center.dof()
            )));
        }
        validate_spd(&hessian, tol_floor(1e-12))?;
        Ok(Self::Ellipsoid {
            center,
            hessian,
            level,
        })
    }

    /// The ellipsoid `Σ (xⱼ² + pⱼ²)/Rⱼ² ≤ 1`, already in normal form.
    pub fn normal_ellipsoid(radii: &[T]) -> Result<Self> {
        for r in radii {
            positive("ellipsoid radius", *r)?;
        }
        let two = lit::<T>(2.0);
        let diag: Vec<T> = radii
            .iter()
            .chain(radii.iter())
            .map(|r| two / (*r * *r))
            .collect();
        Self::ellipsoid(
            PhasePoint::origin(radii.len()),
            DMatrix::from_diagonal(&DVector::from_vec(diag)),
            T::one(),
        )
    }

    pub fn solid_torus(radii: Vec<T>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Dimension(
                "solid torus needs at least one radius".into(),
            ));
        }
        for r in &radii {
            positive("torus radius", *r)?;
        }
        Ok(Self::SolidTorus { radii })
    }

    pub fn cylinder(plane: usize, center: PhasePoint<T>, radius: T) -> Result<Self> {
        positive("cylinder radius", radius)?;
        if plane >= center.dof() {
            return Err(Error::Dimension(format!(
                "plane {plane} out of range for n={}",
                center.dof()
            )));
        }
        Ok(Self::Cylinder {
            plane,
            center,
            radius,
        })
    }

    pub fn affine_image(
        map: SymplecticMatrix<T>,
        shift: PhasePoint<T>,
        inner: PhaseRegion<T>,
    ) -> Result<Self> {
        if map.dof() != inner.dof() || shift.dof() != inner.dof() {
            return Err(Error::Dimension(format!(
                "map n={}, shift n={}, region n={}",
                map.dof(),
                shift.dof(),
                inner.dof()
            )));
        }
        Ok(Self::AffineImage {
            map,
            shift,
            inner: Box::new(inner),
        })
    }

    /// Degrees of freedom `n`.
    pub fn dof(&self) -> usize {
        match self {
            Self::Ball { center, .. }
            | Self::Ellipsoid { center, .. }
            | Self::Cylinder { center, .. } => center.dof(),
            Self::SolidTorus { radii } => radii.len(),
            Self::AffineImage { inner, .. } => inner.dof(),
        }
    }

    /// Re-checks every invariant, recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ball { radius, .. } => positive("ball radius", *radius),
            Self::Ellipsoid {
                center,
                hessian,
                level,
            } => Self::ellipsoid(center.clone(), hessian.clone(), *level).map(|_| ()),
            Self::SolidTorus { radii } => Self::solid_torus(radii.clone()).map(|_| ()),
            Self::Cylinder {
                plane,
                center,
                radius,
            } => Self::cylinder(*plane, center.clone(), *radius).map(|_| ()),
            Self::AffineImage { map, shift, inner } => {
                inner.validate()?;
                if map.dof() != inner.dof() || shift.dof() != inner.dof() {
                    return Err(Error::Dimension("affine image dimensions disagree".into()));
                }
                Ok(())
            }
        }
    }
}

/// A capacity, exact or bracketed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityValue<T: Real> {
    pub value: T,
    pub exact: bool,
    /// `(lower, upper)` when not exact.
    pub bounds: Option<(T, T)>,
}

impl<T: Real> CapacityValue<T> {
    fn exact(value: T) -> Self {
        Self {
            value,
            exact: true,
            bounds: None,
        }
    }

    /// The bracket `c_G ≤ c ≤ c^G`. For exact values both ends coincide.
    pub fn gromov_bracket(&self) -> (T, T) {
        self.bounds.unwrap_or((self.value, self.value))
    }
}

fn disk_area<T: Real>(r: T) -> T {
    T::PI() * r * r
}

/// Symplectic capacity of a supported region.
pub fn capacity<T: Real>(region: &PhaseRegion<T>) -> Result<CapacityValue<T>> {
    region.validate()?;
    Ok(CapacityValue::exact(capacity_value(region)?))
}

fn capacity_value<T: Real>(region: &PhaseRegion<T>) -> Result<T> {
    match region {
        PhaseRegion::Ball { radius, .. } | PhaseRegion::Cylinder { radius, .. } => {
            Ok(disk_area(*radius))
        }
        PhaseRegion::Ellipsoid { hessian, level, .. } => {
            // π·min Rⱼ² with Rⱼ² = 2·level/μⱼ, minimised by the largest μ.
            let spec = symplectic_spectrum(hessian)?;
            let mu_max = *spec.mu.last().expect("n >= 1");
            Ok(T::PI() * lit::<T>(2.0) * *level / mu_max)
        }
        PhaseRegion::SolidTorus { radii } => {
            let rmin = radii
                .iter()
                .copied()
                .fold(T::max_value().unwrap(), |a, b| a.min(b));
            Ok(disk_area(rmin))
        }
        // invariance: unwrap, never recompute geometry
        PhaseRegion::AffineImage { inner, .. } => capacity_value(inner),
    }
}

/// `λΩ` about the origin.
pub fn scale_region<T: Real>(region: &PhaseRegion<T>, lambda: T) -> Result<PhaseRegion<T>> {
    if lambda == T::zero() || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "scale factor must be finite and nonzero, got {lambda}"
        )));
    }
    if lambda == T::one() {
        return Ok(region.clone());
    }
    let mag = lambda.abs();
    Ok(match region {
        PhaseRegion::Ball { center, radius } => PhaseRegion::Ball {
            center: center.scaled(lambda),
            radius: *radius * mag,
        },
        PhaseRegion::Ellipsoid {
            center,
            hessian,
            level,
        } => PhaseRegion::Ellipsoid {
            center: center.scaled(lambda),
            hessian: hessian.clone(),
            level: *level * lambda * lambda,
        },
        PhaseRegion::SolidTorus { radii } => PhaseRegion::SolidTorus {
            radii: radii.iter().map(|r| *r * mag).collect(),
        },
        PhaseRegion::Cylinder {
            plane,
            center,
            radius,
        } => PhaseRegion::Cylinder {
            plane: *plane,
            center: center.scaled(lambda),
            radius: *radius * mag,
        },
        PhaseRegion::AffineImage { map, shift, inner } => PhaseRegion::AffineImage {
            map: map.clone(),
            shift: shift.scaled(lambda),
            inner: Box::new(scale_region(inner, lambda)?),
        },
    })
}

/// `S(Ω) + shift`, collapsing nested affine layers.
pub fn map_region<T: Real>(
    region: &PhaseRegion<T>,
    s: &SymplecticMatrix<T>,
    shift: &PhasePoint<T>,
) -> Result<PhaseRegion<T>> {
    let n = region.dof();
    if s.dof() != n || shift.dof() != n {
        return Err(Error::Dimension(format!(
            "map n={}, shift n={}, region n={n}",
            s.dof(),
            shift.dof()
        )));
    }
    if s.is_identity() && shift.is_origin() {
        return Ok(region.clone());
    }
    match region {
        PhaseRegion::AffineImage {
            map,
            shift: inner_shift,
            inner,
        } => {
            let composed = s * map;
            let moved = s.apply(inner_shift)?;
            let total = PhasePoint::from_vector(moved.as_vector() + shift.as_vector())?;
            PhaseRegion::affine_image(composed, total, (**inner).clone())
        }
        other => PhaseRegion::affine_image(s.clone(), shift.clone(), other.clone()),
    }
}

/// Capacity of a region certified to satisfy `B(inner_r) ⊆ Ω ⊆ Z_j(outer_r)`.
pub fn sandwich_capacity<T: Real>(
    inner_r: T,
    outer_r: T,
    _plane: usize,
) -> Result<CapacityValue<T>> {
    positive("inner radius", inner_r)?;
    positive("outer radius", outer_r)?;
    if inner_r > outer_r {
        return Err(Error::InconsistentCertificate {
            inner: to_f64(inner_r),
            outer: to_f64(outer_r),
        });
    }
    if inner_r == outer_r {
        return Ok(CapacityValue::exact(disk_area(inner_r)));
    }
    let (lo, hi) = (disk_area(inner_r), disk_area(outer_r));
    Ok(CapacityValue {
        value: lo,
        exact: false,
        bounds: Some((lo, hi)),
    })
}

/// How an inclusion verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    /// Closed-form decision.
    Exact,
    /// No counterexample among this many seeded boundary samples.
    Sampled { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inclusion<T: Real> {
    pub contained: bool,
    pub confidence: Confidence,
    /// A point of `inner` outside `outer`, when one was found.
    pub witness: Option<PhasePoint<T>>,
}

#[derive(Debug, Clone, Copy)]
pub struct InclusionOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for InclusionOptions {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
        }
    }
}

/// Centered shapes after unwrapping affine images where that is exact.
enum Canonical<T: Real> {
    /// `½ z·Mz ≤ level`.
    Ellipsoid {
        hessian: DMatrix<T>,
        level: T,
    },
    Torus {
        radii: Vec<T>,
    },
    MappedTorus {
        map: SymplecticMatrix<T>,
        radii: Vec<T>,
    },
    Cylinder {
        plane: usize,
        radius: T,
    },
}

fn require_origin<T: Real>(c: &PhasePoint<T>) -> Result<()> {
    if c.is_origin() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "inclusion checks need regions centered at the origin".into(),
        ))
    }
}

fn canonical<T: Real>(region: &PhaseRegion<T>) -> Result<Canonical<T>> {
    match region {
        PhaseRegion::Ball { center, radius } => {
            require_origin(center)?;
            let n = center.dof();
            Ok(Canonical::Ellipsoid {
                hessian: DMatrix::identity(2 * n, 2 * n),
                level: *radius * *radius * lit::<T>(0.5),
            })
        }
        PhaseRegion::Ellipsoid {
            center,
            hessian,
            level,
        } => {
            require_origin(center)?;
            Ok(Canonical::Ellipsoid {
                hessian: hessian.clone(),
                level: *level,
            })
        }
        PhaseRegion::SolidTorus { radii } => Ok(Canonical::Torus {
            radii: radii.clone(),
        }),
        PhaseRegion::Cylinder {
            plane,
            center,
            radius,
        } => {
            require_origin(center)?;
            Ok(Canonical::Cylinder {
                plane: *plane,
                radius: *radius,
            })
        }
        PhaseRegion::AffineImage { map, shift, inner } => {
            require_origin(shift)?;
            match canonical(inner)? {
                Canonical::Ellipsoid { hessian, level } => {
                    let inv = map.inverse();
                    let h = inv.as_matrix().transpose() * hessian * inv.as_matrix();
                    Ok(Canonical::Ellipsoid {
                        hessian: crate::linalg::symmetrize(&h),
                        level,
                    })
                }
                Canonical::Torus { radii } => Ok(Canonical::MappedTorus {
                    map: map.clone(),
                    radii,
                }),
                Canonical::MappedTorus { map: m2, radii } => Ok(Canonical::MappedTorus {
                    map: map * &m2,
                    radii,
                }),
                Canonical::Cylinder { .. } => Err(Error::Unsupported(
                    "images of cylinders are not supported as inclusion operands".into(),
                )),
            }
        }
    }
}

fn top_eigen<T: Real>(m: DMatrix<T>) -> (T, DVector<T>) {
    let eig = SymmetricEigen::new(crate::linalg::symmetrize(&m));
    let (idx, val) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold((0, T::min_value().unwrap()), |acc, (i, v)| {
                if *v > acc.1 {
                    (i, *v)
                } else {
                    acc
                }
            });
    (val, eig.eigenvectors.column(idx).into_owned())
}

/// Largest squared radius of the shadow of `½ z·Mz ≤ level` on plane `j`,
/// with a boundary point of the ellipsoid projecting onto the farthest
/// shadow point.
fn ellipsoid_shadow<T: Real>(hessian: &DMatrix<T>, level: T, j: usize) -> Result<(T, DVector<T>)> {
    let eig = validate_spd(hessian, tol_floor(1e-12))?;
    let cov = spectral_apply(&eig, |l| T::one() / l) * (lit::<T>(2.0) * level);
    let (lam, w) = top_eigen(plane_block(&cov, j));
    let n = hessian.nrows() / 2;
    let mut pt = DVector::zeros(2 * n);
    pt[j] = w[0];
    pt[n + j] = w[1];
    let z = &cov * pt / lam.sqrt();
    Ok((lam, z))
}

fn slack<T: Real>(v: T) -> T {
    v * (T::one() + tol_floor::<T>(1e-12))
}

/// Decides `inner ⊆ outer` with default sampling options.
pub fn inclusion_check<T: Real>(
    inner: &PhaseRegion<T>,
    outer: &PhaseRegion<T>,
) -> Result<Inclusion<T>> {
    inclusion_check_with(inner, outer, &InclusionOptions::default())
}

/// Decides `inner ⊆ outer` for centered regions.
///
/// Supported: ball, ellipsoid or solid torus into a cylinder; ellipsoid (or
/// ball) into a solid torus or an ellipsoid; torus into torus. Affine images
/// of balls and ellipsoids are handled exactly as ellipsoids; images of
/// solid tori are checked by seeded sampling of their distinguished boundary
/// `T^n`, which carries every extreme point.
pub fn inclusion_check_with<T: Real>(
    inner: &PhaseRegion<T>,
    outer: &PhaseRegion<T>,
    opts: &InclusionOptions,
) -> Result<Inclusion<T>> {
    inner.validate()?;
    outer.validate()?;
    if inner.dof() != outer.dof() {
        return Err(Error::Dimension(format!(
            "inner n={}, outer n={}",
            inner.dof(),
            outer.dof()
        )));
    }
    let n = inner.dof();
    let exact = |contained: bool, witness: Option<DVector<T>>| -> Result<Inclusion<T>> {
        Ok(Inclusion {
            contained,
            confidence: Confidence::Exact,
            witness: if contained {
                None
            } else {
                witness.map(PhasePoint::from_vector).transpose()?
            },
        })
    };
    match (canonical(inner)?, canonical(outer)?) {
        (Canonical::Ellipsoid { hessian, level }, Canonical::Cylinder { plane, radius }) => {
            let (lam, z) = ellipsoid_shadow(&hessian, level, plane)?;
            exact(lam <= slack(radius * radius), Some(z))
        }
        (Canonical::Torus { radii }, Canonical::Cylinder { plane, radius }) => {
            let mut z = DVector::zeros(2 * n);
            z[plane] = radii[plane];
            exact(radii[plane] <= slack(radius), Some(z))
        }
        (Canonical::Ellipsoid { hessian, level }, Canonical::Torus { radii }) => {
            for (k, r) in radii.iter().enumerate() {
                let (lam, z) = ellipsoid_shadow(&hessian, level, k)?;
                if lam > slack(*r * *r) {
                    return exact(false, Some(z));
                }
            }
            exact(true, None)
        }
        (Canonical::Ellipsoid { hessian: m1, level: l1 }, Canonical::Ellipsoid { hessian: m2, level: l2 }) => {
            // max over ½zM₁z = l₁ of ½zM₂z is l₁·λmax(M₁^{-1/2} M₂ M₁^{-1/2})
            let eig = validate_spd(&m1, tol_floor(1e-12))?;
            let inv_root = spectral_apply(&eig, |l| T::one() / l.sqrt());
            let (lam, w) = top_eigen(&inv_root * &m2 * &inv_root);
            let z = &inv_root * w * (lit::<T>(2.0) * l1).sqrt();
            exact(lam * l1 <= slack(l2), Some(z))
        }
        (Canonical::Torus { radii: a }, Canonical::Torus { radii: b }) => {
            let bad = a.iter().zip(&b).position(|(x, y)| *x > slack(*y));
            let witness = bad.map(|k| {
                let mut z = DVector::zeros(2 * n);
                z[k] = a[k];
                z
            });
            exact(bad.is_none(), witness)
        }
        (Canonical::MappedTorus { map, radii }, Canonical::Cylinder { plane, radius }) => {
            sample_mapped_torus(&map, &radii, opts, |z| {
                z[plane] * z[plane] + z[n + plane] * z[n + plane] <= slack(radius * radius)
            })
        }
        (Canonical::MappedTorus { map, radii }, Canonical::Torus { radii: outer_r }) => {
            sample_mapped_torus(&map, &radii, opts, |z| {
                (0..n).all(|k| z[k] * z[k] + z[n + k] * z[n + k] <= slack(outer_r[k] * outer_r[k]))
            })
        }
        _ => Err(Error::Unsupported(
            "supported pairs: {ball, ellipsoid, torus} into cylinder; {ball, ellipsoid} into torus or ellipsoid; torus into torus"
                .into(),
        )),
    }
}

fn sample_mapped_torus<T: Real>(
    map: &SymplecticMatrix<T>,
    radii: &[T],
    opts: &InclusionOptions,
    inside: impl Fn(&DVector<T>) -> bool,
) -> Result<Inclusion<T>> {
    let n = radii.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut y = DVector::zeros(2 * n);
    for _ in 0..opts.samples {
        for (k, r) in radii.iter().enumerate() {
            let (s, c) = lit::<T>(rng.random_range(0.0..std::f64::consts::TAU)).sin_cos();
            y[k] = *r * c;
            y[n + k] = *r * s;
        }
        let z = map.as_matrix() * &y;
        if !inside(&z) {
            return Ok(Inclusion {
                contained: false,
                confidence: Confidence::Exact,
                witness: Some(PhasePoint::from_vector(z)?),
            });
        }
    }
    Ok(Inclusion {
        contained: true,
        confidence: Confidence::Sampled {
            samples: opts.samples,
        },
        witness: None,
    })
}
