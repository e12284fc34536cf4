//! JSON interchange. Conjugate-plane indices are 1-based here (`"j": 1` is
//! the `(x₁, p₁)` plane) and 0-based in the Rust API.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ebk::{capacity_condition, EbkSpectrum};
use crate::error::{Error, Result};
use crate::maslov::{LagrangianFrame, LagrangianLoop};
use crate::regions::{CapacityValue, PhaseRegion};
use crate::scalar::{lit, to_f64, Real};
use crate::symcore::{PhasePoint, SymplecticMatrix};
use crate::williamson::SymplecticSpectrum;

/// `{"n": n, "rows": [[...], ...]}`, a row-major `2n × 2n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

fn rows_to_matrix<T: Real>(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    what: &str,
) -> Result<DMatrix<T>> {
    if rows.len() != nrows {
        return Err(Error::Dimension(format!(
            "{what}: expected {nrows} rows, got {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Dimension(format!(
                "{what}: row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} has a non-finite entry"
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| lit(rows[i][j])))
}

pub fn matrix_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    m.row_iter()
        .map(|r| r.iter().map(|v| to_f64(*v)).collect())
        .collect()
}

impl MatrixJson {
    pub fn from_matrix<T: Real>(m: &DMatrix<T>) -> Result<Self> {
        if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "{}x{} is not a phase-space matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self {
            n: m.nrows() / 2,
            rows: matrix_rows(m),
        })
    }

    pub fn to_matrix<T: Real>(&self) -> Result<DMatrix<T>> {
        if self.n == 0 {
            return Err(Error::Dimension("n must be >= 1".into()));
        }
        rows_to_matrix(&self.rows, 2 * self.n, 2 * self.n, "matrix")
    }

    pub fn to_symplectic<T: Real>(&self, tol: T) -> Result<SymplecticMatrix<T>> {
        SymplecticMatrix::with_tolerance(self.to_matrix()?, tol)
    }
}

/// Region schema, tagged by `"variant"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub enum RegionJson {
    /// `n` defaults to the length of `center`, or 1.
    Ball {
        #[serde(rename = "R")]
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Ellipsoid {
        hessian: MatrixJson,
        #[serde(default = "one")]
        level: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    SolidTorus {
        radii: Vec<f64>,
    },
    Cylinder {
        j: usize,
        #[serde(rename = "R")]
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    AffineImage {
        #[serde(rename = "S")]
        map: MatrixJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<Vec<f64>>,
        inner: Box<RegionJson>,
    },
}

fn one() -> f64 {
    1.0
}

fn point<T: Real>(
    coords: Option<&Vec<f64>>,
    n: Option<usize>,
    min_n: usize,
) -> Result<PhasePoint<T>> {
    match (coords, n) {
        (Some(c), n) => {
            let p = PhasePoint::new(c.iter().map(|v| lit(*v)).collect())?;
            if let Some(n) = n {
                if p.dof() != n {
                    return Err(Error::Dimension(format!(
                        "center has n={}, declared n={n}",
                        p.dof()
                    )));
                }
            }
            Ok(p)
        }
        (None, Some(0)) => Err(Error::Dimension("n must be >= 1".into())),
        (None, Some(n)) => Ok(PhasePoint::origin(n)),
        (None, None) => Ok(PhasePoint::origin(min_n.max(1))),
    }
}

fn coords<T: Real>(p: &PhasePoint<T>) -> Option<Vec<f64>> {
    if p.is_origin() {
        None
    } else {
        Some(p.as_vector().iter().map(|v| to_f64(*v)).collect())
    }
}

impl RegionJson {
    pub fn to_region<T: Real>(&self, tol: T) -> Result<PhaseRegion<T>> {
        match self {
            Self::Ball { radius, n, center } => {
                PhaseRegion::ball(point(center.as_ref(), *n, 1)?, lit(*radius))
            }
            Self::Ellipsoid {
                hessian,
                level,
                center,
            } => {
                let m = hessian.to_matrix()?;
                PhaseRegion::ellipsoid(point(center.as_ref(), Some(hessian.n), 1)?, m, lit(*level))
            }
            Self::SolidTorus { radii } => {
                PhaseRegion::solid_torus(radii.iter().map(|r| lit(*r)).collect())
            }
            Self::Cylinder {
                j,
                radius,
                n,
                center,
            } => {
                if *j == 0 {
                    return Err(Error::Dimension("cylinder plane j counts from 1".into()));
                }
                PhaseRegion::cylinder(j - 1, point(center.as_ref(), *n, *j)?, lit(*radius))
            }
            Self::AffineImage { map, shift, inner } => {
                let s = map.to_symplectic(tol)?;
                let shift = point(shift.as_ref(), Some(map.n), 1)?;
                PhaseRegion::affine_image(s, shift, inner.to_region(tol)?)
            }
        }
    }

    pub fn from_region<T: Real>(region: &PhaseRegion<T>) -> Result<Self> {
        Ok(match region {
            PhaseRegion::Ball { center, radius } => Self::Ball {
                radius: to_f64(*radius),
                n: Some(center.dof()),
                center: coords(center),
            },
            PhaseRegion::Ellipsoid {
                center,
                hessian,
                level,
            } => Self::Ellipsoid {
                hessian: MatrixJson::from_matrix(hessian)?,
                level: to_f64(*level),
                center: coords(center),
            },
            PhaseRegion::SolidTorus { radii } => Self::SolidTorus {
                radii: radii.iter().map(|r| to_f64(*r)).collect(),
            },
            PhaseRegion::Cylinder {
                plane,
                center,
                radius,
            } => Self::Cylinder {
                j: plane + 1,
                radius: to_f64(*radius),
                n: Some(center.dof()),
                center: coords(center),
            },
            PhaseRegion::AffineImage { map, shift, inner } => Self::AffineImage {
                map: MatrixJson::from_matrix(map.as_matrix())?,
                shift: coords(shift),
                inner: Box::new(Self::from_region(inner)?),
            },
        })
    }
}

pub fn parse_region<T: Real>(json: &str, tol: T) -> Result<PhaseRegion<T>> {
    serde_json::from_str::<RegionJson>(json)?.to_region(tol)
}

/// `{"value", "exact", "bounds"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub value: f64,
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
}

impl<T: Real> From<&CapacityValue<T>> for CapacityReport {
    fn from(c: &CapacityValue<T>) -> Self {
        Self {
            value: to_f64(c.value),
            exact: c.exact,
            bounds: c.bounds.map(|(lo, hi)| [to_f64(lo), to_f64(hi)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameJson {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub t: f64,
}

/// `{"n", "frames": [{"X", "P", "t"}, ...]}` with `n × n` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopJson {
    pub n: usize,
    pub frames: Vec<FrameJson>,
}

impl LoopJson {
    pub fn to_loop<T: Real>(&self) -> Result<LagrangianLoop<T>> {
        if self.n == 0 {
            return Err(Error::Dimension("n must be >= 1".into()));
        }
        let mut frames = Vec::with_capacity(self.frames.len());
        let mut params = Vec::with_capacity(self.frames.len());
        for (k, f) in self.frames.iter().enumerate() {
            let x = rows_to_matrix(&f.x, self.n, self.n, &format!("frame {k} X"))?;
            let p = rows_to_matrix(&f.p, self.n, self.n, &format!("frame {k} P"))?;
            frames.push(LagrangianFrame::new(x, p)?);
            params.push(lit(f.t));
        }
        LagrangianLoop::new(frames, params)
    }

    pub fn from_loop<T: Real>(lp: &LagrangianLoop<T>) -> Self {
        Self {
            n: lp.dof(),
            frames: lp
                .frames()
                .iter()
                .zip(lp.params())
                .map(|(f, t)| FrameJson {
                    x: matrix_rows(f.x()),
                    p: matrix_rows(f.p()),
                    t: to_f64(*t),
                })
                .collect(),
        }
    }
}

/// Symplectic spectrum as JSON; `j` counts from 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumJson {
    pub j: Vec<usize>,
    pub mu: Vec<f64>,
    pub radius: Vec<f64>,
    pub omega: Vec<f64>,
}

impl<T: Real> From<&SymplecticSpectrum<T>> for SpectrumJson {
    fn from(s: &SymplecticSpectrum<T>) -> Self {
        let f = |v: &[T]| v.iter().map(|x| to_f64(*x)).collect();
        Self {
            j: (1..=s.dof()).collect(),
            mu: f(&s.mu),
            radius: f(&s.radii),
            omega: f(&s.omega),
        }
    }
}

/// One EBK level with its capacity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelJson {
    #[serde(rename = "N")]
    pub quanta: Vec<u32>,
    pub maslov: Vec<i64>,
    pub actions: Vec<f64>,
    pub radii: Vec<f64>,
    pub energy: f64,
    pub capacity: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbkSpectrumJson {
    pub hbar: f64,
    pub levels: Vec<LevelJson>,
}

impl EbkSpectrumJson {
    pub fn from_spectrum<T: Real>(s: &EbkSpectrum<T>) -> Result<Self> {
        let f = |v: &[T]| v.iter().map(|x| to_f64(*x)).collect::<Vec<_>>();
        let levels = s
            .entries
            .iter()
            .map(|e| {
                let cap = capacity_condition(e, s.hbar)?;
                Ok(LevelJson {
                    quanta: e.quanta.clone(),
                    maslov: e.maslov.clone(),
                    actions: f(&e.actions),
                    radii: f(&e.radii),
                    energy: to_f64(e.energy),
                    capacity: to_f64(cap.capacity),
                    satisfied: cap.satisfied,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hbar: to_f64(s.hbar),
            levels,
        })
    }

    /// Columns `N1..Nn, I1..In, R1..Rn, energy, capacity, satisfied`.
    pub fn to_csv(&self) -> Result<String> {
        let n = self.levels.first().map_or(0, |l| l.quanta.len());
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        let mut header: Vec<String> = Vec::new();
        for prefix in ["N", "I", "R"] {
            header.extend((1..=n).map(|j| format!("{prefix}{j}")));
        }
        header.extend(["energy", "capacity", "satisfied"].map(String::from));
        w.write_record(&header).map_err(io)?;
        for l in &self.levels {
            let mut rec: Vec<String> = l.quanta.iter().map(|q| q.to_string()).collect();
            rec.extend(l.actions.iter().map(|v| format!("{v:e}")));
            rec.extend(l.radii.iter().map(|v| format!("{v:e}")));
            rec.push(format!("{:e}", l.energy));
            rec.push(format!("{:e}", l.capacity));
            rec.push(l.satisfied.to_string());
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Phase point from a JSON array.
pub fn parse_point<T: Real>(json: &str) -> Result<PhasePoint<T>> {
    let v: Vec<f64> = serde_json::from_str(json)?;
    PhasePoint::from_vector(DVector::from_iterator(v.len(), v.into_iter().map(lit)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::capacity;
    use std::f64::consts::PI;

    #[test]
    fn ball_defaults() {
        let r: PhaseRegion<f64> = parse_region(r#"{"variant":"Ball","R":1}"#, 1e-9).unwrap();
        assert_eq!(r.dof(), 1);
        assert_eq!(capacity(&r).unwrap().value, PI);
        let r: PhaseRegion<f64> = parse_region(r#"{"variant":"Ball","R":2,"n":3}"#, 1e-9).unwrap();
        assert_eq!(r.dof(), 3);
    }

    #[test]
    fn strict_shapes() {
        assert!(parse_region::<f64>(r#"{"variant":"Ball","R":1,"radius":2}"#, 1e-9).is_err());
        assert!(parse_region::<f64>(r#"{"variant":"Blob","R":1}"#, 1e-9).is_err());
        let ragged = r#"{"variant":"Ellipsoid","hessian":{"n":1,"rows":[[1,0],[0]]}}"#;
        assert!(matches!(
            parse_region::<f64>(ragged, 1e-9),
            Err(Error::Dimension(_))
        ));
        let wrong_n = r#"{"variant":"Ellipsoid","hessian":{"n":2,"rows":[[1,0],[0,1]]}}"#;
        assert!(matches!(
            parse_region::<f64>(wrong_n, 1e-9),
            Err(Error::Dimension(_))
        ));
        let not_symp = r#"{"variant":"AffineImage","S":{"n":1,"rows":[[2,0],[0,2]]},"inner":{"variant":"Ball","R":1}}"#;
        assert!(matches!(
            parse_region::<f64>(not_symp, 1e-9),
            Err(Error::NotSymplectic { .. })
        ));
        assert!(parse_region::<f64>(r#"{"variant":"Cylinder","j":0,"R":1}"#, 1e-9).is_err());
    }

    #[test]
    fn region_round_trip() {
        let json = r#"{"variant":"AffineImage","S":{"n":1,"rows":[[2,0],[0,0.5]]},"shift":[1,2],"inner":{"variant":"Cylinder","j":1,"R":1.5,"n":1}}"#;
        let r: PhaseRegion<f64> = parse_region(json, 1e-9).unwrap();
        let back = RegionJson::from_region(&r).unwrap();
        assert_eq!(back.to_region::<f64>(1e-9).unwrap(), r);
        assert_eq!(capacity(&r).unwrap().value, PI * 2.25);
    }

    #[test]
    fn loop_round_trip() {
        let lp = crate::maslov::circle_loop::<f64>(16).unwrap();
        let json = serde_json::to_string(&LoopJson::from_loop(&lp)).unwrap();
        let back: LoopJson = serde_json::from_str(&json).unwrap();
        let lp2 = back.to_loop::<f64>().unwrap();
        assert_eq!(crate::maslov::maslov_index(&lp2).unwrap().index, 2);
    }

    #[test]
    fn ebk_csv_columns() {
        let k = crate::ebk::Oscillator {
            omega: vec![1.0, 2.0],
        };
        let s = crate::ebk::energy_levels(&k, &[2, 2], 1, 1.0).unwrap();
        let csv = EbkSpectrumJson::from_spectrum(&s)
            .unwrap()
            .to_csv()
            .unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "N1,N2,I1,I2,R1,R2,energy,capacity,satisfied"
        );
        assert!(lines
            .next()
            .unwrap()
            .starts_with("0,0,5e-1,5e-1,1e0,1e0,1.5e0,"));
    }
}
