//! EBK quantization of integrable systems written in action variables.
//!
//! Quantized actions are `I_j = (N_j + m_j/4)ħ` for integers `N_j ≥ 0` and
//! Maslov indices `m_j` of the basic cycles; energies are `K(I)`. On a torus
//! of radii `R_j` the actions are `I_j = ½R_j²`, so the solid torus has
//! capacity `π·min R_j² = 2π·min I_j`, which is at least `½h` whenever every
//! `m_j ≥ 2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regions::{capacity, PhaseRegion};
use crate::scalar::{lit, to_f64, tol_floor, Real};

pub mod quadrature;

pub use quadrature::{action_quadrature_1d, QuadratureOptions};

/// Energy as a function of the action variables.
pub trait ActionHamiltonian<T: Real>: Send + Sync {
    /// Number of action variables.
    fn dof(&self) -> usize;

    fn energy(&self, actions: &[T]) -> Result<T>;

    /// Frequencies `ω_j = ∂K/∂I_j`. Defaults to central differences.
    fn gradient(&self, actions: &[T]) -> Result<Vec<T>> {
        central_gradient(self, actions)
    }

    /// Claim that every `ω_j > 0` on the positive orthant.
    fn is_monotone(&self) -> bool;
}

fn central_gradient<T: Real, K: ActionHamiltonian<T> + ?Sized>(
    k: &K,
    actions: &[T],
) -> Result<Vec<T>> {
    let mut shifted = actions.to_vec();
    (0..actions.len())
        .map(|j| {
            let h = lit::<T>(1e-5) * (T::one() + actions[j].abs());
            shifted[j] = actions[j] + h;
            let up = k.energy(&shifted)?;
            shifted[j] = actions[j] - h;
            let down = k.energy(&shifted)?;
            shifted[j] = actions[j];
            Ok((up - down) / (h + h))
        })
        .collect()
}

fn check_len<T: Real>(expected: usize, actions: &[T]) -> Result<()> {
    if actions.len() != expected {
        return Err(Error::Evaluation {
            actions: actions.iter().map(|a| to_f64(*a)).collect(),
            message: format!("expected {expected} actions"),
        });
    }
    Ok(())
}

/// `K(I) = Σ ω_j I_j`: decoupled harmonic oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillator<T: Real> {
    pub omega: Vec<T>,
}

impl<T: Real> ActionHamiltonian<T> for Oscillator<T> {
    fn dof(&self) -> usize {
        self.omega.len()
    }

    fn energy(&self, actions: &[T]) -> Result<T> {
        check_len(self.omega.len(), actions)?;
        Ok(self
            .omega
            .iter()
            .zip(actions)
            .fold(T::zero(), |acc, (w, i)| acc + *w * *i))
    }

    fn gradient(&self, actions: &[T]) -> Result<Vec<T>> {
        check_len(self.omega.len(), actions)?;
        Ok(self.omega.clone())
    }

    fn is_monotone(&self) -> bool {
        self.omega.iter().all(|w| *w > T::zero())
    }
}

/// `K(I) = Σ I_j^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLaw<T: Real> {
    pub dof: usize,
    pub exponent: T,
}

impl<T: Real> ActionHamiltonian<T> for PowerLaw<T> {
    fn dof(&self) -> usize {
        self.dof
    }

    fn energy(&self, actions: &[T]) -> Result<T> {
        check_len(self.dof, actions)?;
        if actions.iter().any(|a| *a < T::zero()) {
            return Err(Error::Evaluation {
                actions: actions.iter().map(|a| to_f64(*a)).collect(),
                message: "power law needs non-negative actions".into(),
            });
        }
        Ok(actions
            .iter()
            .fold(T::zero(), |acc, a| acc + a.powf(self.exponent)))
    }

    fn gradient(&self, actions: &[T]) -> Result<Vec<T>> {
        check_len(self.dof, actions)?;
        Ok(actions
            .iter()
            .map(|a| self.exponent * a.powf(self.exponent - T::one()))
            .collect())
    }

    fn is_monotone(&self) -> bool {
        self.exponent > T::zero()
    }
}

/// One-degree-of-freedom `K` given as a table of `(I, E)` samples and
/// evaluated by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable<T: Real> {
    actions: Vec<T>,
    energies: Vec<T>,
}

impl<T: Real> ActionTable<T> {
    pub fn new(actions: Vec<T>, energies: Vec<T>) -> Result<Self> {
        if actions.len() < 2 || actions.len() != energies.len() {
            return Err(Error::InvalidInput("table needs >= 2 (I, E) rows".into()));
        }
        if actions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "table actions must be strictly increasing".into(),
            ));
        }
        Ok(Self { actions, energies })
    }
}

impl<T: Real> ActionHamiltonian<T> for ActionTable<T> {
    fn dof(&self) -> usize {
        1
    }

    fn energy(&self, actions: &[T]) -> Result<T> {
        check_len(1, actions)?;
        let i = actions[0];
        let (lo, hi) = (self.actions[0], *self.actions.last().expect("len >= 2"));
        if i < lo || i > hi {
            return Err(Error::Evaluation {
                actions: vec![to_f64(i)],
                message: format!("outside table range [{lo}, {hi}]"),
            });
        }
        let k = self
            .actions
            .partition_point(|a| *a <= i)
            .clamp(1, self.actions.len() - 1);
        let (a0, a1) = (self.actions[k - 1], self.actions[k]);
        let (e0, e1) = (self.energies[k - 1], self.energies[k]);
        Ok(e0 + (e1 - e0) * (i - a0) / (a1 - a0))
    }

    fn is_monotone(&self) -> bool {
        self.energies.windows(2).all(|w| w[1] > w[0])
    }
}

/// Arbitrary closure with a declared monotonicity flag.
pub struct FnHamiltonian<T: Real, F> {
    dof: usize,
    monotone: bool,
    f: F,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real, F: Fn(&[T]) -> T + Send + Sync> FnHamiltonian<T, F> {
    pub fn new(dof: usize, monotone: bool, f: F) -> Self {
        Self {
            dof,
            monotone,
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T: Real, F: Fn(&[T]) -> T + Send + Sync> ActionHamiltonian<T> for FnHamiltonian<T, F> {
    fn dof(&self) -> usize {
        self.dof
    }

    fn energy(&self, actions: &[T]) -> Result<T> {
        check_len(self.dof, actions)?;
        let e = (self.f)(actions);
        if !e.is_finite() {
            return Err(Error::Evaluation {
                actions: actions.iter().map(|a| to_f64(*a)).collect(),
                message: "non-finite energy".into(),
            });
        }
        Ok(e)
    }

    fn is_monotone(&self) -> bool {
        self.monotone
    }
}

/// Outcome of [`audit_hamiltonian`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianAudit {
    pub points: usize,
    /// Points where a claimed-positive frequency was not positive.
    pub monotonicity_failures: usize,
    /// Largest relative gap between `gradient` and central differences.
    pub max_gradient_error: f64,
    pub gradient_ok: bool,
}

/// Spot-checks a Hamiltonian at `points` seeded positions in `(0, scale]ⁿ`:
/// the monotone claim and the gradient against central differences
/// (`1e-6` relative).
pub fn audit_hamiltonian<T: Real>(
    k: &dyn ActionHamiltonian<T>,
    points: usize,
    scale: f64,
    seed: u64,
) -> Result<HamiltonianAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut audit = HamiltonianAudit {
        points,
        monotonicity_failures: 0,
        max_gradient_error: 0.0,
        gradient_ok: true,
    };
    for _ in 0..points {
        let actions: Vec<T> = (0..k.dof())
            .map(|_| lit(rng.random_range(1e-3..1.0) * scale))
            .collect();
        let grad = k.gradient(&actions)?;
        if k.is_monotone() && grad.iter().any(|g| !(*g > T::zero())) {
            audit.monotonicity_failures += 1;
        }
        let fd = central_gradient(k, &actions)?;
        for (g, f) in grad.iter().zip(&fd) {
            let denom = g.abs().max(f.abs()).max(lit(1e-12));
            audit.max_gradient_error = audit
                .max_gradient_error
                .max(to_f64((*g - *f).abs() / denom));
        }
    }
    audit.gradient_ok = audit.max_gradient_error <= 1e-6;
    Ok(audit)
}

/// Quantum numbers with their actions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedActions<T: Real> {
    pub quanta: Vec<u32>,
    pub actions: Vec<T>,
}

fn validate_maslov(maslov: &[i64]) -> Result<()> {
    if maslov.is_empty() {
        return Err(Error::InvalidInput("need at least one Maslov index".into()));
    }
    for (cycle, &m) in maslov.iter().enumerate() {
        if m <= 0 {
            return Err(Error::InvalidMaslov { cycle, value: m });
        }
    }
    if maslov.iter().any(|m| m % 2 != 0) {
        log::warn!("odd Maslov index in {maslov:?}: the invariant torus cannot be oriented");
    }
    Ok(())
}

fn positive_hbar<T: Real>(hbar: T) -> Result<()> {
    if hbar > T::zero() && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "hbar must be positive, got {hbar}"
        )))
    }
}

/// All `(N₁..Nₙ)` with `0 ≤ N_j ≤ n_max`, in lexicographic order (last index
/// fastest), mapped to `I_j = (N_j + m_j/4)ħ`.
pub fn quantized_actions<T: Real>(
    maslov: &[i64],
    n_max: u32,
    hbar: T,
) -> Result<Vec<QuantizedActions<T>>> {
    validate_maslov(maslov)?;
    positive_hbar(hbar)?;
    let n = maslov.len();
    let base = n_max as usize + 1;
    let count = base
        .checked_pow(n as u32)
        .filter(|c| *c <= 50_000_000)
        .ok_or_else(|| Error::InvalidInput("quantum-number grid too large".into()))?;
    let quarter = lit::<T>(0.25);
    let mut out = Vec::with_capacity(count);
    let mut quanta = vec![0u32; n];
    for _ in 0..count {
        let actions = quanta
            .iter()
            .zip(maslov)
            .map(|(q, m)| (lit::<T>(*q as f64) + lit::<T>(*m as f64) * quarter) * hbar)
            .collect();
        out.push(QuantizedActions {
            quanta: quanta.clone(),
            actions,
        });
        for slot in quanta.iter_mut().rev() {
            if *slot < n_max {
                *slot += 1;
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

/// `R_j = √(2 I_j)`.
pub fn torus_radii_from_actions<T: Real>(actions: &[T]) -> Result<Vec<T>> {
    actions
        .iter()
        .map(|a| {
            if *a > T::zero() && a.is_finite() {
                Ok((lit::<T>(2.0) * *a).sqrt())
            } else {
                Err(Error::InvalidInput(format!(
                    "actions must be positive, got {a}"
                )))
            }
        })
        .collect()
}

/// One quantized state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry<T: Real> {
    pub quanta: Vec<u32>,
    pub maslov: Vec<i64>,
    pub actions: Vec<T>,
    pub radii: Vec<T>,
    pub energy: T,
}

/// Semiclassical levels sorted by energy (ties keep quantum-number order).
#[derive(Debug, Clone, PartialEq)]
pub struct EbkSpectrum<T: Real> {
    pub entries: Vec<SpectrumEntry<T>>,
    pub hbar: T,
}

/// `E_N = K((N₁ + m₁/4)ħ, …, (Nₙ + mₙ/4)ħ)` over the full grid.
pub fn energy_levels<T: Real>(
    k: &dyn ActionHamiltonian<T>,
    maslov: &[i64],
    n_max: u32,
    hbar: T,
) -> Result<EbkSpectrum<T>> {
    if k.dof() != maslov.len() {
        return Err(Error::Dimension(format!(
            "K has {} actions, {} Maslov indices given",
            k.dof(),
            maslov.len()
        )));
    }
    let mut entries = quantized_actions(maslov, n_max, hbar)?
        .into_iter()
        .map(|qa| {
            let energy = k.energy(&qa.actions)?;
            let radii = torus_radii_from_actions(&qa.actions)?;
            Ok(SpectrumEntry {
                quanta: qa.quanta,
                maslov: maslov.to_vec(),
                actions: qa.actions,
                radii,
                energy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energies"));
    Ok(EbkSpectrum { entries, hbar })
}

/// `E₀ = K(ħ/2, …, ħ/2)`.
pub fn ground_bound<T: Real>(k: &dyn ActionHamiltonian<T>, hbar: T) -> Result<T> {
    positive_hbar(hbar)?;
    k.energy(&vec![hbar * lit::<T>(0.5); k.dof()])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityCondition<T: Real> {
    /// Capacity of the solid torus carried by the entry.
    pub capacity: T,
    pub satisfied: bool,
}

fn half_planck<T: Real>(hbar: T) -> T {
    T::PI() * hbar
}

/// Capacity of the entry's solid torus against `½h = πħ`.
pub fn capacity_condition<T: Real>(
    entry: &SpectrumEntry<T>,
    hbar: T,
) -> Result<CapacityCondition<T>> {
    if entry.radii.is_empty() {
        return Err(Error::InvalidInput("entry has no radii".into()));
    }
    let cap = capacity(&PhaseRegion::solid_torus(entry.radii.clone())?)?.value;
    Ok(CapacityCondition {
        capacity: cap,
        satisfied: cap >= half_planck(hbar) - tol_floor(1e-12),
    })
}

/// Margins `E_N − E₀` for a monotone `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBoundReport<T: Real> {
    pub ground_bound: T,
    pub margins: Vec<T>,
    pub min_margin: T,
    pub violations: usize,
}

/// Checks `E_N ≥ K(ħ/2, …, ħ/2)` for every entry; refuses non-monotone `K`.
pub fn verify_energy_bound<T: Real>(
    k: &dyn ActionHamiltonian<T>,
    spectrum: &EbkSpectrum<T>,
) -> Result<EnergyBoundReport<T>> {
    if !k.is_monotone() {
        return Err(Error::Hypothesis(
            "the energy bound needs every frequency ∂K/∂I_j > 0".into(),
        ));
    }
    let e0 = ground_bound(k, spectrum.hbar)?;
    let margins: Vec<T> = spectrum.entries.iter().map(|e| e.energy - e0).collect();
    let slack = tol_floor::<T>(1e-12);
    let violations = margins.iter().filter(|m| **m < -slack).count();
    let min_margin = margins
        .iter()
        .copied()
        .fold(T::max_value().unwrap(), |a, b| a.min(b));
    Ok(EnergyBoundReport {
        ground_bound: e0,
        margins,
        min_margin,
        violations,
    })
}

/// Area of the disk the torus projects to on one conjugate plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneArea<T: Real> {
    pub plane: usize,
    pub area: T,
    pub satisfied: bool,
}

/// `πR_j² ≥ ½h` on every conjugate plane.
pub fn projection_area_bound<T: Real>(
    entry: &SpectrumEntry<T>,
    hbar: T,
) -> Result<Vec<PlaneArea<T>>> {
    if entry.radii.is_empty() {
        return Err(Error::InvalidInput("entry has no radii".into()));
    }
    let bound = half_planck(hbar) - tol_floor::<T>(1e-12);
    Ok(entry
        .radii
        .iter()
        .enumerate()
        .map(|(plane, r)| {
            let area = T::PI() * *r * *r;
            PlaneArea {
                plane,
                area,
                satisfied: area >= bound,
            }
        })
        .collect())
}
