//! Linear symplectic geometry on `ℝ²ⁿ`: symplectic matrices and quadratic
//! flows, Williamson normal forms, capacities of simple phase-space regions,
//! shadow areas, Maslov indices of Lagrangian loops, and EBK quantization.
//!
//! Points are ordered `(x₁..xₙ, p₁..pₙ)` and `σ(z, z′) = p·x′ − p′·x`.
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ebk;
pub mod error;
pub mod io;
pub mod linalg;
pub mod maslov;
pub mod regions;
pub mod scalar;
pub mod selftest;
pub mod squeeze;
pub mod symcore;
pub mod williamson;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PhasePoint64 = symcore::PhasePoint<f64>;
pub type SymplecticMatrix64 = symcore::SymplecticMatrix<f64>;
pub type QuadraticHamiltonian64 = symcore::QuadraticHamiltonian<f64>;
pub type PhaseRegion64 = regions::PhaseRegion<f64>;
pub type SymplecticSpectrum64 = williamson::SymplecticSpectrum<f64>;
pub type LagrangianFrame64 = maslov::LagrangianFrame<f64>;
pub type LagrangianLoop64 = maslov::LagrangianLoop<f64>;
pub type EbkSpectrum64 = ebk::EbkSpectrum<f64>;
