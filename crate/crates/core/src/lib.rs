//! Numerical toolkit for the infrared behaviour of the effective electromagnetic
//! field of a localized electron inside a photon heat bath.
//!
//! The crate is organised around two infrared regularizations of the real-time
//! (Schwinger–Keldysh) perturbation theory:
//!
//! * the pole-shift scheme, `m² − k² − iε`, in which the heat bath generates a
//!   thermal regulator `E ~ αmT` fixed self-consistently ([`oneloop`]), and the
//!   one-loop Coulomb field of the charge cancels against the vertex and
//!   self-energy contributions;
//! * the cutoff-plus-smearing scheme, `λ₀` with Gaussian vertex smearing `Δ_λ`,
//!   in which soft-photon contributions factorize, exponentiate and suppress
//!   the field ([`resum`]).
//!
//! Supporting layers: exact complex Dirac algebra ([`diracalg`]), the free
//! real-time propagator components ([`props`]), adaptive radial + angular
//! quadrature ([`quad`]), position-space field synthesis ([`field`]) and
//! momentum-space Ward-identity checks ([`ward`]).
//!
//! Everything is expressed in electron-mass units, `m = 1`.

pub mod diracalg;
pub mod exec;
pub mod field;
pub mod oneloop;
pub mod params;
pub mod props;
pub mod quad;
pub mod resum;
pub mod verify;
pub mod ward;

pub use params::{SchemeTag, ThermalParams};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
