//! Simulation of collective photon-pair generation from a cold atomic
//! ensemble in an inhomogeneous magnetic field.
//!
//! The crate models the write → field-1 → read → field-2 Raman cycle through
//! the Zeeman manifolds of a four-level scheme, the dephasing of the stored
//! collective excitation under a field gradient, the resulting two-photon
//! wavepackets and joint detection probabilities, and the photon-number
//! correlation diagnostics (`g11`, `g22`, `g12`, Cauchy–Schwarz ratio `R`)
//! used to certify nonclassicality. Supporting forward models for
//! ground-state Raman spectroscopy and diffusion decay are included.
//!
//! All numerical code is generic over the scalar type through [`Scalar`];
//! angular-momentum coefficients are evaluated in exact big-rational
//! arithmetic and rounded once at the boundary.

pub mod amplitude;
pub mod angmom;
pub mod atomic;
pub mod error;
pub mod photon;
pub mod pulse;
pub mod raman;
pub mod scalar;

pub use error::Error;
pub use scalar::Scalar;

/// Default concrete scalar used by the CLI and most downstream code.
pub type Real = f64;
/// Complex number over the default scalar.
pub type C64 = num_complex::Complex<Real>;

pub type Pulse64 = pulse::Pulse<Real>;
pub type Timeline64 = pulse::Timeline<Real>;
pub type LevelScheme64 = atomic::LevelScheme<Real>;
pub type GroundDistribution64 = atomic::GroundDistribution<Real>;
pub type Polarization64 = angmom::SphericalPolarization<Real>;
