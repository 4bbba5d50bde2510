//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Doubled angular momentum with mismatched parity or |m| > j.
    #[error("invalid angular momentum: two_j={two_j}, two_m={two_m}")]
    InvalidAngMom { two_j: i32, two_m: i32 },

    /// Polarization vector not normalized on the spherical basis.
    #[error("polarization norm² = {norm_sq}, expected 1 within 1e-12")]
    PolarizationNorm { norm_sq: f64 },

    /// Level scheme violating dipole selection rules between manifolds.
    #[error("level scheme not dipole-connected: {0}")]
    SchemeNotConnected(String),

    /// Ground-state populations that are negative or do not sum to one.
    #[error("invalid ground distribution: {0}")]
    InvalidDistribution(String),

    /// Pulse or timeline parameter out of range.
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    /// Closed-form amplitude requested outside its validity regime.
    /// The nested-quadrature backend remains available for these inputs.
    #[error(
        "unsupported regime for the closed-form amplitude: {0}; \
         use the numeric backend instead"
    )]
    UnsupportedRegime(String),

    /// Pulse shape a backend cannot evaluate.
    #[error("unsupported pulse shape: {0}")]
    UnsupportedShape(String),

    /// Quadrature grid that does not resolve the integrand.
    #[error("quadrature grid invalid: {0}")]
    InvalidGrid(String),

    /// Photon-statistics parameter out of range.
    #[error("invalid photon statistics parameter: {0}")]
    InvalidStatistics(String),

    /// Spectrum or fit input that is empty or degenerate.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
