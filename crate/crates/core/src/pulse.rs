//! Classical pulse envelopes and the write/read timeline.

use crate::angmom::SphericalPolarization;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape<T: Scalar> {
    Square,
    /// Linear rise and fall over `rise_ns`; the flat top then spans
    /// `fwhm − rise` so the width at half maximum stays at `fwhm`.
    Trapezoid { rise_ns: T },
    /// Zero-duration limit carrying the area `amplitude · fwhm` at the start
    /// instant. Only meaningful to the closed-form backends.
    Delta,
}

/// One classical pulse: envelope shape, timing, carrier detuning (rad/s), and
/// polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse<T: Scalar> {
    pub shape: PulseShape<T>,
    pub start_ns: T,
    pub fwhm_ns: T,
    pub detuning_rad_per_s: T,
    pub amplitude: T,
    pub polarization: SphericalPolarization<T>,
}

impl<T: Scalar> Pulse<T> {
    pub fn new(
        shape: PulseShape<T>,
        start_ns: T,
        fwhm_ns: T,
        detuning_rad_per_s: T,
        amplitude: T,
        polarization: SphericalPolarization<T>,
    ) -> Result<Self> {
        if fwhm_ns <= T::zero() {
            return Err(Error::InvalidPulse(format!(
                "fwhm must be positive, got {fwhm_ns}"
            )));
        }
        if let PulseShape::Trapezoid { rise_ns } = shape {
            if rise_ns < T::zero() || rise_ns >= fwhm_ns {
                return Err(Error::InvalidPulse(format!(
                    "trapezoid rise {rise_ns} must satisfy 0 <= rise < fwhm = {fwhm_ns}"
                )));
            }
        }
        Ok(Self {
            shape,
            start_ns,
            fwhm_ns,
            detuning_rad_per_s,
            amplitude,
            polarization,
        })
    }

    /// End of the envelope support in ns.
    pub fn end_ns(&self) -> T {
        match self.shape {
            PulseShape::Square => self.start_ns + self.fwhm_ns,
            PulseShape::Trapezoid { rise_ns } => self.start_ns + self.fwhm_ns + rise_ns,
            PulseShape::Delta => self.start_ns,
        }
    }

    /// Integrated envelope area in amplitude·ns.
    pub fn area(&self) -> T {
        // Square, trapezoid and delta all share area = amplitude · fwhm.
        self.amplitude * self.fwhm_ns
    }

    /// Detuning in rad/ns, the unit the amplitude integrals run in.
    pub fn detuning_rad_per_ns(&self) -> T {
        self.detuning_rad_per_s * T::of(1e-9)
    }

    /// Envelope value at time `t_ns`; zero outside the support. The delta
    /// shape has no pointwise envelope and evaluates to zero everywhere.
    pub fn envelope(&self, t_ns: T) -> T {
        let u = t_ns - self.start_ns;
        match self.shape {
            PulseShape::Square => {
                if u >= T::zero() && u <= self.fwhm_ns {
                    self.amplitude
                } else {
                    T::zero()
                }
            }
            PulseShape::Trapezoid { rise_ns } => {
                let base = self.fwhm_ns + rise_ns;
                if u < T::zero() || u > base {
                    T::zero()
                } else if rise_ns == T::zero() {
                    self.amplitude
                } else if u < rise_ns {
                    self.amplitude * u / rise_ns
                } else if u <= self.fwhm_ns {
                    self.amplitude
                } else {
                    self.amplitude * (base - u) / rise_ns
                }
            }
            PulseShape::Delta => T::zero(),
        }
    }

    /// Envelope breakpoints (support edges and slope changes) in ns.
    pub fn breakpoints(&self) -> Vec<T> {
        match self.shape {
            PulseShape::Square => vec![self.start_ns, self.start_ns + self.fwhm_ns],
            PulseShape::Trapezoid { rise_ns } => vec![
                self.start_ns,
                self.start_ns + rise_ns,
                self.start_ns + self.fwhm_ns,
                self.start_ns + self.fwhm_ns + rise_ns,
            ],
            PulseShape::Delta => vec![self.start_ns],
        }
    }
}

/// Write and read pulses ordered in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timeline<T: Scalar> {
    pub write: Pulse<T>,
    pub read: Pulse<T>,
}

impl<T: Scalar> Timeline<T> {
    /// Validated constructor: the read pulse must not start before the write
    /// pulse.
    pub fn new(write: Pulse<T>, read: Pulse<T>) -> Result<Self> {
        if read.start_ns < write.start_ns {
            return Err(Error::InvalidPulse(format!(
                "read starts at {} ns before write at {} ns",
                read.start_ns, write.start_ns
            )));
        }
        Ok(Self { write, read })
    }

    /// Same pulses with the read start moved to `write.start + delta_t`.
    pub fn with_delay(&self, delta_t_ns: T) -> Result<Self> {
        let mut read = self.read;
        read.start_ns = self.write.start_ns + delta_t_ns;
        Self::new(self.write, read)
    }

    /// Write → read delay in ns.
    pub fn delta_t_ns(&self) -> T {
        self.read.start_ns - self.write.start_ns
    }

    /// Latest envelope support edge, in ns.
    pub fn end_ns(&self) -> T {
        self.write.end_ns().max(self.read.end_ns())
    }
}
