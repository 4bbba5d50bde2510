//! The concrete ensemble: level scheme, Zeeman shifts, the gradient
//! parameter, initial Zeeman populations, and enumeration of excitation
//! pathways with their complex strengths.

use num_complex::Complex;

use crate::angmom::{dipole_coupling, HalfInt, SphericalPolarization};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The four hyperfine manifolds of the write/read cycle and the signed
/// ground-state Zeeman rates μ_B g_F / h in MHz/G.
///
/// Excited-state Zeeman shifts are neglected (assumed below the natural
/// linewidth), so no rates are carried for `f_a`, `f_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme<T: Scalar> {
    pub f_g: HalfInt,
    pub f_s: HalfInt,
    pub f_a: HalfInt,
    pub f_b: HalfInt,
    pub g_g_mhz_per_gauss: T,
    pub g_s_mhz_per_gauss: T,
}

fn dipole_reachable(lo: HalfInt, hi: HalfInt) -> bool {
    let d = (lo.doubled() - hi.doubled()).abs();
    d <= 2 && !(lo.doubled() == 0 && hi.doubled() == 0)
}

impl<T: Scalar> LevelScheme<T> {
    /// Validated constructor; the excited manifolds must be dipole-reachable
    /// from both ground manifolds.
    pub fn new(
        f_g: HalfInt,
        f_s: HalfInt,
        f_a: HalfInt,
        f_b: HalfInt,
        g_g_mhz_per_gauss: T,
        g_s_mhz_per_gauss: T,
    ) -> Result<Self> {
        for (lo, hi, label) in [
            (f_g, f_a, "F_g -> F_a"),
            (f_s, f_a, "F_s -> F_a"),
            (f_s, f_b, "F_s -> F_b"),
            (f_g, f_b, "F_g -> F_b"),
        ] {
            if !dipole_reachable(lo, hi) {
                return Err(Error::SchemeNotConnected(format!(
                    "{label}: 2F = {} -> {}",
                    lo.doubled(),
                    hi.doubled()
                )));
            }
        }
        Ok(Self {
            f_g,
            f_s,
            f_a,
            f_b,
            g_g_mhz_per_gauss,
            g_s_mhz_per_gauss,
        })
    }

    /// Cesium preset: 6S₁/₂ F=4 (g) and F=3 (s), excited F′=4 manifolds for
    /// both the write and read transitions; μ_B g_g/h = −μ_B g_s/h
    /// = 0.35 MHz/G.
    pub fn cesium() -> Self {
        Self::new(
            HalfInt::from_int(4),
            HalfInt::from_int(3),
            HalfInt::from_int(4),
            HalfInt::from_int(4),
            T::of(0.35),
            T::of(-0.35),
        )
        .expect("cesium scheme is dipole-connected")
    }
}

/// Initial population of the Zeeman sublevels of `F_g`, indexed from
/// m = −F_g upward.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundDistribution<T: Scalar> {
    f: HalfInt,
    probabilities: Vec<T>,
}

impl<T: Scalar> GroundDistribution<T> {
    /// Validated constructor: probabilities ordered from m = −F to +F, all
    /// non-negative, summing to 1 within 1e-12.
    pub fn new(f: HalfInt, probabilities: Vec<T>) -> Result<Self> {
        let expected = (f.doubled() + 1) as usize;
        if probabilities.len() != expected {
            return Err(Error::InvalidDistribution(format!(
                "expected {expected} populations for 2F = {}, got {}",
                f.doubled(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| *p < T::zero()) {
            return Err(Error::InvalidDistribution(
                "negative population".to_string(),
            ));
        }
        let total = probabilities
            .iter()
            .fold(T::zero(), |acc, p| acc + *p);
        if (total - T::one()).abs() > T::of(1e-12) {
            return Err(Error::InvalidDistribution(format!(
                "populations sum to {}, expected 1",
                total
            )));
        }
        Ok(Self { f, probabilities })
    }

    /// Uniform population 1/(2F+1) on every sublevel.
    pub fn unpolarized(f: HalfInt) -> Self {
        let n = (f.doubled() + 1) as usize;
        let p = T::one() / T::of(n as f64);
        Self {
            f,
            probabilities: vec![p; n],
        }
    }

    /// All population in m = 0 (only defined for integer F).
    pub fn polarized_m0(f: HalfInt) -> Result<Self> {
        if f.is_half_odd() {
            return Err(Error::InvalidDistribution(
                "m = 0 does not exist for half-integer F".to_string(),
            ));
        }
        let n = (f.doubled() + 1) as usize;
        let mut p = vec![T::zero(); n];
        p[n / 2] = T::one();
        Ok(Self {
            f,
            probabilities: p,
        })
    }

    pub fn f(&self) -> HalfInt {
        self.f
    }

    /// Population of the sublevel with projection `m`.
    pub fn weight(&self, m: HalfInt) -> T {
        let idx = (m.doubled() + self.f.doubled()) / 2;
        if idx < 0 || idx as usize >= self.probabilities.len() {
            T::zero()
        } else {
            self.probabilities[idx as usize]
        }
    }

    /// (m, weight) pairs in ascending m order.
    pub fn iter(&self) -> impl Iterator<Item = (HalfInt, T)> + '_ {
        self.f
            .projections()
            .map(move |m| (m, self.weight(m)))
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }
}

/// Magnetic field along the quantization axis over a segment of length
/// `length_mm`, centred on z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProfile<T: Scalar> {
    pub length_mm: T,
    pub kind: FieldKind<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind<T: Scalar> {
    /// B_z = b·z with the gradient in G/cm.
    LinearGradient { gradient_g_per_cm: T },
    /// Uniform bias field in G.
    UniformBias { bias_gauss: T },
}

impl<T: Scalar> FieldProfile<T> {
    pub fn new(length_mm: T, kind: FieldKind<T>) -> Result<Self> {
        if length_mm <= T::zero() {
            return Err(Error::InvalidDistribution(format!(
                "field length must be positive, got {length_mm}"
            )));
        }
        Ok(Self { length_mm, kind })
    }

    /// Field in gauss at position `z_mm` along the axis.
    pub fn field_gauss(&self, z_mm: T) -> T {
        match self.kind {
            FieldKind::LinearGradient { gradient_g_per_cm } => {
                gradient_g_per_cm * z_mm / T::of(10.0)
            }
            FieldKind::UniformBias { bias_gauss } => bias_gauss,
        }
    }
}

/// Zeeman angular frequency μ_B g m B / ħ in rad/s for a level with rate
/// `g_mhz_per_gauss`, projection `m`, in a field of `b_gauss`.
pub fn zeeman_rate<T: Scalar>(g_mhz_per_gauss: T, m: HalfInt, b_gauss: T) -> T {
    T::of(2.0 * std::f64::consts::PI * 1e6) * g_mhz_per_gauss * m.value::<T>() * b_gauss
}

/// Gradient parameter K = μ_B g b L / h in Hz: the single frequency scale of
/// the inhomogeneous ground-state broadening over a segment of length
/// `length_mm` under a gradient of `gradient_g_per_cm`.
pub fn gradient_parameter_k<T: Scalar>(
    g_mhz_per_gauss: T,
    gradient_g_per_cm: T,
    length_mm: T,
) -> T {
    g_mhz_per_gauss * T::of(1e6) * gradient_g_per_cm * (length_mm / T::of(10.0))
}

/// The four polarizations of one write → field-1 → read → field-2 cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationSet<T: Scalar> {
    pub write: SphericalPolarization<T>,
    pub field1: SphericalPolarization<T>,
    pub read: SphericalPolarization<T>,
    pub field2: SphericalPolarization<T>,
}

impl<T: Scalar> PolarizationSet<T> {
    /// Orthogonal linear write/read with each detected field orthogonal to
    /// its classical partner (write x, field-1 y, read y, field-2 x).
    pub fn lin_perp_lin() -> Self {
        Self {
            write: SphericalPolarization::linear_x(),
            field1: SphericalPolarization::linear_y(),
            read: SphericalPolarization::linear_y(),
            field2: SphericalPolarization::linear_x(),
        }
    }

    /// σ⁺ write and field-1 detection, σ⁻ read and field-2 detection: closes
    /// only through the field-insensitive m = 0 → m = 0 route for a sample
    /// pumped to m = 0.
    pub fn sigma_clock() -> Self {
        Self {
            write: SphericalPolarization::sigma_plus(),
            field1: SphericalPolarization::sigma_plus(),
            read: SphericalPolarization::sigma_minus(),
            field2: SphericalPolarization::sigma_minus(),
        }
    }
}

/// One (m_g, m_s) excitation route: its complex strength d(m_g, m_s) and the
/// initial-state weight D_{m_g}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pathway<T: Scalar> {
    pub m_g: HalfInt,
    pub m_s: HalfInt,
    pub strength: Complex<T>,
    pub weight: T,
}

/// Strength d(m_g, m_s) of one excitation pathway: the double sum over the
/// intermediate excited projections of the four dipole couplings
///
/// Σ_{m_b} Σ_{m_a} K₂*(m_g, m_b) K_r(m_b, m_s) K₁*(m_s, m_a) K_w(m_a, m_g)
///
/// where the emitted-photon couplings enter conjugated.
pub fn pathway_strength<T: Scalar>(
    scheme: &LevelScheme<T>,
    m_g: HalfInt,
    m_s: HalfInt,
    pols: &PolarizationSet<T>,
) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for m_a in scheme.f_a.projections() {
        let k_w = dipole_coupling(scheme.f_g, m_g, scheme.f_a, m_a, &pols.write);
        if k_w.norm_sqr() == T::zero() {
            continue;
        }
        let k_1 = dipole_coupling(scheme.f_s, m_s, scheme.f_a, m_a, &pols.field1).conj();
        if k_1.norm_sqr() == T::zero() {
            continue;
        }
        for m_b in scheme.f_b.projections() {
            let k_r = dipole_coupling(scheme.f_s, m_s, scheme.f_b, m_b, &pols.read);
            if k_r.norm_sqr() == T::zero() {
                continue;
            }
            let k_2 = dipole_coupling(scheme.f_g, m_g, scheme.f_b, m_b, &pols.field2).conj();
            acc += k_2 * k_r * k_1 * k_w;
        }
    }
    acc
}

/// All pathways with nonzero strength, ordered by (m_g, m_s), carrying their
/// D_{m_g} weights. Pathways whose initial sublevel is unpopulated are kept
/// out only if the strength itself vanishes; zero-weight entries are dropped
/// as they cannot contribute.
pub fn enumerate_pathways<T: Scalar>(
    scheme: &LevelScheme<T>,
    distribution: &GroundDistribution<T>,
    pols: &PolarizationSet<T>,
) -> Vec<Pathway<T>> {
    let mut raw: Vec<Pathway<T>> = Vec::new();
    let mut max_strength = T::zero();
    for m_g in scheme.f_g.projections() {
        let weight = distribution.weight(m_g);
        for m_s in scheme.f_s.projections() {
            let strength = pathway_strength(scheme, m_g, m_s, pols);
            let mag = strength.norm_sqr();
            if mag > max_strength {
                max_strength = mag;
            }
            raw.push(Pathway {
                m_g,
                m_s,
                strength,
                weight,
            });
        }
    }
    // Relative floor keeps exact selection-rule zeros (and floating residue
    // of cancelling sums) out of the pathway list.
    let floor = max_strength * T::of(1e-24);
    raw.into_iter()
        .filter(|p| p.strength.norm_sqr() > floor && p.weight > T::zero())
        .collect()
}
