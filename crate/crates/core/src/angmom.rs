//! Exact angular-momentum coupling coefficients and spherical-basis dipole
//! couplings.
//!
//! Angular momenta are carried as doubled integers so half-integer electronic
//! states never need floating `j` values. Wigner 3-j symbols and
//! Clebsch–Gordan coefficients are evaluated with exact big-rational
//! arithmetic (the alternating factorial sum never touches floating point)
//! and rounded once on output, which keeps large-`j` values free of
//! catastrophic cancellation.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A doubled angular-momentum quantum number (`two = 2j` or `2m`), so that
/// half-integer values stay on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt {
    two: i32,
}

impl HalfInt {
    /// Value from its doubled representation.
    pub const fn from_doubled(two: i32) -> Self {
        Self { two }
    }

    /// Integer quantum number.
    pub const fn from_int(v: i32) -> Self {
        Self { two: 2 * v }
    }

    pub const fn doubled(self) -> i32 {
        self.two
    }

    pub fn value<T: Scalar>(self) -> T {
        T::of(self.two as f64 / 2.0)
    }

    pub const fn is_half_odd(self) -> bool {
        self.two % 2 != 0
    }

    /// Projections −j, −j+1, …, +j of a manifold with this `j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let two_j = self.two;
        (-two_j..=two_j)
            .step_by(2)
            .map(HalfInt::from_doubled)
    }
}

/// An angular momentum `j` together with a projection `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngMom {
    two_j: i32,
    two_m: i32,
}

impl AngMom {
    /// Validated constructor from doubled values: requires `two_j ≥ 0`,
    /// `|two_m| ≤ two_j`, and matching parity.
    pub fn new(two_j: i32, two_m: i32) -> Result<Self> {
        if two_j < 0 || two_m.abs() > two_j || (two_j - two_m) % 2 != 0 {
            return Err(Error::InvalidAngMom { two_j, two_m });
        }
        Ok(Self { two_j, two_m })
    }

    /// Integer-valued `(j, m)`.
    pub fn from_ints(j: i32, m: i32) -> Result<Self> {
        Self::new(2 * j, 2 * m)
    }

    pub const fn two_j(self) -> i32 {
        self.two_j
    }

    pub const fn two_m(self) -> i32 {
        self.two_m
    }

    pub const fn j(self) -> HalfInt {
        HalfInt::from_doubled(self.two_j)
    }

    pub const fn m(self) -> HalfInt {
        HalfInt::from_doubled(self.two_m)
    }
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= k;
    }
    acc
}

fn triangle_ok(two_j1: i32, two_j2: i32, two_j3: i32) -> bool {
    two_j3 <= two_j1 + two_j2
        && two_j1 <= two_j2 + two_j3
        && two_j2 <= two_j3 + two_j1
        && (two_j1 + two_j2 + two_j3) % 2 == 0
}

/// Sign of (−1)^k for a possibly negative integer exponent.
fn parity_sign(k: i32) -> i32 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Exact squared magnitude and sign of a Wigner 3-j symbol.
///
/// Returns `(sign, value²)` with `value = sign · sqrt(value²)`; the square is
/// an exact rational, so the only rounding happens in the final square root.
fn wigner_3j_exact(
    two_j1: i32,
    two_j2: i32,
    two_j3: i32,
    two_m1: i32,
    two_m2: i32,
    two_m3: i32,
) -> (i32, BigRational) {
    if !triangle_ok(two_j1, two_j2, two_j3) || two_m1 + two_m2 + two_m3 != 0 {
        return (0, BigRational::zero());
    }

    // All of these are genuine integers once the selection rules hold.
    let a1 = (two_j1 + two_j2 - two_j3) / 2;
    let a2 = (two_j1 - two_j2 + two_j3) / 2;
    let a3 = (-two_j1 + two_j2 + two_j3) / 2;
    let j1m = (two_j1 - two_m1) / 2;
    let j1p = (two_j1 + two_m1) / 2;
    let j2m = (two_j2 - two_m2) / 2;
    let j2p = (two_j2 + two_m2) / 2;
    let j3m = (two_j3 - two_m3) / 2;
    let j3p = (two_j3 + two_m3) / 2;

    // Alternating Racah sum, exact.
    let k_lo = 0
        .max((two_j2 - two_j3 - two_m1) / 2)
        .max((two_j1 - two_j3 + two_m2) / 2);
    let k_hi = a1.min(j1m).min(j2p);
    if k_lo > k_hi {
        return (0, BigRational::zero());
    }
    let mut series = BigRational::zero();
    for k in k_lo..=k_hi {
        let den = factorial(k)
            * factorial(a1 - k)
            * factorial(j1m - k)
            * factorial(j2p - k)
            * factorial((two_j3 - two_j2 + two_m1) / 2 + k)
            * factorial((two_j3 - two_j1 - two_m2) / 2 + k);
        let term = BigRational::new(BigInt::from(parity_sign(k)), den);
        series += term;
    }
    if series.is_zero() {
        return (0, BigRational::zero());
    }

    let triangle = BigRational::new(
        factorial(a1) * factorial(a2) * factorial(a3),
        factorial((two_j1 + two_j2 + two_j3) / 2 + 1),
    );
    let weight = BigRational::from_integer(
        factorial(j1m) * factorial(j1p) * factorial(j2m) * factorial(j2p) * factorial(j3m)
            * factorial(j3p),
    );

    let value_sq = triangle * weight * series.clone() * series.clone();
    let phase = parity_sign((two_j1 - two_j2 - two_m3) / 2);
    let sign = phase * if series.is_positive() { 1 } else { -1 };
    (sign, value_sq)
}

/// Wigner 3-j symbol. Combinations failing the triangle rule or the
/// projection rule `m1 + m2 + m3 = 0` return 0 by convention.
pub fn wigner_3j<T: Scalar>(a: AngMom, b: AngMom, c: AngMom) -> T {
    let (sign, value_sq) = wigner_3j_exact(
        a.two_j(),
        b.two_j(),
        c.two_j(),
        a.two_m(),
        b.two_m(),
        c.two_m(),
    );
    if sign == 0 {
        return T::zero();
    }
    let magnitude = value_sq.to_f64().expect("3j square fits in f64").sqrt();
    T::of(sign as f64 * magnitude)
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ in the Condon–Shortley
/// convention. Returns 0 when `M ≠ m1 + m2` or the triangle rule fails.
pub fn clebsch_gordan<T: Scalar>(j1m1: AngMom, j2m2: AngMom, jm: AngMom) -> T {
    if j1m1.two_m() + j2m2.two_m() != jm.two_m() {
        return T::zero();
    }
    let (sign, value_sq) = wigner_3j_exact(
        j1m1.two_j(),
        j2m2.two_j(),
        jm.two_j(),
        j1m1.two_m(),
        j2m2.two_m(),
        -jm.two_m(),
    );
    if sign == 0 {
        return T::zero();
    }
    // ⟨j1 m1; j2 m2|J M⟩ = (−1)^(j1−j2+M) √(2J+1) · 3j(j1 j2 J; m1 m2 −M)
    let phase = parity_sign((j1m1.two_j() - j2m2.two_j() + jm.two_m()) / 2);
    let weight = BigRational::from_integer(BigInt::from(jm.two_j() + 1));
    let magnitude = (value_sq * weight).to_f64().expect("cg square fits in f64").sqrt();
    T::of((phase * sign) as f64 * magnitude)
}

/// Complex amplitudes on the spherical basis (q = −1, 0, +1), normalized to
/// unit total intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPolarization<T: Scalar> {
    c_minus: Complex<T>,
    c_zero: Complex<T>,
    c_plus: Complex<T>,
}

impl<T: Scalar> SphericalPolarization<T> {
    /// Validated constructor: |c₋|² + |c₀|² + |c₊|² must equal 1 within 1e-12.
    pub fn new(c_minus: Complex<T>, c_zero: Complex<T>, c_plus: Complex<T>) -> Result<Self> {
        let norm_sq = c_minus.norm_sqr() + c_zero.norm_sqr() + c_plus.norm_sqr();
        if (norm_sq - T::one()).abs() > T::of(1e-12) {
            return Err(Error::PolarizationNorm {
                norm_sq: norm_sq.to_f64_lossy(),
            });
        }
        Ok(Self {
            c_minus,
            c_zero,
            c_plus,
        })
    }

    /// σ⁺ light: the q = +1 unit vector.
    pub fn sigma_plus() -> Self {
        Self {
            c_minus: Complex::new(T::zero(), T::zero()),
            c_zero: Complex::new(T::zero(), T::zero()),
            c_plus: Complex::new(T::one(), T::zero()),
        }
    }

    /// σ⁻ light: the q = −1 unit vector.
    pub fn sigma_minus() -> Self {
        Self {
            c_minus: Complex::new(T::one(), T::zero()),
            c_zero: Complex::new(T::zero(), T::zero()),
            c_plus: Complex::new(T::zero(), T::zero()),
        }
    }

    /// π light: linear along the quantization axis.
    pub fn pi() -> Self {
        Self {
            c_minus: Complex::new(T::zero(), T::zero()),
            c_zero: Complex::new(T::one(), T::zero()),
            c_plus: Complex::new(T::zero(), T::zero()),
        }
    }

    /// Linear polarization along x: (ê₋ − ê₊)/√2.
    pub fn linear_x() -> Self {
        let r = T::of(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            c_minus: Complex::new(r, T::zero()),
            c_zero: Complex::new(T::zero(), T::zero()),
            c_plus: Complex::new(-r, T::zero()),
        }
    }

    /// Linear polarization along y: i(ê₋ + ê₊)/√2.
    pub fn linear_y() -> Self {
        let r = T::of(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            c_minus: Complex::new(T::zero(), r),
            c_zero: Complex::new(T::zero(), T::zero()),
            c_plus: Complex::new(T::zero(), r),
        }
    }

    /// Amplitude on spherical component `q ∈ {−1, 0, +1}`.
    pub fn component(&self, q: i32) -> Complex<T> {
        match q {
            -1 => self.c_minus,
            0 => self.c_zero,
            1 => self.c_plus,
            _ => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Component-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            c_minus: self.c_minus.conj(),
            c_zero: self.c_zero.conj(),
            c_plus: self.c_plus.conj(),
        }
    }
}

/// Dipole coupling amplitude between `|F_lo m_lo⟩` and `|F_hi m_hi⟩` driven
/// by light of the given polarization:
///
/// Σ_q pol_q · ⟨F_lo m_lo; 1 q | F_hi m_hi⟩
///
/// with the reduced matrix element normalized to 1 (the absolute scale lives
/// in the overall fit constant). Projections outside their manifolds and
/// dipole-forbidden combinations contribute 0 through the selection rules.
pub fn dipole_coupling<T: Scalar>(
    f_lo: HalfInt,
    m_lo: HalfInt,
    f_hi: HalfInt,
    m_hi: HalfInt,
    pol: &SphericalPolarization<T>,
) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    if m_lo.doubled().abs() > f_lo.doubled() || m_hi.doubled().abs() > f_hi.doubled() {
        return acc;
    }
    let lo = AngMom::new(f_lo.doubled(), m_lo.doubled()).expect("validated above");
    let hi = AngMom::new(f_hi.doubled(), m_hi.doubled()).expect("validated above");
    for q in [-1, 0, 1] {
        let pol_q = pol.component(q);
        if pol_q.norm_sqr() == T::zero() {
            continue;
        }
        let photon = AngMom::from_ints(1, q).expect("unit angular momentum");
        let cg: T = clebsch_gordan(lo, photon, hi);
        acc += pol_q * cg;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    /// Independent oracle: straightforward Racah sum for the Clebsch–Gordan
    /// coefficient in exact rationals, written directly from the textbook
    /// formula with no code shared with the implementation.
    fn cg_oracle(
        j1: f64,
        m1: f64,
        j2: f64,
        m2: f64,
        j: f64,
        m: f64,
    ) -> f64 {
        let fact = |n: f64| -> BigRational {
            assert!(n >= 0.0 && n.fract() == 0.0);
            let mut acc = BigInt::one();
            for k in 2..=(n as u64) {
                acc *= k;
            }
            BigRational::from_integer(acc)
        };
        if m1 + m2 != m
            || j > j1 + j2
            || j < (j1 - j2).abs()
            || m.abs() > j
            || m1.abs() > j1
            || m2.abs() > j2
        {
            return 0.0;
        }
        let prefac_sq = fact(j + j1 - j2) * fact(j - j1 + j2) * fact(j1 + j2 - j)
            / fact(j1 + j2 + j + 1.0)
            * BigRational::from_integer(BigInt::from((2.0 * j + 1.0) as i64))
            * fact(j + m)
            * fact(j - m)
            * fact(j1 - m1)
            * fact(j1 + m1)
            * fact(j2 - m2)
            * fact(j2 + m2);
        let mut series = BigRational::zero();
        let mut k = 0.0;
        loop {
            let t1 = j1 + j2 - j - k;
            let t2 = j1 - m1 - k;
            let t3 = j2 + m2 - k;
            let t4 = j - j2 + m1 + k;
            let t5 = j - j1 - m2 + k;
            if t1 < 0.0 || t2 < 0.0 || t3 < 0.0 {
                break;
            }
            if t4 >= 0.0 && t5 >= 0.0 {
                let den = fact(k) * fact(t1) * fact(t2) * fact(t3) * fact(t4) * fact(t5);
                let sign = if (k as i64) % 2 == 0 {
                    BigInt::one()
                } else {
                    -BigInt::one()
                };
                series += BigRational::new(sign, den.to_integer());
            }
            k += 1.0;
        }
        let sign = if series.is_positive() {
            1.0
        } else if series.is_negative() {
            -1.0
        } else {
            return 0.0;
        };
        let sq = prefac_sq * series.clone() * series;
        sign * sq.to_f64().unwrap().sqrt()
    }

    fn cs_levels() -> (HalfInt, HalfInt) {
        (HalfInt::from_int(4), HalfInt::from_int(3))
    }

    #[test]
    fn angmom_validation() {
        assert!(AngMom::new(2, 4).is_err());
        assert!(AngMom::new(2, 1).is_err()); // parity mismatch
        assert!(AngMom::new(-2, 0).is_err());
        assert!(AngMom::new(3, -1).is_ok()); // j = 3/2, m = −1/2
    }

    #[test]
    fn wigner_3j_frozen_values() {
        let am = |j: i32, m: i32| AngMom::from_ints(j, m).unwrap();
        // Empty coupling.
        assert_eq!(wigner_3j::<f64>(am(0, 0), am(0, 0), am(0, 0)), 1.0);
        // Triangle violation.
        for m in -1..=1 {
            assert_eq!(wigner_3j::<f64>(am(1, m), am(1, -m), am(3, 0)), 0.0);
        }
        // Oracle-frozen value: (1 1 0; 0 0 0) = −1/√3.
        assert_abs_diff_eq!(
            wigner_3j::<f64>(am(1, 0), am(1, 0), am(0, 0)),
            -0.577_350_269_189_625_7,
            epsilon = 1e-15
        );
        // Projection rule.
        assert_eq!(wigner_3j::<f64>(am(2, 1), am(2, 0), am(2, 0)), 0.0);
    }

    #[test]
    fn clebsch_gordan_frozen_values() {
        let am = |j: i32, m: i32| AngMom::from_ints(j, m).unwrap();
        // Odd j1 + j2 + J with all projections zero.
        assert_eq!(
            clebsch_gordan::<f64>(am(4, 0), am(1, 0), am(4, 0)),
            0.0
        );
        // Oracle-frozen: ⟨1 1; 1 −1 | 0 0⟩ = 1/√3.
        assert_abs_diff_eq!(
            clebsch_gordan::<f64>(am(1, 1), am(1, -1), am(0, 0)),
            0.577_350_269_189_625_7,
            epsilon = 1e-15
        );
        // Projection selection rule.
        assert_eq!(
            clebsch_gordan::<f64>(am(2, 1), am(1, 1), am(3, 1)),
            0.0
        );
    }

    #[test]
    fn agrees_with_racah_oracle_over_a_grid() {
        // Includes half-integer entries; the oracle recomputes every value
        // independently in exact rationals.
        let cases = [
            (1.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            (1.0, 1.0, 1.0, -1.0, 2.0, 0.0),
            (2.0, 2.0, 1.0, -1.0, 3.0, 1.0),
            (4.0, 0.0, 1.0, 1.0, 4.0, 1.0),
            (4.0, -3.0, 1.0, 1.0, 3.0, -2.0),
            (3.0, 2.0, 1.0, 0.0, 4.0, 2.0),
            (0.5, 0.5, 0.5, -0.5, 1.0, 0.0),
            (0.5, 0.5, 0.5, -0.5, 0.0, 0.0),
            (2.5, 1.5, 2.0, 1.0, 2.5, 2.5),
            (2.5, 1.5, 1.5, 0.5, 3.0, 2.0),
            (4.0, 4.0, 1.0, -1.0, 4.0, 3.0),
            (3.0, -3.0, 1.0, -1.0, 4.0, -4.0),
        ];
        for &(j1, m1, j2, m2, j, m) in &cases {
            let a = AngMom::new((2.0 * j1) as i32, (2.0 * m1) as i32).unwrap();
            let b = AngMom::new((2.0 * j2) as i32, (2.0 * m2) as i32).unwrap();
            let c = AngMom::new((2.0 * j) as i32, (2.0 * m) as i32).unwrap();
            let got: f64 = clebsch_gordan(a, b, c);
            let want = cg_oracle(j1, m1, j2, m2, j, m);
            assert_abs_diff_eq!(got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn cg_orthogonality_small() {
        // Full exhaustive run lives in the acceptance suite; spot-check here.
        for two_j1 in [1, 2, 4] {
            for two_j2 in [1, 2] {
                for two_jj in ((two_j1 - two_j2).abs()..=(two_j1 + two_j2)).step_by(2) {
                    let two_m = if two_jj >= 1 { two_jj % 2 } else { 0 };
                    let mut acc = 0.0_f64;
                    for two_m1 in (-two_j1..=two_j1).step_by(2) {
                        let two_m2 = two_m - two_m1;
                        if two_m2.abs() > two_j2 {
                            continue;
                        }
                        let c: f64 = clebsch_gordan(
                            AngMom::new(two_j1, two_m1).unwrap(),
                            AngMom::new(two_j2, two_m2).unwrap(),
                            AngMom::new(two_jj, two_m).unwrap(),
                        );
                        acc += c * c;
                    }
                    assert_abs_diff_eq!(acc, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn polarization_norms_and_conjugation() {
        let pols: [SphericalPolarization<f64>; 5] = [
            SphericalPolarization::sigma_plus(),
            SphericalPolarization::sigma_minus(),
            SphericalPolarization::pi(),
            SphericalPolarization::linear_x(),
            SphericalPolarization::linear_y(),
        ];
        for p in pols {
            let n = p.component(-1).norm_sqr() + p.component(0).norm_sqr()
                + p.component(1).norm_sqr();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-15);
            let c = p.conj();
            assert_eq!(c.component(1), p.component(1).conj());
        }
        let bad = SphericalPolarization::new(
            num_complex::Complex::new(1.0, 0.0),
            num_complex::Complex::new(1.0, 0.0),
            num_complex::Complex::new(0.0, 0.0),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn dipole_coupling_selection_rules() {
        let (f4, _f3) = cs_levels();
        let sp = SphericalPolarization::<f64>::sigma_plus();
        // m_hi exceeds F_hi: zero by selection rule.
        let v = dipole_coupling(f4, HalfInt::from_int(4), f4, HalfInt::from_int(5), &sp);
        assert_eq!(v.norm_sqr(), 0.0);
        // π-polarized (4,0) → (4,0): parity zero of ⟨4 0; 1 0 | 4 0⟩.
        let v = dipole_coupling(
            f4,
            HalfInt::from_int(0),
            f4,
            HalfInt::from_int(0),
            &SphericalPolarization::<f64>::pi(),
        );
        assert_eq!(v.norm_sqr(), 0.0);
        // σ⁺ (4,0) → (4,1) equals the CG value, checked against the oracle.
        let v = dipole_coupling(f4, HalfInt::from_int(0), f4, HalfInt::from_int(1), &sp);
        let want = cg_oracle(4.0, 0.0, 1.0, 1.0, 4.0, 1.0);
        assert_abs_diff_eq!(v.re, want, epsilon = 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn dipole_sum_rule_independent_of_m_lo() {
        // Σ_{m_hi, q} |⟨F_lo m_lo; 1 q|F_hi m_hi⟩|² over the dipole-allowed
        // F_hi is the same for every m_lo.
        let f_lo = HalfInt::from_int(3);
        let mut reference = None;
        for m_lo in f_lo.projections() {
            let mut total = 0.0_f64;
            for df in [-1, 0, 1] {
                let f_hi = HalfInt::from_doubled(f_lo.doubled() + 2 * df);
                if f_hi.doubled() < 0 {
                    continue;
                }
                for q in [-1, 0, 1] {
                    let m_hi = HalfInt::from_doubled(m_lo.doubled() + 2 * q);
                    if m_hi.doubled().abs() > f_hi.doubled() {
                        continue;
                    }
                    let cg: f64 = clebsch_gordan(
                        AngMom::new(f_lo.doubled(), m_lo.doubled()).unwrap(),
                        AngMom::from_ints(1, q).unwrap(),
                        AngMom::new(f_hi.doubled(), m_hi.doubled()).unwrap(),
                    );
                    total += cg * cg;
                }
            }
            match reference {
                None => reference = Some(total),
                Some(r) => assert_abs_diff_eq!(total, r, epsilon = 1e-12),
            }
        }
    }

    #[test]
    fn generic_scalar_instantiation() {
        let am = |j: i32, m: i32| AngMom::from_ints(j, m).unwrap();
        let v32: f32 = wigner_3j(am(1, 0), am(1, 0), am(0, 0));
        assert!((v32 + 0.57735026).abs() < 1e-6);
    }
}
