//! Forward models for the ground-state characterization measurements:
//! Zeeman-broadened Raman spectra, linewidth extraction, and
//! diffusion-limited population decay.

use crate::atomic::{FieldProfile, GroundDistribution, LevelScheme};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Histogram of two-photon resonance shifts, normalized to unit total
/// weight. Detunings are relative to the zero-field hyperfine interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanSpectrum<T: Scalar> {
    bin_centers_hz: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> RamanSpectrum<T> {
    pub fn bin_centers_hz(&self) -> &[T] {
        &self.bin_centers_hz
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Histogram of the ground-state two-photon resonance shifts
/// (g_g·m_g − g_s·m_s)·B(z) over populated (m_g → m_s) pairs with
/// m_s − m_g in the allowed set, with z sampled on a uniform deterministic
/// grid along the probed segment. Weights carry D_{m_g} and the uniform z
/// measure only; transition amplitudes are deliberately not modeled, so the
/// widths are purely inhomogeneous (power broadening adds on top when
/// comparing against measured traces).
pub fn zeeman_spectrum<T: Scalar>(
    scheme: &LevelScheme<T>,
    distribution: &GroundDistribution<T>,
    field: &FieldProfile<T>,
    probe_extent_mm: T,
    allowed_delta_m: &[i32],
    n_bins: usize,
    z_samples: usize,
) -> Result<RamanSpectrum<T>> {
    if allowed_delta_m.is_empty() {
        return Err(Error::DegenerateInput(
            "allowed Δm set must not be empty".to_string(),
        ));
    }
    if probe_extent_mm <= T::zero() || probe_extent_mm > field.length_mm {
        return Err(Error::DegenerateInput(format!(
            "probe extent {} mm must lie in (0, field length = {} mm]",
            probe_extent_mm.to_f64_lossy(),
            field.length_mm.to_f64_lossy()
        )));
    }
    if n_bins == 0 || z_samples == 0 {
        return Err(Error::DegenerateInput(
            "bin and sample counts must be positive".to_string(),
        ));
    }

    // Transition pairs (m_g, m_s) and their g_g·m_g − g_s·m_s rates in MHz/G.
    let mut pairs: Vec<(T, T)> = Vec::new(); // (rate, population weight)
    let mut total = T::zero();
    for (m_g, weight) in distribution.iter() {
        if weight <= T::zero() {
            continue;
        }
        for &dm in allowed_delta_m {
            let m_s_doubled = m_g.doubled() + 2 * dm;
            if m_s_doubled.abs() > scheme.f_s.doubled() {
                continue;
            }
            let m_s = T::of(m_s_doubled as f64 / 2.0);
            let rate = scheme.g_g_mhz_per_gauss * m_g.value::<T>()
                - scheme.g_s_mhz_per_gauss * m_s;
            pairs.push((rate, weight));
            total += weight;
        }
    }
    if pairs.is_empty() || total <= T::zero() {
        return Err(Error::DegenerateInput(
            "no populated transitions in the allowed Δm set".to_string(),
        ));
    }

    // Span of reachable shifts fixes a symmetric binning range, so widths
    // scale exactly with the field strength.
    let mega = T::of(1e6);
    let mut span = T::zero();
    for k in 0..z_samples {
        let z = ((T::of(k as f64) + T::of(0.5)) / T::of(z_samples as f64) - T::of(0.5))
            * probe_extent_mm;
        let b = field.field_gauss(z).abs();
        for &(rate, _) in &pairs {
            span = span.max((rate * b).abs() * mega);
        }
    }
    if span == T::zero() {
        // Field-free limit: every transition sits in a single zero bin.
        span = T::one();
    }
    let lo = -span * T::of(1.000001);
    let width = T::of(2.0) * span * T::of(1.000001) / T::of(n_bins as f64);

    let mut weights = vec![T::zero(); n_bins];
    let z_weight = T::one() / T::of(z_samples as f64);
    for k in 0..z_samples {
        let z = ((T::of(k as f64) + T::of(0.5)) / T::of(z_samples as f64) - T::of(0.5))
            * probe_extent_mm;
        let b = field.field_gauss(z);
        for &(rate, pop) in &pairs {
            let shift = rate * b * mega;
            let idx = ((shift - lo) / width).floor().to_f64_lossy() as usize;
            let idx = idx.min(n_bins - 1);
            weights[idx] += pop * z_weight / total;
        }
    }
    let bin_centers_hz = (0..n_bins)
        .map(|i| lo + width * (T::of(i as f64) + T::of(0.5)))
        .collect();
    Ok(RamanSpectrum {
        bin_centers_hz,
        weights,
    })
}

/// Full width at half of the maximum bin weight, in Hz.
///
/// The outermost crossings of the half level are located by linear
/// interpolation between bin centers and the single-bin discretization
/// offset is removed, so an isolated line in one bin reports zero width and
/// two equal lines at ±f report 2f.
pub fn fwhm<T: Scalar>(spectrum: &RamanSpectrum<T>) -> Result<T> {
    let w = &spectrum.weights;
    let x = &spectrum.bin_centers_hz;
    if w.is_empty() {
        return Err(Error::DegenerateInput("empty spectrum".to_string()));
    }
    let peak = w.iter().fold(T::zero(), |m, &v| m.max(v));
    if peak <= T::zero() {
        return Err(Error::DegenerateInput("all-zero spectrum".to_string()));
    }
    if w.len() == 1 {
        return Ok(T::zero());
    }
    let half = peak / T::of(2.0);
    let bin = x[1] - x[0];

    // Leftmost upward crossing of the half level.
    let first_above = w.iter().position(|&v| v >= half).expect("peak >= half");
    let left = if first_above == 0 {
        x[0]
    } else {
        let i = first_above - 1;
        let frac = (half - w[i]) / (w[i + 1] - w[i]);
        x[i] + bin * frac
    };
    // Rightmost downward crossing.
    let last_above = w.len() - 1 - w.iter().rev().position(|&v| v >= half).expect("peak");
    let right = if last_above == w.len() - 1 {
        x[w.len() - 1]
    } else {
        let i = last_above;
        let frac = (w[i] - half) / (w[i] - w[i + 1]);
        x[i] + bin * frac
    };
    Ok((right - left - bin).max(T::zero()))
}

/// Reference point for diffusion out of the excitation beam: the measured
/// decay time at a reference beam diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionModel<T: Scalar> {
    pub tau_ref_us: T,
    pub d_ref_um: T,
}

impl<T: Scalar> DiffusionModel<T> {
    pub fn new(tau_ref_us: T, d_ref_um: T) -> Result<Self> {
        if tau_ref_us <= T::zero() || d_ref_um <= T::zero() {
            return Err(Error::DegenerateInput(
                "diffusion reference values must be positive".to_string(),
            ));
        }
        Ok(Self {
            tau_ref_us,
            d_ref_um,
        })
    }

    /// Cold-atom transit reference: 900 μs at a 150 μm beam diameter.
    pub fn cold_atom_reference() -> Self {
        Self {
            tau_ref_us: T::of(900.0),
            d_ref_um: T::of(150.0),
        }
    }
}

/// Diffusion time at another beam diameter: linear scaling
/// τ = τ_ref · (d / d_ref), in μs.
pub fn diffusion_time<T: Scalar>(beam_diameter_um: T, model: &DiffusionModel<T>) -> Result<T> {
    if beam_diameter_um <= T::zero() {
        return Err(Error::DegenerateInput(
            "beam diameter must be positive".to_string(),
        ));
    }
    Ok(model.tau_ref_us * beam_diameter_um / model.d_ref_um)
}

/// Exponential population decay exp(−t/τ).
pub fn decay_curve<T: Scalar>(t_us: T, tau_us: T) -> T {
    (-t_us / tau_us).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angmom::HalfInt;
    use crate::atomic::FieldKind;
    use approx::assert_abs_diff_eq;

    fn cs() -> LevelScheme<f64> {
        LevelScheme::cesium()
    }

    fn unpolarized() -> GroundDistribution<f64> {
        GroundDistribution::unpolarized(HalfInt::from_int(4))
    }

    fn gradient(b: f64, l: f64) -> FieldProfile<f64> {
        FieldProfile::new(
            l,
            FieldKind::LinearGradient {
                gradient_g_per_cm: b,
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_field_collapses_to_single_bin() {
        let f = gradient(0.0, 12.0);
        let s = zeeman_spectrum(&cs(), &unpolarized(), &f, 12.0, &[0, 1, -1], 51, 501).unwrap();
        let nonzero: Vec<_> = s
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_abs_diff_eq!(*nonzero[0].1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fwhm(&s).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_bias_lines_at_expected_shifts() {
        let b0 = 0.5;
        let f = FieldProfile::new(5.0, FieldKind::UniformBias { bias_gauss: b0 }).unwrap();
        let s = zeeman_spectrum(&cs(), &unpolarized(), &f, 5.0, &[0], 201, 11).unwrap();
        // Lines at (g_g − g_s)·m·B0 = 0.7·m·B0 MHz for m = −3..3; the m = 0
        // clock line sits exactly at zero detuning.
        let expected: Vec<f64> = (-3..=3).map(|m| 0.7e6 * m as f64 * b0).collect();
        let nonzero: Vec<f64> = s
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| s.bin_centers_hz()[i])
            .collect();
        assert_eq!(nonzero.len(), expected.len());
        let bin = s.bin_centers_hz()[1] - s.bin_centers_hz()[0];
        for (got, want) in nonzero.iter().zip(&expected) {
            assert!((got - want).abs() <= bin / 2.0 + 1e-6);
        }
        // Clock-pair weight occupies the central bin regardless of bias.
        let center = s.weights().len() / 2;
        assert!(s.weights()[center] > 0.0);
        assert_abs_diff_eq!(s.bin_centers_hz()[center], 0.0, epsilon = 1.0);
    }

    #[test]
    fn clock_weight_stays_in_zero_bin_under_gradient() {
        let f = gradient(8.7, 12.0);
        let s = zeeman_spectrum(&cs(), &unpolarized(), &f, 12.0, &[0], 101, 801).unwrap();
        let center = s.weights().len() / 2;
        // (0,0) carries 1/7 of the Δm = 0 weight and never moves.
        assert!(s.weights()[center] >= 1.0 / 7.0 - 1e-9);
    }

    #[test]
    fn symmetric_distribution_gives_symmetric_spectrum() {
        let f = gradient(8.7, 12.0);
        let s = zeeman_spectrum(&cs(), &unpolarized(), &f, 12.0, &[0, 1, -1], 101, 800).unwrap();
        let w = s.weights();
        let n = w.len();
        for i in 0..n / 2 {
            assert_abs_diff_eq!(w[i], w[n - 1 - i], epsilon = 1e-12);
        }
        let total: f64 = w.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fwhm_scales_linearly_with_gradient() {
        let widths: Vec<f64> = [1.0, 2.0, 4.0, 8.7]
            .iter()
            .map(|&b| {
                let f = gradient(b, 12.0);
                let s =
                    zeeman_spectrum(&cs(), &unpolarized(), &f, 12.0, &[0, 1, -1], 31, 800)
                        .unwrap();
                fwhm(&s).unwrap()
            })
            .collect();
        // Least-squares line through the origin; R² against it.
        let bs = [1.0, 2.0, 4.0, 8.7];
        let slope: f64 = bs.iter().zip(&widths).map(|(b, w)| b * w).sum::<f64>()
            / bs.iter().map(|b| b * b).sum::<f64>();
        let mean = widths.iter().sum::<f64>() / widths.len() as f64;
        let ss_res: f64 = bs
            .iter()
            .zip(&widths)
            .map(|(b, w)| (w - slope * b).powi(2))
            .sum();
        let ss_tot: f64 = widths.iter().map(|w| (w - mean).powi(2)).sum();
        let r2 = 1.0 - ss_res / ss_tot;
        assert!(r2 >= 0.999, "R² = {r2}");
    }

    #[test]
    fn fwhm_of_discretized_gaussian() {
        let sigma = 2.0e6;
        let n = 401;
        let centers: Vec<f64> = (0..n)
            .map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) * 4.0e4)
            .collect();
        let mut weights: Vec<f64> = centers
            .iter()
            .map(|x| (-x * x / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let s = RamanSpectrum {
            bin_centers_hz: centers,
            weights,
        };
        let got = fwhm(&s).unwrap();
        let want = 2.3548 * sigma;
        assert!((got - want).abs() < 5e4, "got {got}, want {want}");
    }

    #[test]
    fn fwhm_of_two_equal_lines() {
        let n = 41;
        let centers: Vec<f64> = (0..n).map(|i| (i as f64 - 20.0) * 1e5).collect();
        let mut weights = vec![0.0; n];
        weights[10] = 0.5; // −1 MHz
        weights[30] = 0.5; // +1 MHz
        let s = RamanSpectrum {
            bin_centers_hz: centers,
            weights,
        };
        let got = fwhm(&s).unwrap();
        assert!((got - 2e6).abs() <= 1e5, "got {got}");
    }

    #[test]
    fn diffusion_examples_exact() {
        let m = DiffusionModel::cold_atom_reference();
        assert_eq!(diffusion_time(150.0, &m).unwrap(), 900.0);
        assert_eq!(diffusion_time(60.0, &m).unwrap(), 360.0);
        assert_abs_diff_eq!(
            decay_curve(900.0, 900.0_f64),
            (-1.0_f64).exp(),
            epsilon = 1e-15
        );
        assert!(diffusion_time(0.0, &m).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = gradient(8.7, 3.6);
        assert!(zeeman_spectrum(&cs(), &unpolarized(), &f, 5.0, &[0], 11, 11).is_err());
        assert!(zeeman_spectrum(&cs(), &unpolarized(), &f, 3.6, &[], 11, 11).is_err());
        let empty = RamanSpectrum::<f64> {
            bin_centers_hz: vec![],
            weights: vec![],
        };
        assert!(fwhm(&empty).is_err());
    }
}
