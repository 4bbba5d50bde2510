//! The dynamical core: four-step transition amplitudes, the two-photon
//! amplitude density, spatially averaged pathway sums, wavepacket grids, and
//! the joint detection probability.
//!
//! Two evaluation backends share one contract: an exact closed form for
//! square (and delta) pulses, and nested quadrature that is always valid and
//! serves as the oracle. The spatial average over the cloud runs over the
//! dimensionless coordinate s = z/L ∈ [−1/2, 1/2], either in closed sinc
//! form (delta pulses) or by Gauss–Legendre quadrature.

mod closed_form;
mod gauss;
mod numeric;

pub use closed_form::transition_amplitude_analytic;
pub use gauss::gauss_legendre;
pub use numeric::{
    transition_amplitude_numeric, two_photon_window_density_numeric, NumericAmplitude,
};

use ndarray::Array2;
use num_complex::Complex;

use crate::angmom::HalfInt;
use crate::atomic::{enumerate_pathways, GroundDistribution, LevelScheme, Pathway, PolarizationSet};
use crate::error::{Error, Result};
use crate::pulse::{PulseShape, Timeline};
use crate::scalar::{sinc, Scalar};

/// Which evaluation path computes the per-atom transition amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Closed forms: exact for square pulses, density-kernel limit for delta
    /// pulses. Errors outside its regime.
    Analytic,
    /// Nested quadrature; any pointwise envelope; slow.
    Numeric,
}

/// Quadrature knobs for the spatial average and the numeric backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions<T: Scalar> {
    /// Gauss–Legendre order of the z integral.
    pub gl_order: usize,
    /// Grid step of the nested-quadrature backend, in ns.
    pub numeric_step_ns: T,
}

impl<T: Scalar> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            gl_order: 64,
            // 2^-9 ns: divides every integer-ns breakpoint exactly and keeps
            // a 3 GHz detuning under 0.04 rad per step.
            numeric_step_ns: T::of(0.001953125),
        }
    }
}

/// Everything the pathway sum needs: the level scheme, initial populations,
/// the four polarizations, and the gradient parameter K in Hz.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleParams<'a, T: Scalar> {
    pub scheme: &'a LevelScheme<T>,
    pub distribution: &'a GroundDistribution<T>,
    pub polarizations: &'a PolarizationSet<T>,
    pub gradient_k_hz: T,
}

/// Spatial dephasing factor of one pathway for the clock-symmetric scheme
/// (g_s = −g_g): the average of the position-dependent Zeeman phase over the
/// cloud,
///
/// ∫ ds e^{i 2π K (m_g + m_s) s τ} = sinc(π K (m_g + m_s) τ)
///
/// with `tau_ns` the separation between the two emissions.
pub fn spatial_dephasing_factor<T: Scalar>(
    m_g: HalfInt,
    m_s: HalfInt,
    k_hz: T,
    tau_ns: T,
) -> T {
    let m_sum = m_g.value::<T>() + m_s.value::<T>();
    sinc(T::PI() * k_hz * m_sum * tau_ns * T::of(1e-9))
}

/// Two-photon amplitude density for a single atom (the slowly-varying
/// envelope kernel):
///
/// g(t₂, t₁) = −f_r(t₂) f_w(t₁)/(Δ_r Δ_w) · e^{i(a_g − a_s)(t₂ − t₁)}
///
/// Zero for t₂ ≤ t₁. Valid for arbitrary envelope shapes; delta pulses have
/// no pointwise envelope and evaluate to zero.
pub fn amplitude_density<T: Scalar>(
    t2_ns: T,
    t1_ns: T,
    zeeman_g_rad_per_s: T,
    zeeman_s_rad_per_s: T,
    timeline: &Timeline<T>,
) -> Complex<T> {
    if t2_ns <= t1_ns {
        return Complex::new(T::zero(), T::zero());
    }
    let env = timeline.read.envelope(t2_ns) * timeline.write.envelope(t1_ns);
    if env == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let pref = env / (timeline.read.detuning_rad_per_ns() * timeline.write.detuning_rad_per_ns());
    let omega = (zeeman_g_rad_per_s - zeeman_s_rad_per_s) * T::of(1e-9);
    -Complex::cis(omega * (t2_ns - t1_ns)) * pref
}

/// Bin edges on both axes plus the bin-averaged complex amplitude grid.
pub type AmplitudeGrid<T> = (Vec<T>, Vec<T>, Array2<Complex<T>>);

/// Binned two-photon wavepacket: the joint density averaged over each
/// (t₁, t₂) bin, with the lower triangle (t₂ ≤ t₁) zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketGrid<T: Scalar> {
    pub t1_edges_ns: Vec<T>,
    pub t2_edges_ns: Vec<T>,
    /// values[[i1, i2]] is the bin average over
    /// [t1_edges[i1], t1_edges[i1+1]] × [t2_edges[i2], t2_edges[i2+1]].
    pub values: Array2<T>,
}

/// The spatially averaged pathway sum, built once and evaluated many times.
#[derive(Debug, Clone)]
pub struct PathwaySum<T: Scalar> {
    paths: Vec<Pathway<T>>,
    /// Effective magnetic quantum number m_g − (g_s/g_g) m_s per pathway;
    /// equals m_g + m_s for clock-symmetric schemes.
    m_eff: Vec<T>,
    k_hz: T,
    /// g_s/g_g, used to split K into the two ground-state Zeeman rates.
    ratio: T,
}

impl<T: Scalar> PathwaySum<T> {
    pub fn new(params: &EnsembleParams<'_, T>) -> Result<Self> {
        let g_g = params.scheme.g_g_mhz_per_gauss;
        let ratio = if g_g == T::zero() {
            if params.gradient_k_hz != T::zero() {
                return Err(Error::InvalidDistribution(
                    "gradient parameter K requires a nonzero ground-state g factor".to_string(),
                ));
            }
            T::zero()
        } else {
            params.scheme.g_s_mhz_per_gauss / g_g
        };
        let paths = enumerate_pathways(params.scheme, params.distribution, params.polarizations);
        let m_eff = paths
            .iter()
            .map(|p| p.m_g.value::<T>() - ratio * p.m_s.value::<T>())
            .collect();
        Ok(Self {
            paths,
            m_eff,
            k_hz: params.gradient_k_hz,
            ratio,
        })
    }

    /// Assemble directly from precomputed pathways; `ratio` is g_s/g_g.
    /// Useful for custom pathway sets and scaling studies.
    pub fn from_parts(paths: Vec<Pathway<T>>, k_hz: T, ratio: T) -> Self {
        let m_eff = paths
            .iter()
            .map(|p| p.m_g.value::<T>() - ratio * p.m_s.value::<T>())
            .collect();
        Self {
            paths,
            m_eff,
            k_hz,
            ratio,
        }
    }

    pub fn paths(&self) -> &[Pathway<T>] {
        &self.paths
    }

    /// Ground and storage Zeeman rates (rad/s) of one pathway at the
    /// dimensionless position s ∈ [−1/2, 1/2].
    fn zeeman_rates(&self, index: usize, s: T) -> (T, T) {
        let two_pi = T::of(2.0 * std::f64::consts::PI);
        let path = &self.paths[index];
        let a_g = two_pi * self.k_hz * path.m_g.value::<T>() * s;
        let a_s = two_pi * self.k_hz * self.ratio * path.m_s.value::<T>() * s;
        (a_g, a_s)
    }

    fn worst_case_zeeman(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.paths.len() {
            let (a_g, a_s) = self.zeeman_rates(i, T::of(0.5));
            worst = worst.max(a_g.abs()).max(a_s.abs());
        }
        worst
    }

    /// Spatially averaged two-photon amplitude density (the pathway sum over
    /// the density kernel with the per-pathway sinc factor applied):
    ///
    /// P(t₂, t₁) = Σ D_{m_g} d(m_g, m_s) sinc(π K m_eff (t₂−t₁)) g₀(t₂, t₁)
    ///
    /// where g₀ is the envelope kernel at zero Zeeman rates.
    pub fn density(&self, t2_ns: T, t1_ns: T, timeline: &Timeline<T>) -> Complex<T> {
        if t2_ns <= t1_ns {
            return Complex::new(T::zero(), T::zero());
        }
        let env = timeline.read.envelope(t2_ns) * timeline.write.envelope(t1_ns);
        if env == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let pref =
            env / (timeline.read.detuning_rad_per_ns() * timeline.write.detuning_rad_per_ns());
        let tau_s = (t2_ns - t1_ns) * T::of(1e-9);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (path, &m_eff) in self.paths.iter().zip(&self.m_eff) {
            let factor = sinc(T::PI() * self.k_hz * m_eff * tau_s);
            acc += path.strength * (path.weight * factor);
        }
        -acc * pref
    }

    /// The joint density 𝒫(t₂, t₁) = |P(t₂, t₁)|².
    pub fn joint_density(&self, t2_ns: T, t1_ns: T, timeline: &Timeline<T>) -> T {
        self.density(t2_ns, t1_ns, timeline).norm_sqr()
    }

    /// Total joint detection probability p₁₂ at t → ∞ (read pulse gone),
    /// with C = 1: |Σ D d ∫ds F(∞, s)|².
    pub fn joint_probability(
        &self,
        timeline: &Timeline<T>,
        backend: Backend,
        opts: &QuadratureOptions<T>,
    ) -> Result<T> {
        Ok(self.total_amplitude(timeline, backend, opts)?.norm_sqr())
    }

    /// The coherent pathway amplitude Σ D d ∫ds F(∞, s) behind p₁₂.
    pub fn total_amplitude(
        &self,
        timeline: &Timeline<T>,
        backend: Backend,
        opts: &QuadratureOptions<T>,
    ) -> Result<Complex<T>> {
        let both_delta = matches!(timeline.write.shape, PulseShape::Delta)
            && matches!(timeline.read.shape, PulseShape::Delta);
        if both_delta && backend == Backend::Analytic {
            return self.delta_amplitude(timeline);
        }
        let t_end = timeline.end_ns();
        let (nodes, weights) = gauss_legendre::<T>(opts.gl_order);
        let half = T::of(0.5);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (i, path) in self.paths.iter().enumerate() {
            let mut avg = Complex::new(T::zero(), T::zero());
            for (x, w) in nodes.iter().zip(&weights) {
                let s = *x * half;
                let (a_g, a_s) = self.zeeman_rates(i, s);
                let f = match backend {
                    Backend::Analytic => {
                        transition_amplitude_analytic(t_end, a_g, a_s, timeline)?
                    }
                    Backend::Numeric => {
                        transition_amplitude_numeric(
                            t_end,
                            a_g,
                            a_s,
                            timeline,
                            opts.numeric_step_ns,
                        )?
                        .value
                    }
                };
                avg += f * (*w * half);
            }
            acc += avg * path.strength * path.weight;
        }
        Ok(acc)
    }

    /// Delta pulses: the spatial integral of the density-kernel amplitude is
    /// exactly the per-pathway sinc, making the K·Δt scaling law exact.
    fn delta_amplitude(&self, timeline: &Timeline<T>) -> Result<Complex<T>> {
        closed_form::check_regime_rates(self.worst_case_zeeman(), timeline)?;
        let dwn = timeline.write.detuning_rad_per_ns();
        let drn = timeline.read.detuning_rad_per_ns();
        let scale = timeline.write.area() * timeline.read.area() / (dwn * drn);
        let tau_s = timeline.delta_t_ns() * T::of(1e-9);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (path, &m_eff) in self.paths.iter().zip(&self.m_eff) {
            let factor = sinc(T::PI() * self.k_hz * m_eff * tau_s);
            acc += path.strength * (path.weight * factor);
        }
        Ok(-acc * scale)
    }

    /// ∫∫_{t₂>t₁} P(t₂, t₁) dt₂ dt₁ over the envelope supports by
    /// breakpoint-split Gauss–Legendre panels; |·|² of this is the
    /// density-route joint probability.
    pub fn amplitude_integral(&self, timeline: &Timeline<T>, order: usize) -> Result<Complex<T>> {
        self.require_envelopes(timeline)?;
        let t1_cuts = timeline.write.breakpoints();
        let t2_cuts = timeline.read.breakpoints();
        let (nodes, weights) = gauss_legendre::<T>(order);
        let mut acc = Complex::new(T::zero(), T::zero());
        for seg1 in t1_cuts.windows(2) {
            let (a1, b1) = (seg1[0], seg1[1]);
            if b1 <= a1 {
                continue;
            }
            let h1 = (b1 - a1) / T::of(2.0);
            let m1 = (a1 + b1) / T::of(2.0);
            for (x1, w1) in nodes.iter().zip(&weights) {
                let t1 = m1 + h1 * *x1;
                let inner = self.integrate_t2(t1, &t2_cuts, &nodes, &weights, timeline, false);
                acc += inner * (*w1 * h1);
            }
        }
        Ok(acc)
    }

    /// Density-route joint probability |∫∫ P|² (valid for any envelope
    /// shape; this is the integral the binned wavepacket discretizes).
    pub fn joint_probability_from_density(
        &self,
        timeline: &Timeline<T>,
        order: usize,
    ) -> Result<T> {
        Ok(self.amplitude_integral(timeline, order)?.norm_sqr())
    }

    fn integrate_t2(
        &self,
        t1: T,
        t2_cuts: &[T],
        nodes: &[T],
        weights: &[T],
        timeline: &Timeline<T>,
        squared: bool,
    ) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for seg in t2_cuts.windows(2) {
            let lo = seg[0].max(t1);
            let hi = seg[1];
            if hi <= lo {
                continue;
            }
            let h = (hi - lo) / T::of(2.0);
            let m = (lo + hi) / T::of(2.0);
            for (x, w) in nodes.iter().zip(weights) {
                let t2 = m + h * *x;
                let p = self.density(t2, t1, timeline);
                let v = if squared {
                    Complex::new(p.norm_sqr(), T::zero())
                } else {
                    p
                };
                acc += v * (*w * h);
            }
        }
        acc
    }

    fn require_envelopes(&self, timeline: &Timeline<T>) -> Result<()> {
        for (label, pulse) in [("write", &timeline.write), ("read", &timeline.read)] {
            if matches!(pulse.shape, PulseShape::Delta) {
                return Err(Error::UnsupportedShape(format!(
                    "{label} pulse is a delta; density quantities need a pointwise envelope"
                )));
            }
        }
        Ok(())
    }

    /// Binned wavepacket 𝒫 averaged over `bin_ns` windows on both axes; bins
    /// wholly below the diagonal are zero, straddling bins carry the clipped
    /// average.
    pub fn wavepacket_grid(&self, timeline: &Timeline<T>, bin_ns: T) -> Result<WavepacketGrid<T>> {
        let (t1_edges, t2_edges, values) = self.binned(timeline, bin_ns, true)?;
        let real = values.mapv(|v| v.re);
        Ok(WavepacketGrid {
            t1_edges_ns: t1_edges,
            t2_edges_ns: t2_edges,
            values: real,
        })
    }

    /// Bin-averaged amplitude P on the same grid as [`Self::wavepacket_grid`];
    /// summing it against the bin areas recovers the amplitude integral.
    pub fn amplitude_grid(&self, timeline: &Timeline<T>, bin_ns: T) -> Result<AmplitudeGrid<T>> {
        self.binned(timeline, bin_ns, false)
    }

    /// Bin edges of the wavepacket grid for a given bin width: t1 over the
    /// write-pulse support, t2 over the read-pulse support, both padded to
    /// whole bins.
    pub fn grid_edges(&self, timeline: &Timeline<T>, bin_ns: T) -> Result<(Vec<T>, Vec<T>)> {
        if bin_ns <= T::zero() {
            return Err(Error::InvalidGrid("bin width must be positive".to_string()));
        }
        self.require_envelopes(timeline)?;
        let edges = |lo: T, hi: T| -> Vec<T> {
            let first = (lo / bin_ns).floor();
            let last = (hi / bin_ns).ceil();
            let n = (last - first).to_f64_lossy().round() as usize;
            (0..=n)
                .map(|k| (first + T::of(k as f64)) * bin_ns)
                .collect()
        };
        Ok((
            edges(timeline.write.start_ns, timeline.write.end_ns()),
            edges(timeline.read.start_ns, timeline.read.end_ns()),
        ))
    }

    /// Average of the joint density 𝒫 (squared = true) or the amplitude P
    /// over one rectangle, clipped to t2 > t1 and divided by the full
    /// rectangle area. Pure: cells may be evaluated in any order or in
    /// parallel with identical results.
    pub fn cell_average(
        &self,
        timeline: &Timeline<T>,
        t1_lo: T,
        t1_hi: T,
        t2_lo: T,
        t2_hi: T,
        squared: bool,
    ) -> Complex<T> {
        let area = (t1_hi - t1_lo) * (t2_hi - t2_lo);
        if t2_hi <= t1_lo || area <= T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let (nodes, weights) = gauss_legendre::<T>(6);
        let t1_cuts = timeline.write.breakpoints();
        let t2_cuts = timeline.read.breakpoints();
        let mut cuts1: Vec<T> = vec![t1_lo, t1_hi];
        cuts1.extend(t1_cuts.iter().copied().filter(|&c| c > t1_lo && c < t1_hi));
        cuts1.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
        let mut cuts2: Vec<T> = vec![t2_lo, t2_hi];
        cuts2.extend(t2_cuts.iter().copied().filter(|&c| c > t2_lo && c < t2_hi));
        cuts2.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
        let mut acc = Complex::new(T::zero(), T::zero());
        for seg1 in cuts1.windows(2) {
            let h1 = (seg1[1] - seg1[0]) / T::of(2.0);
            let m1 = (seg1[0] + seg1[1]) / T::of(2.0);
            for (x1, w1) in nodes.iter().zip(&weights) {
                let t1 = m1 + h1 * *x1;
                let inner = self.integrate_t2(t1, &cuts2, &nodes, &weights, timeline, squared);
                acc += inner * (*w1 * h1);
            }
        }
        acc / area
    }

    fn binned(&self, timeline: &Timeline<T>, bin_ns: T, squared: bool) -> Result<AmplitudeGrid<T>> {
        let (t1_edges, t2_edges) = self.grid_edges(timeline, bin_ns)?;
        let n1 = t1_edges.len() - 1;
        let n2 = t2_edges.len() - 1;
        let mut values = Array2::from_elem((n1, n2), Complex::new(T::zero(), T::zero()));
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                values[(i1, i2)] = self.cell_average(
                    timeline,
                    t1_edges[i1],
                    t1_edges[i1 + 1],
                    t2_edges[i2],
                    t2_edges[i2 + 1],
                    squared,
                );
            }
        }
        Ok((t1_edges, t2_edges, values))
    }
}

/// Spec-level convenience wrappers over [`PathwaySum`].
pub fn pair_amplitude_density<T: Scalar>(
    t2_ns: T,
    t1_ns: T,
    params: &EnsembleParams<'_, T>,
    timeline: &Timeline<T>,
) -> Result<Complex<T>> {
    Ok(PathwaySum::new(params)?.density(t2_ns, t1_ns, timeline))
}

pub fn joint_probability<T: Scalar>(
    params: &EnsembleParams<'_, T>,
    timeline: &Timeline<T>,
    backend: Backend,
    opts: &QuadratureOptions<T>,
) -> Result<T> {
    PathwaySum::new(params)?.joint_probability(timeline, backend, opts)
}

pub fn wavepacket_grid<T: Scalar>(
    params: &EnsembleParams<'_, T>,
    timeline: &Timeline<T>,
    bin_ns: T,
) -> Result<WavepacketGrid<T>> {
    PathwaySum::new(params)?.wavepacket_grid(timeline, bin_ns)
}

/// The three contributions to the small-ensemble joint probability for N
/// identical atoms with single-atom amplitude matrix A(m_g′, m_g):
/// the N²-scaling coherent term of the diagonal sum, the incoherent sum over
/// all transitions, and the exchange correction that removes the i = j
/// double counting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleTerms<T: Scalar> {
    pub coherent: T,
    pub incoherent: T,
    pub exchange: T,
}

impl<T: Scalar> EnsembleTerms<T> {
    pub fn total(&self) -> T {
        self.coherent + self.incoherent + self.exchange
    }
}

/// Evaluate the three terms for `n_atoms` identical atoms.
///
/// `amplitudes[[i_final, i_initial]]` indexes A(m_g′, m_g) with projections
/// ordered from −F_g upward; `distribution` supplies D_{m_g}.
pub fn small_ensemble_terms<T: Scalar>(
    n_atoms: u64,
    amplitudes: &Array2<Complex<T>>,
    distribution: &GroundDistribution<T>,
) -> Result<EnsembleTerms<T>> {
    let dim = distribution.probabilities().len();
    if amplitudes.shape() != [dim, dim] {
        return Err(Error::DegenerateInput(format!(
            "amplitude matrix must be {dim}x{dim} to match the distribution",
        )));
    }
    let n = T::of(n_atoms as f64);
    let mut diagonal = Complex::new(T::zero(), T::zero());
    let mut incoherent_single = T::zero();
    for (i_init, (_, weight)) in distribution.iter().enumerate() {
        diagonal += amplitudes[(i_init, i_init)] * weight;
        for i_fin in 0..dim {
            incoherent_single += weight * amplitudes[(i_fin, i_init)].norm_sqr();
        }
    }
    let coherent_single = diagonal.norm_sqr();
    Ok(EnsembleTerms {
        coherent: n * n * coherent_single,
        incoherent: n * incoherent_single,
        exchange: -n * coherent_single,
    })
}
