//! Photon-number statistics of the pair state, correlation functions,
//! the Cauchy–Schwarz ratio, a Monte-Carlo trial simulator, and the overall
//! scale fit against measured correlation data.
//!
//! Detection is modeled per trial: each photon of field i survives with
//! probability η_i, detected photons route 50/50 onto the field's two
//! detectors, and each detector may add one background count per trial.
//! The correlation functions are normalized count correlations
//! (g₁₂ = ⟨C₁C₂⟩/⟨C₁⟩⟨C₂⟩ and per-detector analogues for g₁₁, g₂₂), which
//! keeps the ideal-state values exact at any efficiency: loss rescales the
//! counts while the normalized ratios stay put.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Trials per RNG stream; results are independent of how chunks are
/// distributed across workers because each chunk owns stream index = chunk
/// index of the seeded counter-based generator.
pub const TRIALS_PER_CHUNK: u64 = 1 << 16;

/// The ideal pair state: excitation probability χ and the photon-number
/// truncation. The geometric completion P(n,n) = (1−χ)χⁿ reproduces the
/// thermal marginals (g₁₁ = g₂₂ = 2) of the collective emission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeState<T: Scalar> {
    chi: T,
    n_max: usize,
}

impl<T: Scalar> TwoModeState<T> {
    /// Validated constructor: 0 < χ < 1 and truncated mass ≥ 1 − 1e-12.
    pub fn new(chi: T, n_max: usize) -> Result<Self> {
        if chi <= T::zero() || chi >= T::one() {
            return Err(Error::InvalidStatistics(format!(
                "chi must lie in (0, 1), got {chi}"
            )));
        }
        let missing = chi.powi(n_max as i32 + 1);
        if missing > T::of(1e-12) {
            return Err(Error::InvalidStatistics(format!(
                "truncation at n_max = {n_max} leaves {:e} of the distribution",
                missing.to_f64_lossy()
            )));
        }
        Ok(Self { chi, n_max })
    }

    pub fn chi(&self) -> T {
        self.chi
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn joint_distribution(&self) -> JointPhotonDistribution<T> {
        ideal_joint_distribution(self.chi, self.n_max).expect("state already validated")
    }
}

/// Joint photon-number distribution P(n₁, n₂) on a truncated grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPhotonDistribution<T: Scalar> {
    probs: Array2<T>,
}

/// P(n, n) = (1 − χ) χⁿ, zero off the diagonal.
pub fn ideal_joint_distribution<T: Scalar>(
    chi: T,
    n_max: usize,
) -> Result<JointPhotonDistribution<T>> {
    let state = TwoModeState::new(chi, n_max)?;
    let n = state.n_max + 1;
    let mut probs = Array2::from_elem((n, n), T::zero());
    let mut p = T::one() - chi;
    for k in 0..n {
        probs[(k, k)] = p;
        p *= chi;
    }
    Ok(JointPhotonDistribution { probs })
}

impl<T: Scalar> JointPhotonDistribution<T> {
    /// Independent Poissonian fields, the classical diagnostic input with
    /// g₁₁ = g₂₂ = g₁₂ = 1.
    pub fn poisson_product(mean1: T, mean2: T, n_max: usize) -> Result<Self> {
        if mean1 < T::zero() || mean2 < T::zero() {
            return Err(Error::InvalidStatistics(
                "Poisson means must be non-negative".to_string(),
            ));
        }
        let n = n_max + 1;
        let pois = |mean: T| -> Vec<T> {
            let mut v = Vec::with_capacity(n);
            let mut p = (-mean).exp();
            for k in 0..n {
                v.push(p);
                p *= mean / T::of((k + 1) as f64);
            }
            v
        };
        let p1 = pois(mean1);
        let p2 = pois(mean2);
        let mut probs = Array2::from_elem((n, n), T::zero());
        for i in 0..n {
            for j in 0..n {
                probs[(i, j)] = p1[i] * p2[j];
            }
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &Array2<T> {
        &self.probs
    }

    pub fn total_mass(&self) -> T {
        self.probs.iter().fold(T::zero(), |acc, p| acc + *p)
    }

    /// First and second factorial moments: ⟨n₁⟩, ⟨n₂⟩, ⟨n₁(n₁−1)⟩,
    /// ⟨n₂(n₂−1)⟩, ⟨n₁n₂⟩.
    fn moments(&self) -> (T, T, T, T, T) {
        let (mut m1, mut m2, mut f1, mut f2, mut x12) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for ((i, j), p) in self.probs.indexed_iter() {
            let n1 = T::of(i as f64);
            let n2 = T::of(j as f64);
            m1 += *p * n1;
            m2 += *p * n2;
            f1 += *p * n1 * (n1 - T::one());
            f2 += *p * n2 * (n2 - T::one());
            x12 += *p * n1 * n2;
        }
        (m1, m2, f1, f2, x12)
    }
}

/// Detection efficiencies and per-detector background count probabilities;
/// each field feeds a fixed 50/50 splitter onto two detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel<T: Scalar> {
    pub eta1: T,
    pub eta2: T,
    pub bg1: T,
    pub bg2: T,
}

impl<T: Scalar> DetectionModel<T> {
    pub fn new(eta1: T, eta2: T, bg1: T, bg2: T) -> Result<Self> {
        for (label, v) in [("eta1", eta1), ("eta2", eta2), ("bg1", bg1), ("bg2", bg2)] {
            if v < T::zero() || v > T::one() {
                return Err(Error::InvalidStatistics(format!(
                    "{label} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            eta1,
            eta2,
            bg1,
            bg2,
        })
    }

    /// Lossless, background-free detection.
    pub fn ideal() -> Self {
        Self {
            eta1: T::one(),
            eta2: T::one(),
            bg1: T::zero(),
            bg2: T::zero(),
        }
    }
}

/// Correlation figures of merit with their standard errors. Analytic
/// estimates carry zero standard error and zero trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate<T: Scalar> {
    pub g11: T,
    pub g22: T,
    pub g12: T,
    pub r: T,
    pub nonclassical: bool,
    pub se_g11: T,
    pub se_g22: T,
    pub se_g12: T,
    pub se_r: T,
    pub trials: u64,
    /// Singles rates ⟨C₁⟩, ⟨C₂⟩ and the coincidence rate ⟨C₁C₂⟩ per trial.
    pub p1: T,
    pub p2: T,
    pub p12: T,
}

/// Cauchy–Schwarz ratio R = g₁₂²/(g₁₁ g₂₂); R > 1 certifies nonclassical
/// correlations.
pub fn cauchy_schwarz_r<T: Scalar>(g11: T, g22: T, g12: T) -> Result<(T, bool)> {
    if g11 <= T::zero() || g22 <= T::zero() {
        return Err(Error::InvalidStatistics(format!(
            "autocorrelations must be positive, got g11 = {g11}, g22 = {g22}"
        )));
    }
    let r = g12 * g12 / (g11 * g22);
    Ok((r, r > T::one()))
}

/// Exact correlation functions by enumeration over the truncated joint
/// distribution, with each photon independently detected and routed.
pub fn correlation_functions<T: Scalar>(
    dist: &JointPhotonDistribution<T>,
    model: &DetectionModel<T>,
) -> Result<CorrelationEstimate<T>> {
    let (m1, m2, f1, f2, x12) = dist.moments();
    let half = T::of(0.5);
    // Per-detector mean counts.
    let d1 = model.eta1 * m1 * half + model.bg1;
    let d2 = model.eta2 * m2 * half + model.bg2;
    // Field-level singles rates.
    let c1 = model.eta1 * m1 + T::of(2.0) * model.bg1;
    let c2 = model.eta2 * m2 + T::of(2.0) * model.bg2;
    // Pair rates.
    let p11 = model.eta1 * model.eta1 * f1 * T::of(0.25)
        + model.bg1 * model.eta1 * m1
        + model.bg1 * model.bg1;
    let p22 = model.eta2 * model.eta2 * f2 * T::of(0.25)
        + model.bg2 * model.eta2 * m2
        + model.bg2 * model.bg2;
    let p12 = model.eta1 * model.eta2 * x12
        + model.eta1 * m1 * T::of(2.0) * model.bg2
        + model.eta2 * m2 * T::of(2.0) * model.bg1
        + T::of(4.0) * model.bg1 * model.bg2;
    if d1 <= T::zero() || d2 <= T::zero() {
        return Err(Error::InvalidStatistics(
            "zero mean count rate; correlations undefined".to_string(),
        ));
    }
    let g11 = p11 / (d1 * d1);
    let g22 = p22 / (d2 * d2);
    let g12 = p12 / (c1 * c2);
    let (r, nonclassical) = cauchy_schwarz_r(g11, g22, g12)?;
    Ok(CorrelationEstimate {
        g11,
        g22,
        g12,
        r,
        nonclassical,
        se_g11: T::zero(),
        se_g22: T::zero(),
        se_g12: T::zero(),
        se_r: T::zero(),
        trials: 0,
        p1: c1,
        p2: c2,
        p12,
    })
}

/// Per-chunk integer accumulators over the detector count vector
/// v = (c1a, c1b, c2a, c2b, c1a·c1b, c2a·c2b, C1·C2).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounts {
    pub trials: u64,
    pub sum: [u64; 7],
    pub sum_sq: [[u64; 7]; 7],
}

impl TrialCounts {
    pub fn merge(&mut self, other: &TrialCounts) {
        self.trials += other.trials;
        for i in 0..7 {
            self.sum[i] += other.sum[i];
            for j in 0..7 {
                self.sum_sq[i][j] += other.sum_sq[i][j];
            }
        }
    }
}

fn sample_binomial<R: Rng>(rng: &mut R, n: u32, p: f64) -> u32 {
    if p >= 1.0 {
        return n;
    }
    if p <= 0.0 {
        return 0;
    }
    let mut k = 0;
    for _ in 0..n {
        if rng.gen::<f64>() < p {
            k += 1;
        }
    }
    k
}

/// Simulate one chunk of trials on its own counter-based RNG stream.
/// Pure in (dist, model, seed, chunk_index, n_trials), so chunks may run on
/// any worker in any order.
pub fn simulate_chunk<T: Scalar>(
    dist: &JointPhotonDistribution<T>,
    model: &DetectionModel<T>,
    seed: u64,
    chunk_index: u64,
    n_trials: u64,
) -> TrialCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index);

    // Flattened inverse-CDF table.
    let dim = dist.probs.nrows();
    let mut cdf: Vec<f64> = Vec::with_capacity(dim * dim);
    let mut acc = 0.0;
    for p in dist.probs.iter() {
        acc += p.to_f64_lossy();
        cdf.push(acc);
    }
    let eta1 = model.eta1.to_f64_lossy();
    let eta2 = model.eta2.to_f64_lossy();
    let bg1 = model.bg1.to_f64_lossy();
    let bg2 = model.bg2.to_f64_lossy();

    let mut counts = TrialCounts {
        trials: n_trials,
        ..TrialCounts::default()
    };
    for _ in 0..n_trials {
        let u: f64 = rng.gen::<f64>() * acc.max(1.0);
        let flat = cdf.partition_point(|&c| c < u).min(dim * dim - 1);
        let n1 = (flat / dim) as u32;
        let n2 = (flat % dim) as u32;

        let k1 = sample_binomial(&mut rng, n1, eta1);
        let k2 = sample_binomial(&mut rng, n2, eta2);
        let r1 = sample_binomial(&mut rng, k1, 0.5) as u64;
        let r2 = sample_binomial(&mut rng, k2, 0.5) as u64;
        let b1a = u64::from(bg1 > 0.0 && rng.gen::<f64>() < bg1);
        let b1b = u64::from(bg1 > 0.0 && rng.gen::<f64>() < bg1);
        let b2a = u64::from(bg2 > 0.0 && rng.gen::<f64>() < bg2);
        let b2b = u64::from(bg2 > 0.0 && rng.gen::<f64>() < bg2);
        let c1a = r1 + b1a;
        let c1b = (k1 as u64 - r1) + b1b;
        let c2a = r2 + b2a;
        let c2b = (k2 as u64 - r2) + b2b;

        let v = [
            c1a,
            c1b,
            c2a,
            c2b,
            c1a * c1b,
            c2a * c2b,
            (c1a + c1b) * (c2a + c2b),
        ];
        for i in 0..7 {
            counts.sum[i] += v[i];
            for j in 0..7 {
                counts.sum_sq[i][j] += v[i] * v[j];
            }
        }
    }
    counts
}

/// Empirical correlation estimate from `n_trials` seeded Monte-Carlo trials,
/// with delta-method standard errors. The trial stream is partitioned into
/// fixed-size chunks so results do not depend on worker count.
pub fn simulate_trials<T: Scalar>(
    dist: &JointPhotonDistribution<T>,
    model: &DetectionModel<T>,
    n_trials: u64,
    seed: u64,
) -> Result<CorrelationEstimate<T>> {
    if n_trials == 0 {
        return Err(Error::InvalidStatistics(
            "at least one trial required".to_string(),
        ));
    }
    let mut counts = TrialCounts::default();
    let mut remaining = n_trials;
    let mut chunk = 0;
    while remaining > 0 {
        let take = remaining.min(TRIALS_PER_CHUNK);
        counts.merge(&simulate_chunk(dist, model, seed, chunk, take));
        remaining -= take;
        chunk += 1;
    }
    estimate_from_counts(&counts)
}

/// Reduce merged chunk counts to the correlation estimate.
pub fn estimate_from_counts<T: Scalar>(counts: &TrialCounts) -> Result<CorrelationEstimate<T>> {
    let n = counts.trials as f64;
    let mean: Vec<f64> = counts.sum.iter().map(|&s| s as f64 / n).collect();
    // Covariance of the sample means.
    let mut cov = [[0.0_f64; 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            cov[i][j] = (counts.sum_sq[i][j] as f64 / n - mean[i] * mean[j]) / n;
        }
    }
    let (c1a, c1b, c2a, c2b, p11, p22, p12) = (
        mean[0], mean[1], mean[2], mean[3], mean[4], mean[5], mean[6],
    );
    let (cc1, cc2) = (c1a + c1b, c2a + c2b);
    if c1a <= 0.0 || c1b <= 0.0 || c2a <= 0.0 || c2b <= 0.0 {
        return Err(Error::InvalidStatistics(
            "a detector registered no counts; increase trials".to_string(),
        ));
    }
    let g11 = p11 / (c1a * c1b);
    let g22 = p22 / (c2a * c2b);
    let g12 = p12 / (cc1 * cc2);

    // Delta-method gradients over the 7 moment coordinates.
    let mut grad_g11 = [0.0; 7];
    grad_g11[4] = 1.0 / (c1a * c1b);
    grad_g11[0] = -g11 / c1a;
    grad_g11[1] = -g11 / c1b;
    let mut grad_g22 = [0.0; 7];
    grad_g22[5] = 1.0 / (c2a * c2b);
    grad_g22[2] = -g22 / c2a;
    grad_g22[3] = -g22 / c2b;
    let mut grad_g12 = [0.0; 7];
    grad_g12[6] = 1.0 / (cc1 * cc2);
    grad_g12[0] = -g12 / cc1;
    grad_g12[1] = -g12 / cc1;
    grad_g12[2] = -g12 / cc2;
    grad_g12[3] = -g12 / cc2;

    let quad = |g: &[f64; 7]| -> f64 {
        let mut acc = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                acc += g[i] * cov[i][j] * g[j];
            }
        }
        acc.max(0.0)
    };
    let var_g11 = quad(&grad_g11);
    let var_g22 = quad(&grad_g22);
    let var_g12 = quad(&grad_g12);

    let r = g12 * g12 / (g11 * g22);
    let mut grad_r = [0.0; 7];
    for i in 0..7 {
        grad_r[i] = 2.0 * g12 / (g11 * g22) * grad_g12[i]
            - r / g11 * grad_g11[i]
            - r / g22 * grad_g22[i];
    }
    let var_r = quad(&grad_r);

    Ok(CorrelationEstimate {
        g11: T::of(g11),
        g22: T::of(g22),
        g12: T::of(g12),
        r: T::of(r),
        nonclassical: r > 1.0,
        se_g11: T::of(var_g11.sqrt()),
        se_g22: T::of(var_g22.sqrt()),
        se_g12: T::of(var_g12.sqrt()),
        se_r: T::of(var_r.sqrt()),
        trials: counts.trials,
        p1: T::of(cc1),
        p2: T::of(cc2),
        p12: T::of(p12),
    })
}

/// Result of the overall-scale fit: ξ minimizing the weighted residual of
/// ξ·p₁₂(Δt) against the data, and ξ_th = 1/p₁₂(Δt → ∞) from the tail of the
/// theory curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiFit<T: Scalar> {
    pub xi: T,
    pub xi_th: T,
}

/// Weighted least-squares scale between a theory curve `(Δt_ns, p12)` and
/// data points `(Δt_ns, g12, sigma)`:
///
/// ξ = Σ wᵢ yᵢ tᵢ / Σ wᵢ tᵢ², with wᵢ = 1/σᵢ², tᵢ the theory interpolated at
/// the data delay. ξ_th averages the final tenth of the theory samples to
/// suppress sinc side lobes before inverting.
pub fn scale_fit_xi<T: Scalar>(theory: &[(T, T)], data: &[(T, T, T)]) -> Result<XiFit<T>> {
    if theory.len() < 2 {
        return Err(Error::DegenerateInput(
            "theory curve needs at least two samples".to_string(),
        ));
    }
    if data.is_empty() {
        return Err(Error::DegenerateInput(
            "at least one data point required".to_string(),
        ));
    }
    for w in theory.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::DegenerateInput(
                "theory delays must be strictly increasing".to_string(),
            ));
        }
    }
    if theory.iter().all(|&(_, p)| p == T::zero()) {
        return Err(Error::DegenerateInput(
            "theory curve is identically zero".to_string(),
        ));
    }
    let (t_lo, t_hi) = (theory[0].0, theory[theory.len() - 1].0);
    let interpolate = |x: T| -> Result<T> {
        if x < t_lo || x > t_hi {
            return Err(Error::DegenerateInput(format!(
                "data delay {} ns outside the theory range [{}, {}]",
                x.to_f64_lossy(),
                t_lo.to_f64_lossy(),
                t_hi.to_f64_lossy()
            )));
        }
        let idx = theory.partition_point(|&(t, _)| t <= x);
        if idx == 0 {
            return Ok(theory[0].1);
        }
        if idx == theory.len() {
            return Ok(theory[theory.len() - 1].1);
        }
        let (x0, y0) = theory[idx - 1];
        let (x1, y1) = theory[idx];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    };

    let mut num = T::zero();
    let mut den = T::zero();
    for &(dt, g, sigma) in data {
        if sigma <= T::zero() {
            return Err(Error::DegenerateInput(format!(
                "non-positive uncertainty at delay {} ns",
                dt.to_f64_lossy()
            )));
        }
        let t = interpolate(dt)?;
        let w = T::one() / (sigma * sigma);
        num += w * g * t;
        den += w * t * t;
    }
    if den.is_zero() {
        return Err(Error::DegenerateInput(
            "theory vanishes at every data point".to_string(),
        ));
    }
    let xi = num / den;

    let tail = (theory.len() / 10).max(1);
    let mut tail_mean = T::zero();
    for &(_, p) in &theory[theory.len() - tail..] {
        tail_mean += p;
    }
    tail_mean /= T::of(tail as f64);
    if tail_mean <= T::zero() {
        return Err(Error::DegenerateInput(
            "theory tail average is not positive; no asymptote to invert".to_string(),
        ));
    }
    Ok(XiFit {
        xi,
        xi_th: T::one() / tail_mean,
    })
}
