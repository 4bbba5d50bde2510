//! Scenario configuration: TOML schema, validation, and construction of the
//! core simulation objects. Unknown keys are rejected and every failure names
//! the offending field.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pairsim::amplitude::{Backend, QuadratureOptions};
use pairsim::angmom::HalfInt;
use pairsim::atomic::{
    gradient_parameter_k, FieldKind, FieldProfile, GroundDistribution, LevelScheme,
    PolarizationSet,
};
use pairsim::pulse::{Pulse, PulseShape, Timeline};
use pairsim::{Polarization64, Real};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scheme: SchemeConfig,
    pub distribution: DistributionConfig,
    pub polarizations: PolarizationsConfig,
    pub field: FieldConfig,
    pub timeline: TimelineConfig,
    pub sweep: SweepConfig,
    pub run: RunConfig,
    pub correlations: CorrelationsConfig,
    pub raman: RamanConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    /// "cesium" or "custom" (with the explicit fields below).
    pub preset: String,
    pub f_g: f64,
    pub f_s: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub g_g_mhz_per_gauss: f64,
    pub g_s_mhz_per_gauss: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            preset: "cesium".to_string(),
            f_g: 4.0,
            f_s: 3.0,
            f_a: 4.0,
            f_b: 4.0,
            g_g_mhz_per_gauss: 0.35,
            g_s_mhz_per_gauss: -0.35,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionConfig {
    /// "unpolarized", "polarized-m0", or "custom".
    pub kind: String,
    /// Populations from m = −F_g upward, for kind = "custom".
    pub probabilities: Vec<f64>,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        Self {
            kind: "unpolarized".to_string(),
            probabilities: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PolarizationsConfig {
    pub write: String,
    pub field1: String,
    pub read: String,
    pub field2: String,
}

impl Default for PolarizationsConfig {
    fn default() -> Self {
        Self {
            write: "lin-x".to_string(),
            field1: "lin-y".to_string(),
            read: "lin-y".to_string(),
            field2: "lin-x".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    /// Gradient parameter K in Hz. Ignored when a profile is given.
    pub k_hz: f64,
    pub profile: Option<ProfileConfig>,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            k_hz: 1.1e6,
            profile: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    /// "linear-gradient" or "uniform-bias".
    pub kind: String,
    pub gradient_g_per_cm: f64,
    pub bias_gauss: f64,
    pub length_mm: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            kind: "linear-gradient".to_string(),
            gradient_g_per_cm: 8.7,
            bias_gauss: 0.0,
            length_mm: 3.6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TimelineConfig {
    /// "square", "trapezoid", or "delta".
    pub shape: String,
    pub rise_ns: f64,
    pub write_fwhm_ns: f64,
    pub read_fwhm_ns: f64,
    pub write_amplitude: f64,
    pub read_amplitude: f64,
    /// Carrier detuning Δ/2π in Hz, shared by write and read.
    pub detuning_hz: f64,
    pub delta_t_ns: f64,
}

impl Default for TimelineConfig {
    fn default() -> Self {
        Self {
            shape: "square".to_string(),
            rise_ns: 20.0,
            write_fwhm_ns: 150.0,
            read_fwhm_ns: 120.0,
            write_amplitude: 1.0,
            read_amplitude: 1.0,
            detuning_hz: 3e9,
            delta_t_ns: 200.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub start_ns: f64,
    pub stop_ns: f64,
    pub step_ns: f64,
    /// Explicit delay list; overrides the range when non-empty.
    pub list_ns: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            start_ns: 0.0,
            stop_ns: 1000.0,
            step_ns: 10.0,
            list_ns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// "analytic", "numeric", or "delta".
    pub backend: String,
    pub seed: u64,
    pub gl_order: usize,
    pub numeric_step_ns: f64,
    /// Wavepacket bin width.
    pub bin_ns: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: "analytic".to_string(),
            seed: 7,
            gl_order: 64,
            numeric_step_ns: 0.001953125,
            bin_ns: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationsConfig {
    pub chi: f64,
    pub n_max: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub bg1: f64,
    pub bg2: f64,
    pub trials: u64,
}

impl Default for CorrelationsConfig {
    fn default() -> Self {
        Self {
            chi: 0.1,
            n_max: 60,
            eta1: 1.0,
            eta2: 1.0,
            bg1: 0.0,
            bg2: 0.0,
            trials: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RamanConfig {
    pub probe_extent_mm: f64,
    pub allowed_delta_m: Vec<i32>,
    pub n_bins: usize,
    pub z_samples: usize,
}

impl Default for RamanConfig {
    fn default() -> Self {
        Self {
            probe_extent_mm: 16.0,
            allowed_delta_m: vec![0, 1, -1],
            n_bins: 31,
            z_samples: 1201,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub out: String,
    /// Free-form annotations carried into the output metadata (reference
    /// scales, provenance remarks).
    pub notes: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            out: "out.csv".to_string(),
            notes: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    /// Canonical TOML serialization of the effective (defaults-applied)
    /// configuration.
    pub fn to_effective_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the effective configuration, hex-encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_effective_toml().as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn half_int(label: &str, v: f64) -> CliResult<HalfInt> {
        let doubled = (2.0 * v).round();
        if (2.0 * v - doubled).abs() > 1e-9 || doubled < 0.0 {
            return Err(CliError::Config(format!(
                "{label} = {v} must be a non-negative integer or half-integer"
            )));
        }
        Ok(HalfInt::from_doubled(doubled as i32))
    }

    pub fn scheme(&self) -> CliResult<LevelScheme<Real>> {
        match self.scheme.preset.as_str() {
            "cesium" => Ok(LevelScheme::cesium()),
            "custom" => LevelScheme::new(
                Self::half_int("scheme.f_g", self.scheme.f_g)?,
                Self::half_int("scheme.f_s", self.scheme.f_s)?,
                Self::half_int("scheme.f_a", self.scheme.f_a)?,
                Self::half_int("scheme.f_b", self.scheme.f_b)?,
                self.scheme.g_g_mhz_per_gauss,
                self.scheme.g_s_mhz_per_gauss,
            )
            .map_err(|e| CliError::Config(format!("scheme: {e}"))),
            other => Err(CliError::Config(format!(
                "scheme.preset must be \"cesium\" or \"custom\", got \"{other}\""
            ))),
        }
    }

    pub fn distribution(&self, scheme: &LevelScheme<Real>) -> CliResult<GroundDistribution<Real>> {
        match self.distribution.kind.as_str() {
            "unpolarized" => Ok(GroundDistribution::unpolarized(scheme.f_g)),
            "polarized-m0" => GroundDistribution::polarized_m0(scheme.f_g)
                .map_err(|e| CliError::Config(format!("distribution: {e}"))),
            "custom" => {
                GroundDistribution::new(scheme.f_g, self.distribution.probabilities.clone())
                    .map_err(|e| CliError::Config(format!("distribution.probabilities: {e}")))
            }
            other => Err(CliError::Config(format!(
                "distribution.kind must be \"unpolarized\", \"polarized-m0\" or \"custom\", \
                 got \"{other}\""
            ))),
        }
    }

    fn polarization(label: &str, name: &str) -> CliResult<Polarization64> {
        match name {
            "sigma+" => Ok(Polarization64::sigma_plus()),
            "sigma-" => Ok(Polarization64::sigma_minus()),
            "pi" => Ok(Polarization64::pi()),
            "lin-x" => Ok(Polarization64::linear_x()),
            "lin-y" => Ok(Polarization64::linear_y()),
            other => Err(CliError::Config(format!(
                "polarizations.{label} must be one of sigma+, sigma-, pi, lin-x, lin-y; \
                 got \"{other}\""
            ))),
        }
    }

    pub fn polarizations(&self) -> CliResult<PolarizationSet<Real>> {
        Ok(PolarizationSet {
            write: Self::polarization("write", &self.polarizations.write)?,
            field1: Self::polarization("field1", &self.polarizations.field1)?,
            read: Self::polarization("read", &self.polarizations.read)?,
            field2: Self::polarization("field2", &self.polarizations.field2)?,
        })
    }

    /// The gradient parameter K in Hz: direct, or derived from the field
    /// profile.
    pub fn k_hz(&self, scheme: &LevelScheme<Real>) -> CliResult<f64> {
        match &self.field.profile {
            None => Ok(self.field.k_hz),
            Some(p) => match p.kind.as_str() {
                "linear-gradient" => Ok(gradient_parameter_k(
                    scheme.g_g_mhz_per_gauss,
                    p.gradient_g_per_cm,
                    p.length_mm,
                )),
                "uniform-bias" => Err(CliError::Config(
                    "field.profile.kind = uniform-bias has no gradient parameter; \
                     use it only with the raman subcommand"
                        .to_string(),
                )),
                other => Err(CliError::Config(format!(
                    "field.profile.kind must be \"linear-gradient\" or \"uniform-bias\", \
                     got \"{other}\""
                ))),
            },
        }
    }

    pub fn field_profile(&self) -> CliResult<FieldProfile<Real>> {
        let p = self.field.profile.clone().unwrap_or_default();
        let kind = match p.kind.as_str() {
            "linear-gradient" => FieldKind::LinearGradient {
                gradient_g_per_cm: p.gradient_g_per_cm,
            },
            "uniform-bias" => FieldKind::UniformBias {
                bias_gauss: p.bias_gauss,
            },
            other => {
                return Err(CliError::Config(format!(
                    "field.profile.kind must be \"linear-gradient\" or \"uniform-bias\", \
                     got \"{other}\""
                )))
            }
        };
        FieldProfile::new(p.length_mm, kind)
            .map_err(|e| CliError::Config(format!("field.profile: {e}")))
    }

    /// Pulse shape after applying the backend: the "delta" backend collapses
    /// both envelopes to their areas.
    fn shape(&self, backend: &str) -> CliResult<PulseShape<Real>> {
        if backend == "delta" {
            return Ok(PulseShape::Delta);
        }
        match self.timeline.shape.as_str() {
            "square" => Ok(PulseShape::Square),
            "trapezoid" => Ok(PulseShape::Trapezoid {
                rise_ns: self.timeline.rise_ns,
            }),
            "delta" => Ok(PulseShape::Delta),
            other => Err(CliError::Config(format!(
                "timeline.shape must be \"square\", \"trapezoid\" or \"delta\", got \"{other}\""
            ))),
        }
    }

    pub fn timeline(&self, backend: &str) -> CliResult<Timeline<Real>> {
        let shape = self.shape(backend)?;
        let detuning = 2.0 * std::f64::consts::PI * self.timeline.detuning_hz;
        let pol = Self::polarization("write", &self.polarizations.write)?;
        let write = Pulse::new(
            shape,
            0.0,
            self.timeline.write_fwhm_ns,
            detuning,
            self.timeline.write_amplitude,
            pol,
        )
        .map_err(|e| CliError::Config(format!("timeline (write): {e}")))?;
        let pol = Self::polarization("read", &self.polarizations.read)?;
        let read = Pulse::new(
            shape,
            self.timeline.delta_t_ns,
            self.timeline.read_fwhm_ns,
            detuning,
            self.timeline.read_amplitude,
            pol,
        )
        .map_err(|e| CliError::Config(format!("timeline (read): {e}")))?;
        Timeline::new(write, read).map_err(|e| CliError::Config(format!("timeline: {e}")))
    }

    /// Backend name after CLI override, validated.
    pub fn backend_name(&self, cli_override: Option<&str>) -> CliResult<String> {
        let name = cli_override.unwrap_or(&self.run.backend);
        match name {
            "analytic" | "numeric" | "delta" => Ok(name.to_string()),
            other => Err(CliError::Config(format!(
                "run.backend must be \"analytic\", \"numeric\" or \"delta\", got \"{other}\""
            ))),
        }
    }

    /// Core backend for a named backend ("delta" evaluates analytically on
    /// delta pulses).
    pub fn core_backend(name: &str) -> Backend {
        match name {
            "numeric" => Backend::Numeric,
            _ => Backend::Analytic,
        }
    }

    pub fn quadrature(&self) -> CliResult<QuadratureOptions<Real>> {
        if self.run.gl_order == 0 {
            return Err(CliError::Config("run.gl_order must be positive".to_string()));
        }
        if self.run.numeric_step_ns <= 0.0 {
            return Err(CliError::Config(
                "run.numeric_step_ns must be positive".to_string(),
            ));
        }
        Ok(QuadratureOptions {
            gl_order: self.run.gl_order,
            numeric_step_ns: self.run.numeric_step_ns,
        })
    }

    /// Sweep delays in ns; strictly increasing so the exported curve is
    /// monotone in x.
    pub fn sweep_delays(&self) -> CliResult<Vec<f64>> {
        if !self.sweep.list_ns.is_empty() {
            if self.sweep.list_ns.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Config(
                    "sweep.list_ns must be strictly increasing".to_string(),
                ));
            }
            return Ok(self.sweep.list_ns.clone());
        }
        let s = &self.sweep;
        if s.step_ns <= 0.0 || s.stop_ns < s.start_ns {
            return Err(CliError::Config(format!(
                "sweep: need step_ns > 0 and stop_ns >= start_ns \
                 (got start = {}, stop = {}, step = {})",
                s.start_ns, s.stop_ns, s.step_ns
            )));
        }
        let n = ((s.stop_ns - s.start_ns) / s.step_ns).floor() as usize + 1;
        Ok((0..n).map(|k| s.start_ns + k as f64 * s.step_ns).collect())
    }
}
