//! Subcommand drivers. Every output point is computed by a pure core call;
//! rayon parallelizes over points/cells/chunks and results are assembled by
//! index, so outputs are identical for any worker count.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use pairsim::amplitude::{EnsembleParams, PathwaySum};
use pairsim::photon::{
    correlation_functions, estimate_from_counts, ideal_joint_distribution, scale_fit_xi,
    DetectionModel, TrialCounts, TRIALS_PER_CHUNK,
};
use pairsim::raman::{fwhm, zeeman_spectrum};
use pairsim::Real;

use crate::config::ScenarioConfig;
use crate::data::{read_g12_data, read_theory_curve};
use crate::error::{CliError, CliResult};
use crate::output::{fmt, write_atomic, write_json, write_table, CurveOutput, Metadata};
use crate::presets::PRESETS;

/// Everything resolved from the command line: the configuration, where it
/// came from, the effective backend, and the output path.
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub source: String,
    pub backend: String,
    pub out: PathBuf,
}

impl Scenario {
    fn metadata(&self, command: &str) -> Metadata {
        let mut meta = Metadata::new(command, &self.source, &self.cfg.digest(), &self.backend);
        for note in &self.cfg.output.notes {
            meta = meta.extra("note", note.clone());
        }
        meta
    }

    /// The effective configuration sidecar: parsed input plus defaults,
    /// re-parseable to the same computation.
    fn write_effective_config(&self) -> CliResult<()> {
        let mut path = self.out.clone();
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("out")
            .to_string();
        path.set_file_name(format!("{stem}.effective.toml"));
        write_atomic(&path, self.cfg.to_effective_toml().as_bytes())
    }

    fn pathway_sum(&self) -> CliResult<(PathwaySum<Real>, f64)> {
        let scheme = self.cfg.scheme()?;
        let distribution = self.cfg.distribution(&scheme)?;
        let polarizations = self.cfg.polarizations()?;
        let k_hz = self.cfg.k_hz(&scheme)?;
        let sum = PathwaySum::new(&EnsembleParams {
            scheme: &scheme,
            distribution: &distribution,
            polarizations: &polarizations,
            gradient_k_hz: k_hz,
        })?;
        Ok((sum, k_hz))
    }
}

/// p12(Δt) sweep; with measured data attached the curve is scaled by the
/// fitted ξ.
pub fn run_decoherence(scenario: &Scenario, data_path: Option<&Path>) -> CliResult<()> {
    let (sum, k_hz) = scenario.pathway_sum()?;
    let base = scenario.cfg.timeline(&scenario.backend)?;
    let backend = ScenarioConfig::core_backend(&scenario.backend);
    let opts = scenario.cfg.quadrature()?;
    let delays = scenario.cfg.sweep_delays()?;

    let points: Vec<Result<f64, pairsim::Error>> = delays
        .par_iter()
        .map(|&dt| {
            let tl = base.with_delay(dt)?;
            sum.joint_probability(&tl, backend, &opts)
        })
        .collect();
    let mut p12 = Vec::with_capacity(points.len());
    for r in points {
        p12.push(r.map_err(CliError::from)?);
    }

    let mut meta = scenario
        .metadata("decoherence")
        .unit("delta_t_ns", "ns")
        .unit("p12", "relative joint probability (C = 1)")
        .extra("gradient_k_hz", fmt(k_hz))
        .extra("pathways", sum.paths().len().to_string());

    let mut scaled: Option<Vec<f64>> = None;
    if let Some(path) = data_path {
        let data = read_g12_data(path)?;
        let theory: Vec<(f64, f64)> = delays.iter().copied().zip(p12.iter().copied()).collect();
        let fit = scale_fit_xi(&theory, &data).map_err(CliError::from)?;
        meta = meta
            .unit("p12_scaled", "xi * p12, matched to the data scale")
            .extra("xi", fmt(fit.xi))
            .extra("xi_th", fmt(fit.xi_th))
            .extra("data_file", path.display().to_string());
        scaled = Some(p12.iter().map(|p| p * fit.xi).collect());
    }

    let mut curve = CurveOutput::new("delta_t_ns", delays, meta)?;
    curve.push_column("p12", p12)?;
    if let Some(s) = scaled {
        curve.push_column("p12_scaled", s)?;
    }
    curve.write(&scenario.out)?;
    scenario.write_effective_config()
}

/// Binned two-photon wavepacket in long form (t1, t2, density).
pub fn run_wavepacket(scenario: &Scenario) -> CliResult<()> {
    let (sum, k_hz) = scenario.pathway_sum()?;
    let timeline = scenario.cfg.timeline(&scenario.backend)?;
    if scenario.backend == "delta" {
        return Err(CliError::Regime(
            "the wavepacket is a density in the detection times; delta pulses have no \
             pointwise envelope"
                .to_string(),
        ));
    }
    let bin = scenario.cfg.run.bin_ns;
    let (t1_edges, t2_edges) = sum.grid_edges(&timeline, bin)?;
    let n1 = t1_edges.len() - 1;
    let n2 = t2_edges.len() - 1;
    let cells: Vec<f64> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| {
            let (i1, i2) = (idx / n2, idx % n2);
            sum.cell_average(
                &timeline,
                t1_edges[i1],
                t1_edges[i1 + 1],
                t2_edges[i2],
                t2_edges[i2 + 1],
                true,
            )
            .re
        })
        .collect();

    let meta = scenario
        .metadata("wavepacket")
        .unit("t1_ns", "ns")
        .unit("t2_ns", "ns")
        .unit("density", "relative joint density (C = 1)")
        .extra("bin_ns", fmt(bin))
        .extra("gradient_k_hz", fmt(k_hz))
        .extra("delta_t_ns", fmt(timeline.delta_t_ns()));
    let rows: Vec<Vec<String>> = (0..n1 * n2)
        .map(|idx| {
            let (i1, i2) = (idx / n2, idx % n2);
            vec![
                fmt((t1_edges[i1] + t1_edges[i1 + 1]) / 2.0),
                fmt((t2_edges[i2] + t2_edges[i2 + 1]) / 2.0),
                fmt(cells[idx]),
            ]
        })
        .collect();
    write_table(&scenario.out, &meta, &["t1_ns", "t2_ns", "density"], &rows)?;
    scenario.write_effective_config()
}

/// Analytic and Monte-Carlo correlation estimates, with the Cauchy–Schwarz
/// verdict, as a JSON report.
pub fn run_correlations(scenario: &Scenario, seed_override: Option<u64>) -> CliResult<()> {
    let c = &scenario.cfg.correlations;
    let seed = seed_override.unwrap_or(scenario.cfg.run.seed);
    let dist = ideal_joint_distribution(c.chi, c.n_max).map_err(CliError::from)?;
    let model = DetectionModel::new(c.eta1, c.eta2, c.bg1, c.bg2).map_err(CliError::from)?;
    let analytic = correlation_functions(&dist, &model).map_err(CliError::from)?;

    // Fixed-size chunks on counter-based streams: the merge is an integer
    // sum, so any reduction order gives identical results.
    let n_chunks = c.trials.div_ceil(TRIALS_PER_CHUNK);
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let done = chunk * TRIALS_PER_CHUNK;
            let take = (c.trials - done).min(TRIALS_PER_CHUNK);
            pairsim::photon::simulate_chunk(&dist, &model, seed, chunk, take)
        })
        .reduce(TrialCounts::default, |mut a, b| {
            a.merge(&b);
            a
        });
    let empirical = estimate_from_counts::<Real>(&counts).map_err(CliError::from)?;

    let block = |e: &pairsim::photon::CorrelationEstimate<Real>| {
        serde_json::json!({
            "g11": e.g11, "g22": e.g22, "g12": e.g12, "R": e.r,
            "nonclassical": e.nonclassical,
            "se_g11": e.se_g11, "se_g22": e.se_g22, "se_g12": e.se_g12, "se_R": e.se_r,
            "p1": e.p1, "p2": e.p2, "p12": e.p12,
            "trials": e.trials,
        })
    };
    let report = serde_json::json!({
        "tool": "pairsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "correlations",
        "source": scenario.source,
        "config_sha256": scenario.cfg.digest(),
        "chi": c.chi,
        "n_max": c.n_max,
        "detection": { "eta1": c.eta1, "eta2": c.eta2, "bg1": c.bg1, "bg2": c.bg2 },
        "seed": seed,
        "analytic": block(&analytic),
        "monte_carlo": block(&empirical),
    });
    write_json(&scenario.out, &report)?;
    println!(
        "analytic:    g12 = {:.4}, R = {:.4}, nonclassical = {}",
        analytic.g12, analytic.r, analytic.nonclassical
    );
    println!(
        "monte carlo: g12 = {:.4} +- {:.4}, R = {:.4} +- {:.4} ({} trials)",
        empirical.g12, empirical.se_g12, empirical.r, empirical.se_r, empirical.trials
    );
    scenario.write_effective_config()
}

/// Ground-state Raman spectrum export.
pub fn run_raman(scenario: &Scenario) -> CliResult<()> {
    let scheme = scenario.cfg.scheme()?;
    let distribution = scenario.cfg.distribution(&scheme)?;
    let field = scenario.cfg.field_profile()?;
    let r = &scenario.cfg.raman;
    let spectrum = zeeman_spectrum(
        &scheme,
        &distribution,
        &field,
        r.probe_extent_mm,
        &r.allowed_delta_m,
        r.n_bins,
        r.z_samples,
    )
    .map_err(CliError::from)?;
    let width = fwhm(&spectrum).map_err(CliError::from)?;

    let meta = scenario
        .metadata("raman")
        .unit("detuning_hz", "Hz")
        .unit("weight", "normalized population weight")
        .extra("fwhm_hz", fmt(width))
        .extra(
            "allowed_delta_m",
            format!(
                "[{}]",
                r.allowed_delta_m
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
    let mut curve = CurveOutput::new("detuning_hz", spectrum.bin_centers_hz().to_vec(), meta)?;
    curve.push_column("weight", spectrum.weights().to_vec())?;
    curve.write(&scenario.out)?;
    scenario.write_effective_config()
}

/// Scale fit of a theory curve against measured correlation data.
pub fn run_fit(theory_path: &Path, data_path: &Path, out: &Path) -> CliResult<()> {
    let theory = read_theory_curve(theory_path)?;
    let data = read_g12_data(data_path)?;
    let fit = scale_fit_xi(&theory, &data).map_err(CliError::from)?;
    let report = serde_json::json!({
        "tool": "pairsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "fit",
        "theory_file": theory_path.display().to_string(),
        "data_file": data_path.display().to_string(),
        "xi": fit.xi,
        "xi_th": fit.xi_th,
    });
    write_json(out, &report)?;
    println!("xi = {:.6e}", fit.xi);
    println!("xi_th = {:.6e}", fit.xi_th);
    Ok(())
}

/// List the built-in presets. Write errors (e.g. a closed pipe) are not
/// failures for a listing.
pub fn run_presets() {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "built-in presets (use with --config <name>):");
    for p in PRESETS {
        let _ = writeln!(out, "  {:<22} {:<12} {}", p.name, p.command, p.summary);
    }
}
