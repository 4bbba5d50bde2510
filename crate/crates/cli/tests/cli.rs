//! End-to-end CLI behavior: exit codes, file formats, fit pipeline, and the
//! effective-config round trip.

use std::path::Path;
use std::process::Command;

fn pairsim(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pairsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn config_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[timeline]\nbogus_key = 1\n").unwrap();
    let out = pairsim(dir.path(), &["decoherence", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bogus_key"), "stderr: {msg}");

    let out = pairsim(dir.path(), &["decoherence", "--config", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unsupported_regime_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Trapezoid envelope on the analytic backend: the closed form refuses.
    std::fs::write(
        dir.path().join("trap.toml"),
        "[timeline]\nshape = \"trapezoid\"\n",
    )
    .unwrap();
    let out = pairsim(dir.path(), &["decoherence", "--config", "trap.toml"]);
    assert_eq!(out.status.code(), Some(3));

    // Near-resonant drive violates the large-detuning gate.
    std::fs::write(
        dir.path().join("resonant.toml"),
        "[timeline]\ndetuning_hz = 1e6\n",
    )
    .unwrap();
    let out = pairsim(dir.path(), &["decoherence", "--config", "resonant.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn io_error_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairsim(
        dir.path(),
        &["fit", "--theory", "absent.csv", "--data", "absent.csv"],
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn numeric_backend_matches_analytic_on_a_short_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[sweep]
start_ns = 0.0
stop_ns = 300.0
step_ns = 150.0

[output]
out = "sweep.csv"
"#;
    std::fs::write(dir.path().join("sweep.toml"), cfg).unwrap();
    let out = pairsim(dir.path(), &["decoherence", "--config", "sweep.toml"]);
    assert!(out.status.success());
    let analytic = read(dir.path(), "sweep.csv");
    let out = pairsim(
        dir.path(),
        &[
            "decoherence",
            "--config",
            "sweep.toml",
            "--backend",
            "numeric",
            "--out",
            "sweep-numeric.csv",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let numeric = read(dir.path(), "sweep-numeric.csv");
    let grab = |text: &str| -> Vec<(f64, f64)> {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("delta"))
            .map(|l| {
                let mut it = l.split(',');
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect()
    };
    let a = grab(&analytic);
    let n = grab(&numeric);
    assert_eq!(a.len(), 3);
    for ((dta, pa), (dtn, pn)) in a.iter().zip(&n) {
        assert_eq!(dta, dtn);
        assert!(((pa - pn) / pn).abs() < 1e-4, "{pa} vs {pn}");
    }
}

#[test]
fn fit_pipeline_recovers_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairsim(dir.path(), &["decoherence", "--config", "fig7a"]);
    assert!(out.status.success());
    // Synthesize data proportional to the computed curve.
    let curve = read(dir.path(), "fig7a.csv");
    let mut data = String::from("delta_t_ns,g12,sigma\n");
    let mut theory = String::from("delta_t_ns,p12\n");
    for line in curve.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let mut it = line.split(',');
        let dt: f64 = it.next().unwrap().parse().unwrap();
        let p: f64 = it.next().unwrap().parse().unwrap();
        theory.push_str(&format!("{dt},{p}\n"));
        if (dt / 40.0).fract() == 0.0 {
            data.push_str(&format!("{dt},{},{}\n", 2.5e7 * p, 0.05));
        }
    }
    std::fs::write(dir.path().join("theory.csv"), theory).unwrap();
    std::fs::write(dir.path().join("data.csv"), data).unwrap();
    let out = pairsim(
        dir.path(),
        &[
            "fit",
            "--theory",
            "theory.csv",
            "--data",
            "data.csv",
            "--out",
            "fit.json",
        ],
    );
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "fit.json")).unwrap();
    let xi = report["xi"].as_f64().unwrap();
    assert!((xi / 2.5e7 - 1.0).abs() < 1e-9, "xi = {xi}");
    assert!(report["xi_th"].as_f64().unwrap() > 0.0);

    // The decoherence command itself accepts the data for an in-line fit.
    let out = pairsim(
        dir.path(),
        &[
            "decoherence",
            "--config",
            "fig7a",
            "--data",
            "data.csv",
            "--out",
            "fig7a-scaled.csv",
        ],
    );
    assert!(out.status.success());
    let scaled = read(dir.path(), "fig7a-scaled.csv");
    assert!(scaled.contains("p12_scaled"));
    assert!(scaled.lines().any(|l| l.starts_with("# xi:")));
}

#[test]
fn effective_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairsim(dir.path(), &["decoherence", "--config", "fig7a"]);
    assert!(out.status.success());
    let effective = read(dir.path(), "fig7a.effective.toml");
    // Re-running from the effective config reproduces the output bytes.
    std::fs::write(dir.path().join("replay.toml"), &effective).unwrap();
    let out = pairsim(
        dir.path(),
        &[
            "decoherence",
            "--config",
            "replay.toml",
            "--out",
            "replay.csv",
        ],
    );
    assert!(out.status.success());
    let a = read(dir.path(), "fig7a.csv");
    let b = read(dir.path(), "replay.csv");
    let strip = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.starts_with("# source:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    // And the effective config of the replay equals the replayed input.
    let eff2 = read(dir.path(), "replay.effective.toml");
    assert_eq!(effective, eff2);
}

#[test]
fn wavepacket_output_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairsim(dir.path(), &["wavepacket", "--config", "fig8f"]);
    assert!(out.status.success());
    let text = read(dir.path(), "fig8f.csv");
    assert!(text.lines().next().unwrap().starts_with("# pairsim"));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap();
    assert_eq!(header, "t1_ns,t2_ns,density");
    // All densities non-negative; some strictly positive.
    let mut any_positive = false;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v >= 0.0);
        any_positive |= v > 0.0;
    }
    assert!(any_positive);
    // Sidecar carries the same digest as the CSV metadata.
    let sidecar: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "fig8f.csv.json")).unwrap();
    let digest = sidecar["config_sha256"].as_str().unwrap();
    assert!(text.contains(digest));
}

#[test]
fn raman_bias_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairsim(dir.path(), &["raman", "--config", "raman-bias"]);
    assert!(out.status.success());
    let text = read(dir.path(), "raman-bias.csv");
    let rows: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    // Seven equal lines at 0.7 MHz/G x m x 0.5 G, clock line at zero.
    let populated: Vec<&(f64, f64)> = rows.iter().filter(|(_, w)| *w > 0.0).collect();
    assert_eq!(populated.len(), 7);
    let zero_line = populated
        .iter()
        .min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap())
        .unwrap();
    assert!(zero_line.0.abs() < 1.0, "clock line at {}", zero_line.0);
    for (_, w) in &populated {
        assert!((w - 1.0 / 7.0).abs() < 1e-12);
    }
}

#[test]
fn seed_override_changes_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let fast = "[correlations]\ntrials = 20000\n\n[output]\nout = \"c.json\"\n";
    std::fs::write(dir.path().join("c.toml"), fast).unwrap();
    let run = |seed: &str, out: &str| -> serde_json::Value {
        let o = pairsim(
            dir.path(),
            &[
                "correlations",
                "--config",
                "c.toml",
                "--seed",
                seed,
                "--out",
                out,
            ],
        );
        assert!(o.status.success());
        serde_json::from_str(&read(dir.path(), out)).unwrap()
    };
    let a = run("1", "a.json");
    let b = run("1", "b.json");
    let c = run("2", "c2.json");
    assert_eq!(a["monte_carlo"]["g12"], b["monte_carlo"]["g12"]);
    assert_ne!(a["monte_carlo"]["g12"], c["monte_carlo"]["g12"]);
    assert_eq!(a["analytic"]["g12"], c["analytic"]["g12"]);
}
