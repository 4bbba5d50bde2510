//! Acceptance criterion 12: every preset produces byte-identical output
//! across repeated runs and across worker counts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn run_preset(dir: &Path, name: &str, command: &str, threads: &str) {
    let bin = env!("CARGO_BIN_EXE_pairsim");
    let output = Command::new(bin)
        .current_dir(dir)
        .args([command, "--config", name, "--threads", threads])
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "{name} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            files.insert(
                path.file_name().unwrap().into(),
                std::fs::read(&path).unwrap(),
            );
        }
    }
    files
}

#[test]
fn criterion_12_preset_outputs_byte_identical() {
    let presets = [
        ("fig7a", "decoherence"),
        ("fig7b", "decoherence"),
        ("fig9-pumped-sigma", "decoherence"),
        ("fig9-pumped-lin", "decoherence"),
        ("fig8b", "wavepacket"),
        ("fig8d", "wavepacket"),
        ("fig8f", "wavepacket"),
        ("raman-fig3a", "raman"),
        ("raman-bias", "raman"),
        ("correlations-ideal", "correlations"),
    ];
    let mut reference: Option<BTreeMap<PathBuf, Vec<u8>>> = None;
    // Two repetitions at one thread, then a multi-threaded run: all byte
    // snapshots must agree.
    for threads in ["1", "1", "4"] {
        let dir = tempfile::tempdir().unwrap();
        for (name, command) in presets {
            run_preset(dir.path(), name, command, threads);
        }
        let snap = snapshot(dir.path());
        assert!(snap.len() >= presets.len() * 2, "outputs plus sidecars");
        match &reference {
            None => reference = Some(snap),
            Some(r) => {
                assert_eq!(r.len(), snap.len(), "file sets differ");
                for (k, v) in r {
                    let got = snap.get(k).unwrap_or_else(|| panic!("{k:?} missing"));
                    assert_eq!(got, v, "{k:?} differs (threads = {threads})");
                }
            }
        }
    }
    println!(
        "[acceptance] criterion 12: PASS - {} presets byte-identical across runs and 1 vs 4 workers",
        presets.len()
    );
}
