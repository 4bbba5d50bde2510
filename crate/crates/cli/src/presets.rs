//! Built-in scenario presets, checked into the repository and embedded in
//! the binary.

pub struct Preset {
    pub name: &'static str,
    pub command: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig7a",
        command: "decoherence",
        summary: "field on (K = 1.1 MHz), unpolarized, sub-us decay to a plateau",
        toml: include_str!("../presets/fig7a.toml"),
    },
    Preset {
        name: "fig7b",
        command: "decoherence",
        summary: "field off (K = 12 kHz), coherence stretched by ~92x",
        toml: include_str!("../presets/fig7b.toml"),
    },
    Preset {
        name: "fig9-pumped-sigma",
        command: "decoherence",
        summary: "m = 0 pumping with sigma polarizations: exact plateau",
        toml: include_str!("../presets/fig9-pumped-sigma.toml"),
    },
    Preset {
        name: "fig9-pumped-lin",
        command: "decoherence",
        summary: "m = 0 pumping with the linear scheme: plateau plus decay",
        toml: include_str!("../presets/fig9-pumped-lin.toml"),
    },
    Preset {
        name: "fig8b",
        command: "wavepacket",
        summary: "overlapping pulses (delay 50 ns), K = 1.1 MHz",
        toml: include_str!("../presets/fig8b.toml"),
    },
    Preset {
        name: "fig8d",
        command: "wavepacket",
        summary: "consecutive pulses (delay 200 ns), K = 1.1 MHz",
        toml: include_str!("../presets/fig8d.toml"),
    },
    Preset {
        name: "fig8f",
        command: "wavepacket",
        summary: "field off (K = 12 kHz), delay 1 us, undistorted readout",
        toml: include_str!("../presets/fig8f.toml"),
    },
    Preset {
        name: "raman-fig3a",
        command: "raman",
        summary: "gradient-broadened ground-state trace, FWHM a few MHz",
        toml: include_str!("../presets/raman-fig3a.toml"),
    },
    Preset {
        name: "raman-bias",
        command: "raman",
        summary: "uniform bias field: discrete lines, clock line at 0 Hz",
        toml: include_str!("../presets/raman-bias.toml"),
    },
    Preset {
        name: "correlations-ideal",
        command: "correlations",
        summary: "ideal pair state at chi = 0.1: g12 = 11, R = 30.25",
        toml: include_str!("../presets/correlations-ideal.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let cfg = ScenarioConfig::parse(p.toml)
                .unwrap_or_else(|e| panic!("{} failed to parse: {e}", p.name));
            assert!(!cfg.output.out.is_empty());
        }
    }

    #[test]
    fn lookup() {
        assert!(find("fig8d").is_some());
        assert!(find("nope").is_none());
    }
}
