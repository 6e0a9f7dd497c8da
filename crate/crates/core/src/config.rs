//! TOML spin-system configuration.
//!
//! ```toml
//! [[spins]]
//! label = "1"
//! offset_hz = 0.0
//! channel = "13C"
//!
//! [[couplings]]
//! spins = ["1", "2"]
//! j_hz = 65.2
//!
//! [grid]
//! delta_us = 81.75
//! ```
//!
//! Optional `[pulses]` (durations in microseconds) and `[thermal]`
//! (`alphas`, one per spin) sections override the defaults. Unknown keys
//! are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pulse::PulseTiming;
use crate::spin_algebra::SpinSystem;
use crate::thermal::ThermalParams;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spins: Vec<RawSpin>,
    #[serde(default)]
    couplings: Vec<RawCoupling>,
    grid: Option<RawGrid>,
    pulses: Option<RawPulses>,
    thermal: Option<RawThermal>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpin {
    label: String,
    #[serde(default)]
    offset_hz: f64,
    channel: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    spins: [String; 2],
    j_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    delta_us: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulses {
    selective_90_us: Option<f64>,
    selective_180_us: Option<f64>,
    hard_90_us: Option<f64>,
    hard_180_us: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    alphas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystemConfig {
    pub system: SpinSystem,
    /// Grid spacing in seconds.
    pub grid_delta: Option<f64>,
    pub timing: PulseTiming,
    pub thermal: ThermalParams,
}

/// The bundled glycine-derivative configuration.
pub const GLYCINE_TOML: &str = include_str!("../data/glycine.toml");

impl SpinSystemConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        let m = raw.spins.len();
        let labels: Vec<String> = raw.spins.iter().map(|s| s.label.clone()).collect();
        let offsets = raw.spins.iter().map(|s| s.offset_hz).collect();
        let channels = raw.spins.iter().map(|s| s.channel.clone()).collect();
        let mut system = SpinSystem::new(labels, offsets, vec![vec![0.0; m]; m])?.with_channels(channels)?;
        for c in &raw.couplings {
            let k = label_index(&system, &c.spins[0])?;
            let l = label_index(&system, &c.spins[1])?;
            if system.coupling(k, l) != 0.0 {
                return Err(Error::Config(format!("coupling {}-{} listed twice", c.spins[0], c.spins[1])));
            }
            system = system.with_coupling(k, l, c.j_hz)?;
        }
        let grid_delta = match raw.grid.and_then(|g| g.delta_us) {
            Some(d) if !(d.is_finite() && d > 0.0) => {
                return Err(Error::Config(format!("grid delta must be positive, got {d}")));
            }
            d => d.map(|d| d * 1e-6),
        };
        let mut timing = PulseTiming::default();
        if let Some(p) = raw.pulses {
            let set = |field: &mut f64, v: Option<f64>| -> Result<()> {
                if let Some(us) = v {
                    if !(us.is_finite() && us >= 0.0) {
                        return Err(Error::Config(format!("pulse duration must be non-negative, got {us}")));
                    }
                    *field = us * 1e-6;
                }
                Ok(())
            };
            set(&mut timing.selective_90, p.selective_90_us)?;
            set(&mut timing.selective_180, p.selective_180_us)?;
            set(&mut timing.hard_90, p.hard_90_us)?;
            set(&mut timing.hard_180, p.hard_180_us)?;
        }
        let thermal = match raw.thermal {
            Some(t) if t.alphas.len() != m => {
                return Err(Error::Config(format!("{} alphas given for {m} spins", t.alphas.len())));
            }
            Some(t) => ThermalParams::new(t.alphas)?,
            None => ThermalParams::unit(m),
        };
        Ok(Self { system, grid_delta, timing, thermal })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn glycine() -> Self {
        Self::from_toml(GLYCINE_TOML).expect("bundled config is valid")
    }
}

fn label_index(sys: &SpinSystem, label: &str) -> Result<usize> {
    sys.labels()
        .iter()
        .position(|l| l == label)
        .map(|i| i + 1)
        .ok_or_else(|| Error::UnknownSpin(label.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_glycine_matches_builtin() {
        let c = SpinSystemConfig::glycine();
        assert_eq!(c.system, SpinSystem::glycine());
        assert!((c.grid_delta.unwrap() - 81.75e-6).abs() < 1e-15);
        assert_eq!(c.timing, PulseTiming::default());
        assert_eq!(c.thermal, ThermalParams::unit(4));
    }

    #[test]
    fn rejects_unknown_keys() {
        let src = "[[spins]]\nlabel = \"a\"\nofset_hz = 1.0\n";
        assert!(matches!(SpinSystemConfig::from_toml(src), Err(Error::Config(_))));
        let src = "[[spins]]\nlabel = \"a\"\n[extra]\n";
        assert!(matches!(SpinSystemConfig::from_toml(src), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_couplings() {
        let base = "[[spins]]\nlabel = \"a\"\n[[spins]]\nlabel = \"b\"\n";
        let unknown = format!("{base}[[couplings]]\nspins = [\"a\", \"c\"]\nj_hz = 5.0\n");
        assert!(matches!(SpinSystemConfig::from_toml(&unknown), Err(Error::UnknownSpin(_))));
        let same = format!("{base}[[couplings]]\nspins = [\"a\", \"a\"]\nj_hz = 5.0\n");
        assert!(matches!(SpinSystemConfig::from_toml(&same), Err(Error::SameSpin(1))));
        let twice = format!("{base}[[couplings]]\nspins = [\"a\", \"b\"]\nj_hz = 5.0\n[[couplings]]\nspins = [\"b\", \"a\"]\nj_hz = 6.0\n");
        assert!(matches!(SpinSystemConfig::from_toml(&twice), Err(Error::Config(_))));
    }

    #[test]
    fn optional_sections() {
        let src = "[[spins]]\nlabel = \"a\"\n[pulses]\nhard_90_us = 10\n[thermal]\nalphas = [0.5]\n";
        let c = SpinSystemConfig::from_toml(src).unwrap();
        assert_eq!(c.grid_delta, None);
        assert!((c.timing.hard_90 - 10e-6).abs() < 1e-18);
        assert_eq!(c.thermal.alphas, vec![0.5]);
        let bad = "[[spins]]\nlabel = \"a\"\n[thermal]\nalphas = [0.5, 1.0]\n";
        assert!(SpinSystemConfig::from_toml(bad).is_err());
    }
}
