use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin labels, resonance offsets and the scalar coupling topology.
///
/// Spins are addressed by 1-based position throughout the crate; labels are
/// display names and the lookup key for user input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    labels: Vec<String>,
    offsets_hz: Vec<f64>,
    /// Row-major `m x m`, symmetric with zero diagonal.
    couplings_hz: Vec<f64>,
    /// Spins sharing a channel need frequency-selective pulses.
    channels: Vec<Option<String>>,
}

impl SpinSystem {
    pub fn new(labels: Vec<String>, offsets_hz: Vec<f64>, couplings_hz: Vec<Vec<f64>>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::InvalidSystem("no spins".into()));
        }
        if offsets_hz.len() != m || couplings_hz.len() != m || couplings_hz.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidSystem("offset/coupling table sizes do not match spin count".into()));
        }
        if let Some(o) = offsets_hz.iter().find(|o| !o.is_finite()) {
            return Err(Error::InvalidSystem(format!("non-finite offset {o}")));
        }
        for i in 0..m {
            if labels[..i].contains(&labels[i]) {
                return Err(Error::InvalidSystem(format!("duplicate label `{}`", labels[i])));
            }
            if couplings_hz[i][i] != 0.0 {
                return Err(Error::InvalidSystem(format!("self-coupling on spin {}", i + 1)));
            }
            for j in 0..m {
                let (a, b) = (couplings_hz[i][j], couplings_hz[j][i]);
                if !a.is_finite() || a != b {
                    return Err(Error::InvalidSystem(format!("coupling {}-{} not symmetric/finite", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { labels, offsets_hz, couplings_hz: couplings_hz.concat(), channels: vec![None; m] })
    }

    /// Spins labelled `1..=m`, zero offsets, no couplings.
    pub fn uncoupled(m: usize) -> Self {
        Self::new((1..=m).map(|i| i.to_string()).collect(), vec![0.0; m], vec![vec![0.0; m]; m])
            .expect("valid")
    }

    pub fn with_channels(mut self, channels: Vec<Option<String>>) -> Result<Self> {
        if channels.len() != self.spins() {
            return Err(Error::InvalidSystem("channel list size does not match spin count".into()));
        }
        self.channels = channels;
        Ok(self)
    }

    /// Returns a copy with `J_kl = J_lk = j_hz`.
    pub fn with_coupling(mut self, k: usize, l: usize, j_hz: f64) -> Result<Self> {
        let m = self.spins();
        if k == l {
            return Err(Error::SameSpin(k));
        }
        self.check_spin(k)?;
        self.check_spin(l)?;
        if !j_hz.is_finite() {
            return Err(Error::InvalidSystem(format!("non-finite coupling {j_hz}")));
        }
        self.couplings_hz[(k - 1) * m + (l - 1)] = j_hz;
        self.couplings_hz[(l - 1) * m + (k - 1)] = j_hz;
        Ok(self)
    }

    /// The 4-spin glycine-derivative system: carbonyl C' (1), C-alpha (2),
    /// 19F (3) and 15N (4).
    pub fn glycine() -> Self {
        let labels = ["1", "2", "3", "4"].iter().map(|s| s.to_string()).collect();
        let channels = ["13C", "13C", "19F", "15N"].iter().map(|s| Some(s.to_string())).collect();
        Self::new(labels, vec![0.0, -12231.0, 0.0, 0.0], vec![vec![0.0; 4]; 4])
            .and_then(|s| s.with_coupling(1, 2, 65.2))
            .and_then(|s| s.with_coupling(1, 3, 366.0))
            .and_then(|s| s.with_coupling(2, 3, 67.7))
            .and_then(|s| s.with_coupling(2, 4, 13.5))
            .and_then(|s| s.with_channels(channels))
            .expect("glycine system is valid")
    }

    pub fn spins(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, spin: usize) -> &str {
        &self.labels[spin - 1]
    }

    pub fn offset_hz(&self, spin: usize) -> f64 {
        self.offsets_hz[spin - 1]
    }

    pub fn channel(&self, spin: usize) -> Option<&str> {
        self.channels[spin - 1].as_deref()
    }

    pub fn coupling(&self, k: usize, l: usize) -> f64 {
        self.couplings_hz[(k - 1) * self.spins() + (l - 1)]
    }

    pub fn is_coupled(&self, k: usize, l: usize) -> bool {
        k != l && self.coupling(k, l) != 0.0
    }

    /// Spins with a nonzero coupling to `spin`, ascending.
    pub fn partners(&self, spin: usize) -> Vec<usize> {
        (1..=self.spins()).filter(|&o| self.is_coupled(spin, o)).collect()
    }

    /// All coupled pairs `(k, l, J)` with `k < l`.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize, f64)> {
        let m = self.spins();
        let mut out = Vec::new();
        for k in 1..=m {
            for l in k + 1..=m {
                if self.is_coupled(k, l) {
                    out.push((k, l, self.coupling(k, l)));
                }
            }
        }
        out
    }

    /// Other spins on the same channel as `spin`.
    pub fn same_channel(&self, spin: usize) -> Vec<usize> {
        match self.channel(spin) {
            None => Vec::new(),
            Some(ch) => (1..=self.spins()).filter(|&o| o != spin && self.channel(o) == Some(ch)).collect(),
        }
    }

    pub fn check_spin(&self, spin: usize) -> Result<()> {
        if spin == 0 || spin > self.spins() {
            return Err(Error::UnknownSpin(spin.to_string()));
        }
        Ok(())
    }

    /// Resolves a label, falling back to a 1-based position.
    pub fn spin_index(&self, label: &str) -> Result<usize> {
        if let Some(i) = self.labels.iter().position(|l| l == label) {
            return Ok(i + 1);
        }
        match label.parse::<usize>() {
            Ok(i) if i >= 1 && i <= self.spins() => Ok(i),
            _ => Err(Error::UnknownSpin(label.to_string())),
        }
    }
}
