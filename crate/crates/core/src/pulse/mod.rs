//! Idealized pulse programs: the compiler's output IR.
//!
//! A program is a time-ordered list of events plus a per-spin phase frame.
//! The frame is a pending `z` rotation applied after the last event; it is
//! what z rotations become once they have been commuted to the end of the
//! sequence, and it doubles as the receiver phase correction. Its unitary is
//! `Z(frame) * E_last * ... * E_first`.

mod compile;
mod streamline;
mod verify;

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use compile::{CompiledProgram, Compiler, GridRounding, PulseTiming};
pub use streamline::streamline;
pub use verify::{program_unitary, relay_conjugator, trilinear_conjugator, verify, FidelityReport, VERIFY_TOL};

use crate::error::{Error, Result};
use crate::spin_algebra::SpinSystem;

const ANGLE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseKind {
    Hard,
    Selective,
}

/// Rotation axis: `z`, or a transverse axis at `phase` radians from `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseAxis {
    Z,
    Transverse(f64),
}

impl PulseAxis {
    pub const X: PulseAxis = PulseAxis::Transverse(0.0);
    pub const Y: PulseAxis = PulseAxis::Transverse(FRAC_PI_2);

    fn label(self) -> String {
        match self {
            PulseAxis::Z => "z".into(),
            PulseAxis::Transverse(phase) => {
                let p = phase.rem_euclid(TAU);
                let quarter = p / FRAC_PI_2;
                let q = quarter.round();
                if (quarter - q).abs() < 1e-9 {
                    ["x", "y", "-x", "-y"][(q as usize) % 4].into()
                } else {
                    format!("{:.4}", p.to_degrees())
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub k: usize,
    pub l: usize,
    pub j_hz: f64,
}

impl Coupling {
    pub fn involves(&self, spin: usize) -> bool {
        self.k == spin || self.l == spin
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseEvent {
    Rotation { spin: usize, axis: PulseAxis, angle: f64, kind: PulseKind, duration: f64 },
    /// Free evolution under the listed couplings; every other coupling is
    /// removed by ideal decoupling of `decoupled_spins`.
    Delay { duration: f64, active_couplings: Vec<Coupling>, decoupled_spins: Vec<usize> },
    Barrier { annotation: String },
}

impl PulseEvent {
    pub fn duration(&self) -> f64 {
        match self {
            PulseEvent::Rotation { duration, .. } | PulseEvent::Delay { duration, .. } => *duration,
            PulseEvent::Barrier { .. } => 0.0,
        }
    }

    /// Whether the event acts non-trivially on `spin`.
    pub fn touches(&self, spin: usize) -> bool {
        match self {
            PulseEvent::Rotation { spin: s, .. } => *s == spin,
            PulseEvent::Delay { active_couplings, .. } => active_couplings.iter().any(|c| c.involves(spin)),
            PulseEvent::Barrier { .. } => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    spins: usize,
    pub events: Vec<PulseEvent>,
    /// Accumulated `z` rotation per spin (index 0 is spin 1), radians.
    pub phase_frame: Vec<f64>,
    /// Delay grid spacing in seconds when grid mode is on.
    pub grid: Option<f64>,
}

impl PulseProgram {
    pub fn empty(spins: usize) -> Self {
        Self { spins, events: Vec::new(), phase_frame: vec![0.0; spins], grid: None }
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(PulseEvent::duration).fold(0.0, |a, d| a + d)
    }

    /// Events other than barriers.
    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|e| !matches!(e, PulseEvent::Barrier { .. })).count()
    }

    pub fn is_empty(&self) -> bool {
        self.event_count() == 0 && self.phase_frame.iter().all(|&p| p.abs() < ANGLE_EPS)
    }

    /// Appends `next`, commuting this program's frame through it: transverse
    /// pulses of `next` on spin `k` are rephased by `-frame[k]`.
    pub fn then(mut self, next: PulseProgram) -> Self {
        debug_assert_eq!(self.spins, next.spins);
        for mut event in next.events {
            if let PulseEvent::Rotation { spin, axis: PulseAxis::Transverse(ref mut phase), .. } = event {
                *phase -= self.phase_frame[spin - 1];
            }
            self.events.push(event);
        }
        for (a, b) in self.phase_frame.iter_mut().zip(next.phase_frame) {
            *a += b;
        }
        self
    }

    /// Checks durations, grid alignment and that delays agree with the
    /// coupling topology: active couplings exist with the stated `J`, and
    /// every other coupling has at least one decoupled spin.
    pub fn validate(&self, topology: &SpinSystem) -> Result<()> {
        if topology.spins() != self.spins {
            return Err(Error::SpinCount { expected: topology.spins(), got: self.spins });
        }
        for event in &self.events {
            let d = event.duration();
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidArgument(format!("negative or non-finite duration {d}")));
            }
            if let PulseEvent::Delay { duration, active_couplings, decoupled_spins } = event {
                if let Some(delta) = self.grid {
                    let q = duration / delta;
                    if (q - q.round()).abs() > 1e-6 {
                        return Err(Error::InvalidArgument(format!("delay {duration} s is off the grid")));
                    }
                }
                for c in active_couplings {
                    if !topology.is_coupled(c.k, c.l) || topology.coupling(c.k, c.l) != c.j_hz {
                        return Err(Error::InvalidArgument(format!("coupling {}-{} not in topology", c.k, c.l)));
                    }
                    if decoupled_spins.contains(&c.k) || decoupled_spins.contains(&c.l) {
                        return Err(Error::InvalidArgument(format!("coupling {}-{} is decoupled", c.k, c.l)));
                    }
                }
                for (k, l, _) in topology.coupled_pairs() {
                    let active = active_couplings.iter().any(|c| c.involves(k) && c.involves(l));
                    if !active && !decoupled_spins.contains(&k) && !decoupled_spins.contains(&l) {
                        return Err(Error::InvalidArgument(format!("coupling {k}-{l} evolves unaccounted")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Tab-separated listing, one event per line:
    /// `EVENT  spins  axis  angle_deg  duration_us  flags`.
    pub fn to_text(&self, topology: Option<&SpinSystem>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# pulse program: {} spins", self.spins);
        match self.grid {
            Some(d) => {
                let _ = writeln!(s, "# grid_us {:.3}", d * 1e6);
            }
            None => s.push_str("# grid_us none\n"),
        }
        let _ = writeln!(s, "# total_duration_us {:.3}", self.total_duration() * 1e6);
        s.push_str("# EVENT\tspins\taxis\tangle_deg\tduration_us\tflags\n");
        for event in &self.events {
            match event {
                PulseEvent::Rotation { spin, axis, angle, kind, duration } => {
                    let mut flags = match kind {
                        PulseKind::Hard => "hard".to_string(),
                        PulseKind::Selective => "selective".to_string(),
                    };
                    if let (PulseKind::Selective, Some(sys)) = (kind, topology) {
                        // Mirror-image compensation pulse for each same-channel neighbour.
                        for other in sys.same_channel(*spin) {
                            let comp = 2.0 * sys.offset_hz(other) - sys.offset_hz(*spin);
                            let _ = write!(flags, ";compensate@{comp:.1}Hz");
                        }
                    }
                    let _ = writeln!(
                        s,
                        "ROT\t{spin}\t{}\t{:.6}\t{:.3}\t{flags}",
                        axis.label(),
                        angle.to_degrees(),
                        duration * 1e6
                    );
                }
                PulseEvent::Delay { duration, active_couplings, decoupled_spins } => {
                    let pairs: Vec<String> = active_couplings.iter().map(|c| format!("{}-{}", c.k, c.l)).collect();
                    let js: Vec<String> = active_couplings.iter().map(|c| format!("{}", c.j_hz)).collect();
                    let dec: Vec<String> = decoupled_spins.iter().map(|d| d.to_string()).collect();
                    let pairs = if pairs.is_empty() { "-".to_string() } else { pairs.join(",") };
                    let _ = writeln!(
                        s,
                        "DELAY\t{pairs}\t-\t-\t{:.3}\tJ={};decouple={}",
                        duration * 1e6,
                        js.join(","),
                        dec.join(",")
                    );
                }
                PulseEvent::Barrier { annotation } => {
                    let _ = writeln!(s, "BARRIER\t-\t-\t-\t0.000\t{annotation}");
                }
            }
        }
        for (i, &f) in self.phase_frame.iter().enumerate() {
            if f.abs() > ANGLE_EPS {
                let _ = writeln!(s, "FRAME\t{}\tz\t{:.6}\t0.000\tphase-shift", i + 1, f.to_degrees());
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn axis_labels() {
        assert_eq!(PulseAxis::X.label(), "x");
        assert_eq!(PulseAxis::Y.label(), "y");
        assert_eq!(PulseAxis::Transverse(PI).label(), "-x");
        assert_eq!(PulseAxis::Transverse(-FRAC_PI_2).label(), "-y");
        assert_eq!(PulseAxis::Transverse(0.5).label(), "28.6479");
    }

    #[test]
    fn then_rephases_following_pulses() {
        let mut a = PulseProgram::empty(2);
        a.phase_frame[0] = 0.3;
        let mut b = PulseProgram::empty(2);
        b.events.push(PulseEvent::Rotation { spin: 1, axis: PulseAxis::X, angle: 1.0, kind: PulseKind::Hard, duration: 0.0 });
        b.events.push(PulseEvent::Rotation { spin: 2, axis: PulseAxis::X, angle: 1.0, kind: PulseKind::Hard, duration: 0.0 });
        let c = a.then(b);
        assert_eq!(c.events[0], PulseEvent::Rotation { spin: 1, axis: PulseAxis::Transverse(-0.3), angle: 1.0, kind: PulseKind::Hard, duration: 0.0 });
        assert_eq!(c.events[1], PulseEvent::Rotation { spin: 2, axis: PulseAxis::X, angle: 1.0, kind: PulseKind::Hard, duration: 0.0 });
        assert_eq!(c.phase_frame, vec![0.3, 0.0]);
    }
}
