//! Lowering of `Z`-string terms to pulses and delays.
//!
//! Angles follow the generator form of each term: a weight-`w` term
//! `c I_az ... I_wz` evolved for `tau` is `exp(-i theta 2^(w-1) I_az ... I_wz)`
//! with `theta = c tau / 2^(w-1)`.
//!
//! The conjugation factors `V` and `W` are written as operator products and
//! applied right to left: for `V = A1 A2 A3 A4 A5` the time order of
//! `V X V^-1` is `A1^-1 .. A5^-1, X, A5 .. A1`.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{streamline, verify, Coupling, FidelityReport, PulseAxis, PulseEvent, PulseKind, PulseProgram, ANGLE_EPS};
use crate::error::{Error, Result};
use crate::spin_algebra::{exp_commuting_zsum, zz_rotation, Axis, OperatorSum, ProductOperatorTerm, SpinSystem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTiming {
    pub selective_90: f64,
    pub selective_180: f64,
    pub hard_90: f64,
    pub hard_180: f64,
}

impl Default for PulseTiming {
    fn default() -> Self {
        Self { selective_90: 224e-6, selective_180: 250e-6, hard_90: 0.0, hard_180: 0.0 }
    }
}

impl PulseTiming {
    /// Metadata duration; angles above 90 degrees use the 180-degree length.
    pub fn duration(&self, kind: PulseKind, angle: f64) -> f64 {
        let long = angle.abs() > FRAC_PI_2 + 1e-9;
        match (kind, long) {
            (PulseKind::Selective, false) => self.selective_90,
            (PulseKind::Selective, true) => self.selective_180,
            (PulseKind::Hard, false) => self.hard_90,
            (PulseKind::Hard, true) => self.hard_180,
        }
    }
}

/// A delay moved onto the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRounding {
    pub k: usize,
    pub l: usize,
    pub j_hz: f64,
    pub requested: f64,
    pub rounded: f64,
    /// Phase-aligned Frobenius distance between the two 2-spin propagators.
    pub unitary_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledProgram {
    pub raw: PulseProgram,
    pub streamlined: PulseProgram,
    pub raw_report: FidelityReport,
    pub report: FidelityReport,
    pub rounding: Vec<GridRounding>,
}

pub struct Compiler<'a> {
    topology: &'a SpinSystem,
    timing: PulseTiming,
    grid: Option<f64>,
    rounding: RefCell<Vec<GridRounding>>,
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta - TAU * (theta / TAU).round();
    if t <= -PI {
        t += TAU;
    }
    t
}

impl<'a> Compiler<'a> {
    pub fn new(topology: &'a SpinSystem) -> Self {
        Self { topology, timing: PulseTiming::default(), grid: None, rounding: RefCell::new(Vec::new()) }
    }

    pub fn with_timing(mut self, timing: PulseTiming) -> Self {
        self.timing = timing;
        self
    }

    /// Rounds every delay to the nearest multiple of `delta` seconds.
    pub fn with_grid(mut self, delta: Option<f64>) -> Self {
        self.grid = delta;
        self
    }

    pub fn topology(&self) -> &SpinSystem {
        self.topology
    }

    /// Grid roundings recorded since the last call.
    pub fn take_rounding(&self) -> Vec<GridRounding> {
        std::mem::take(&mut self.rounding.borrow_mut())
    }

    fn empty(&self) -> PulseProgram {
        let mut p = PulseProgram::empty(self.topology.spins());
        p.grid = self.grid;
        p
    }

    fn check_distinct(&self, spins: &[usize]) -> Result<()> {
        for (i, &s) in spins.iter().enumerate() {
            self.topology.check_spin(s)?;
            if spins[..i].contains(&s) {
                return Err(Error::SameSpin(s));
            }
        }
        Ok(())
    }

    fn pulse(&self, p: &mut PulseProgram, spin: usize, phase: f64, angle: f64) {
        let angle = wrap_angle(angle);
        if angle.abs() < ANGLE_EPS {
            return;
        }
        let (phase, angle) = if angle < 0.0 { (phase + PI, -angle) } else { (phase, angle) };
        let kind = if self.topology.same_channel(spin).is_empty() { PulseKind::Hard } else { PulseKind::Selective };
        p.events.push(PulseEvent::Rotation {
            spin,
            axis: PulseAxis::Transverse(phase.rem_euclid(TAU)),
            angle,
            kind,
            duration: self.timing.duration(kind, angle),
        });
    }

    fn snap(&self, k: usize, l: usize, j: f64, t: f64) -> Result<f64> {
        let Some(delta) = self.grid else { return Ok(t) };
        let rounded = (t / delta).round() * delta;
        let exact = zz_rotation(2, 1, 2, PI * j * t)?;
        let approx = zz_rotation(2, 1, 2, PI * j * rounded)?;
        let (unitary_error, _) = approx.phase_aligned_distance(&exact)?;
        self.rounding.borrow_mut().push(GridRounding { k, l, j_hz: j, requested: t, rounded, unitary_error });
        Ok(rounded)
    }

    /// `exp(-i theta 2 I_kz I_lz)` by free evolution under `J_kl`.
    fn direct_zz(&self, p: &mut PulseProgram, k: usize, l: usize, theta: f64) -> Result<()> {
        let (k, l) = (k.min(l), k.max(l));
        let j = self.topology.coupling(k, l);
        let theta = wrap_angle(theta);
        if theta.abs() < ANGLE_EPS {
            return Ok(());
        }
        let t = self.snap(k, l, j, theta.abs() / (PI * j.abs()))?;
        let flip = (theta > 0.0) != (j > 0.0);
        if flip {
            self.pulse(p, l, 0.0, PI);
        }
        if t > 0.0 {
            let decoupled = (1..=self.topology.spins())
                .filter(|&s| s != k && s != l && !self.topology.partners(s).is_empty())
                .collect();
            p.events.push(PulseEvent::Delay {
                duration: t,
                active_couplings: vec![Coupling { k, l, j_hz: j }],
                decoupled_spins: decoupled,
            });
        }
        if flip {
            self.pulse(p, l, 0.0, PI);
        }
        Ok(())
    }

    /// `exp(-i angle I_kz)` as a phase-frame update; no events.
    pub fn compile_linear(&self, spin: usize, angle: f64) -> Result<PulseProgram> {
        self.topology.check_spin(spin)?;
        let mut p = self.empty();
        if angle.abs() >= ANGLE_EPS {
            p.phase_frame[spin - 1] += angle;
        }
        Ok(p)
    }

    /// `exp(-i theta 2 I_kz I_lz)`, relayed when `J_kl = 0`.
    pub fn compile_bilinear(&self, k: usize, l: usize, theta: f64) -> Result<PulseProgram> {
        self.check_distinct(&[k, l])?;
        if !self.topology.is_coupled(k, l) {
            return self.compile_relayed_bilinear(k, l, theta, None);
        }
        let mut p = self.empty();
        self.direct_zz(&mut p, k, l, theta)?;
        Ok(p)
    }

    /// Smallest spin coupled to both `k` and `l`.
    pub fn find_relay(&self, k: usize, l: usize) -> Option<usize> {
        (1..=self.topology.spins())
            .find(|&r| r != k && r != l && self.topology.is_coupled(k, r) && self.topology.is_coupled(r, l))
    }

    /// `V exp(-i theta 2 I_rz I_lz) V^-1` with
    /// `V = Rx_k(pi/2) ZZ_kr(pi/2) [Ry_k(pi/2) Rx_r(pi/2)] ZZ_kr(pi/2) Ry_r(pi/2)`,
    /// which maps `I_rz I_lz` to `I_kz I_lz`.
    pub fn compile_relayed_bilinear(&self, k: usize, l: usize, theta: f64, relay: Option<usize>) -> Result<PulseProgram> {
        self.check_distinct(&[k, l])?;
        let (k, l) = (k.min(l), k.max(l));
        let r = match relay {
            Some(r) => {
                self.topology.check_spin(r)?;
                if r == k || r == l {
                    if self.topology.is_coupled(k, l) {
                        return self.compile_bilinear(k, l, theta);
                    }
                    return Err(Error::InvalidRelay { k, l, relay: r });
                }
                if !self.topology.is_coupled(k, r) || !self.topology.is_coupled(r, l) {
                    return Err(Error::InvalidRelay { k, l, relay: r });
                }
                r
            }
            None => self.find_relay(k, l).ok_or(Error::NoRelay(k, l))?,
        };
        let mut p = self.empty();
        if wrap_angle(theta).abs() < ANGLE_EPS {
            return Ok(p);
        }
        let q = FRAC_PI_2;
        // V^-1
        self.pulse(&mut p, k, 0.0, -q);
        self.direct_zz(&mut p, k, r, -q)?;
        self.pulse(&mut p, k, q, -q);
        self.pulse(&mut p, r, 0.0, -q);
        self.direct_zz(&mut p, k, r, -q)?;
        self.pulse(&mut p, r, q, -q);
        self.direct_zz(&mut p, r, l, theta)?;
        // V
        self.pulse(&mut p, r, q, q);
        self.direct_zz(&mut p, k, r, q)?;
        self.pulse(&mut p, k, q, q);
        self.pulse(&mut p, r, 0.0, q);
        self.direct_zz(&mut p, k, r, q)?;
        self.pulse(&mut p, k, 0.0, q);
        Ok(p)
    }

    /// Picks `(pivot, w_partner, inner)` for a trilinear term: the pivot is
    /// the first spin (ascending) coupled to a `W` partner; a directly
    /// coupled inner pair beats a relayed one, then larger `|J|` wins.
    fn trilinear_plan(&self, spins: [usize; 3]) -> Result<(usize, usize, usize)> {
        let mut sorted = spins;
        sorted.sort_unstable();
        let mut relayed = None;
        for (i, &p) in sorted.iter().enumerate() {
            let others: Vec<usize> = sorted.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &s)| s).collect();
            let mut best: Option<(usize, usize)> = None;
            for (w, inner) in [(others[0], others[1]), (others[1], others[0])] {
                if !self.topology.is_coupled(p, w) {
                    continue;
                }
                if self.topology.is_coupled(p, inner) {
                    let better = best.is_none_or(|(bw, _)| {
                        self.topology.coupling(p, w).abs() > self.topology.coupling(p, bw).abs()
                    });
                    if better {
                        best = Some((w, inner));
                    }
                } else if relayed.is_none() && self.find_relay(p, inner).is_some() {
                    relayed = Some((p, w, inner));
                }
            }
            if let Some((w, inner)) = best {
                return Ok((p, w, inner));
            }
        }
        relayed.ok_or_else(|| Error::UnsupportedTopology(sorted.to_vec()))
    }

    /// `W exp(-i theta 2 I_pz I_iz) W^-1 = exp(-i theta 4 I_pz I_iz I_wz)` with
    /// `W = Rx_p(pi/2) ZZ_pw(pi/2) Ry_p(pi/2)`.
    pub fn compile_trilinear(&self, spins: [usize; 3], theta: f64) -> Result<PulseProgram> {
        self.check_distinct(&spins)?;
        let mut p = self.empty();
        if wrap_angle(theta).abs() < ANGLE_EPS {
            return Ok(p);
        }
        let (pv, w, inner) = self.trilinear_plan(spins)?;
        let q = FRAC_PI_2;
        self.pulse(&mut p, pv, 0.0, -q);
        self.direct_zz(&mut p, pv, w, -q)?;
        self.pulse(&mut p, pv, q, -q);
        let inner_prog = self.compile_bilinear(pv, inner, theta)?;
        p.events.extend(inner_prog.events);
        self.pulse(&mut p, pv, q, q);
        self.direct_zz(&mut p, pv, w, q)?;
        self.pulse(&mut p, pv, 0.0, q);
        Ok(p)
    }

    /// Program for `exp(-i c tau Z...Z)` of one term.
    pub fn compile_term(&self, term: &ProductOperatorTerm, tau: f64) -> Result<PulseProgram> {
        let m = self.topology.spins();
        if term.spins() != m {
            return Err(Error::AxesLength { expected: m, got: term.spins() });
        }
        if !term.is_z_string() {
            return Err(Error::NonZTerm(term.operator_string()));
        }
        let c = term.coefficient;
        if c.im.abs() > 1e-12 * c.norm().max(1.0) {
            return Err(Error::InvalidArgument(format!("term {} has a complex coefficient", term.operator_string())));
        }
        let w = term.weight();
        let spins = term.spins_with(Axis::Z);
        let theta = c.re * tau / (1u64 << w.saturating_sub(1)) as f64;
        match w {
            0 => Ok(self.empty()),
            1 => self.compile_linear(spins[0], theta),
            2 => self.compile_bilinear(spins[0], spins[1], theta),
            3 => self.compile_trilinear([spins[0], spins[1], spins[2]], theta),
            _ => Err(Error::TermWeight(term.operator_string())),
        }
    }

    /// Compiles every term in canonical order, streamlines and verifies
    /// against `exp(-i H tau)`.
    pub fn compile_hamiltonian(&self, h: &OperatorSum, tau: f64) -> Result<CompiledProgram> {
        let m = self.topology.spins();
        if h.spins() != m {
            return Err(Error::SpinCount { expected: m, got: h.spins() });
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!("evolution time must be positive, got {tau}")));
        }
        for term in h.terms() {
            if !term.is_z_string() {
                return Err(Error::NonZTerm(term.operator_string()));
            }
            if term.weight() > 3 {
                return Err(Error::TermWeight(term.operator_string()));
            }
        }
        self.rounding.borrow_mut().clear();
        let mut raw = self.empty();
        let mut segment = 0usize;
        for term in h.terms().iter().filter(|t| !t.is_identity()) {
            let part = self.compile_term(term, tau)?;
            if part.event_count() > 0 {
                let label = if segment < 26 { ((b'A' + segment as u8) as char).to_string() } else { format!("S{segment}") };
                raw.events.push(PulseEvent::Barrier { annotation: format!("{label}: {}", term.operator_string()) });
                segment += 1;
            }
            raw = raw.then(part);
        }
        let streamlined = streamline(&raw);
        let target = exp_commuting_zsum(h, tau)?;
        let raw_report = verify(&raw, &target)?;
        let report = verify(&streamlined, &target)?;
        Ok(CompiledProgram { raw, streamlined, raw_report, report, rounding: self.take_rounding() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heff::reference_heff_b;
    use crate::oracle::{BooleanOracle, PhaseOracle};
    use crate::pulse::program_unitary;
    use crate::spin_algebra::DenseOperator;

    const DELTA: f64 = 81.75e-6;

    fn glycine() -> SpinSystem {
        SpinSystem::glycine()
    }

    fn zz_target(m: usize, spins: &[usize], theta: f64) -> DenseOperator {
        let f: Vec<(usize, Axis)> = spins.iter().map(|&s| (s, Axis::Z)).collect();
        let c = (1u64 << (spins.len() - 1)) as f64;
        let h = OperatorSum::from_terms(m, [ProductOperatorTerm::from_factors(m, c, &f)]).unwrap();
        exp_commuting_zsum(&h, theta).unwrap()
    }

    fn assert_realizes(p: &PulseProgram, target: &DenseOperator) {
        let (d, _) = program_unitary(p).unwrap().phase_aligned_distance(target).unwrap();
        assert!(d < 1e-9, "distance {d}");
    }

    #[test]
    fn direct_delay_lengths() {
        let sys = glycine();
        let c = Compiler::new(&sys);
        let p = c.compile_bilinear(2, 3, FRAC_PI_2).unwrap();
        assert_eq!(p.events.len(), 1);
        assert!((p.total_duration() - 1.0 / (2.0 * 67.7)).abs() < 1e-15);
        assert!((p.total_duration() - 7.386e-3).abs() < 1e-6);
        let p = c.compile_bilinear(1, 2, FRAC_PI_2).unwrap();
        assert!((p.total_duration() - 7.669e-3).abs() < 1e-6);
        assert!(c.compile_bilinear(1, 2, 0.0).unwrap().is_empty());
    }

    #[test]
    fn bilinear_signs_and_relays_match_dense() {
        let sys = glycine();
        let c = Compiler::new(&sys);
        for theta in [0.3, -0.7, FRAC_PI_2, -PI / 4.0, PI] {
            for (k, l) in [(1, 2), (1, 3), (2, 3), (2, 4), (1, 4), (3, 4)] {
                let p = c.compile_bilinear(k, l, theta).unwrap();
                p.validate(&sys).unwrap();
                assert_realizes(&p, &zz_target(4, &[k, l], theta));
            }
        }
    }

    #[test]
    fn relay_choices() {
        let sys = glycine();
        let c = Compiler::new(&sys);
        assert_eq!(c.find_relay(1, 4), Some(2));
        assert_eq!(c.find_relay(3, 4), Some(2));
        let direct = c.compile_bilinear(1, 2, 0.4).unwrap();
        assert_eq!(c.compile_relayed_bilinear(1, 2, 0.4, Some(1)).unwrap(), direct);
        assert!(matches!(c.compile_relayed_bilinear(1, 4, 0.4, Some(1)), Err(Error::InvalidRelay { .. })));
        assert!(matches!(c.compile_relayed_bilinear(1, 4, 0.4, Some(3)), Err(Error::InvalidRelay { .. })));
        let uncoupled = SpinSystem::uncoupled(3);
        let c = Compiler::new(&uncoupled);
        assert!(matches!(c.compile_bilinear(1, 3, 0.4), Err(Error::NoRelay(1, 3))));
        assert!(matches!(c.compile_bilinear(2, 2, 0.4), Err(Error::SameSpin(2))));
    }

    #[test]
    fn trilinear_matches_dense() {
        let sys = glycine();
        let c = Compiler::new(&sys);
        assert_eq!(c.trilinear_plan([1, 2, 3]).unwrap(), (1, 3, 2));
        for spins in [[1, 2, 3], [2, 3, 4], [1, 2, 4], [1, 3, 4]] {
            for theta in [-PI / 4.0, 0.9] {
                let p = c.compile_trilinear(spins, theta).unwrap();
                p.validate(&sys).unwrap();
                assert_realizes(&p, &zz_target(4, &spins, theta));
            }
        }
        assert!(c.compile_trilinear([1, 2, 3], 0.0).unwrap().is_empty());
        let chain = SpinSystem::uncoupled(3).with_coupling(1, 2, 50.0).unwrap();
        assert!(matches!(Compiler::new(&chain).compile_trilinear([1, 2, 3], 0.5), Err(Error::UnsupportedTopology(_))));
    }

    #[test]
    fn linear_terms_go_to_frame() {
        let sys = glycine();
        let c = Compiler::new(&sys);
        let tau = 0.01;
        let term = ProductOperatorTerm::from_factors(4, -3.0 * PI / (4.0 * tau), &[(1, Axis::Z)]);
        let p = c.compile_term(&term, tau).unwrap();
        assert_eq!(p.event_count(), 0);
        assert_eq!(p.total_duration(), 0.0);
        assert!((p.phase_frame[0] + 3.0 * PI / 4.0).abs() < 1e-15);
        let twice = p.clone().then(p);
        assert!((twice.phase_frame[0] + 1.5 * PI).abs() < 1e-15);
        assert!(c.compile_linear(2, 0.0).unwrap().is_empty());
    }

    #[test]
    fn f_b_end_to_end() {
        let sys = glycine();
        let c = Compiler::new(&sys);
        let tau = 1.0;
        let out = c.compile_hamiltonian(&reference_heff_b(tau), tau).unwrap();
        let cu = BooleanOracle::parse("x2 x3 ^ x4", 3).unwrap().controlled_unitary().unwrap();
        assert!(out.raw_report.pass && out.report.pass);
        assert!(verify(&out.streamlined, &cu).unwrap().pass);
        assert!(verify(&out.raw, &cu).unwrap().pass);
        assert!(out.streamlined.event_count() < out.raw.event_count());
        out.raw.validate(&sys).unwrap();
        out.streamlined.validate(&sys).unwrap();
        assert!(out.rounding.is_empty());
    }

    #[test]
    fn weight_four_is_rejected() {
        let sys = glycine();
        let h = OperatorSum::from_terms(
            4,
            [ProductOperatorTerm::from_factors(4, 1.0, &[(1, Axis::Z), (2, Axis::Z), (3, Axis::Z), (4, Axis::Z)])],
        )
        .unwrap();
        match Compiler::new(&sys).compile_hamiltonian(&h, 1.0) {
            Err(Error::TermWeight(s)) => assert_eq!(s, "I1z*I2z*I3z*I4z"),
            other => panic!("unexpected {other:?}"),
        }
        let x = OperatorSum::from_terms(4, [ProductOperatorTerm::from_factors(4, 1.0, &[(1, Axis::X)])]).unwrap();
        assert!(matches!(Compiler::new(&sys).compile_hamiltonian(&x, 1.0), Err(Error::NonZTerm(_))));
    }

    #[test]
    fn empty_hamiltonian() {
        let sys = glycine();
        let out = Compiler::new(&sys).compile_hamiltonian(&OperatorSum::zero(4), 1.0).unwrap();
        assert!(out.streamlined.is_empty());
        assert_eq!(out.report.distance, 0.0);
    }

    #[test]
    fn grid_mode_rounds_to_delta() {
        let sys = glycine();
        let c = Compiler::new(&sys).with_grid(Some(DELTA));
        for (k, l) in [(1, 2), (1, 3), (2, 3)] {
            let p = c.compile_bilinear(k, l, FRAC_PI_2).unwrap();
            p.validate(&sys).unwrap();
            let r = c.take_rounding();
            assert_eq!(r.len(), 1);
            let ideal = 1.0 / (2.0 * sys.coupling(k, l));
            assert!((r[0].rounded - ideal).abs() <= DELTA / 2.0 + 1e-15);
            let q = r[0].rounded / DELTA;
            assert!((q - q.round()).abs() < 1e-9);
        }
        let out = c.compile_hamiltonian(&reference_heff_b(1.0), 1.0).unwrap();
        out.streamlined.validate(&sys).unwrap();
        assert!(!out.rounding.is_empty());
    }
}
