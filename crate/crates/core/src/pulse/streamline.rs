//! Peephole passes over a pulse program, iterated to a fixed point.

use std::f64::consts::{PI, TAU};

use super::compile::wrap_angle;
use super::{PulseAxis, PulseEvent, PulseProgram, ANGLE_EPS};

const PHASE_TOL: f64 = 1e-9;

/// Removes inverse rotation pairs (including equal-phase `pi` pairs),
/// moves `z` rotations into the phase frame, drops null events and merges
/// back-to-back delays. The unitary is preserved up to global phase.
pub fn streamline(p: &PulseProgram) -> PulseProgram {
    let mut out = p.clone();
    loop {
        let mut changed = absorb_z(&mut out);
        changed |= drop_null(&mut out);
        changed |= cancel_inverse_pairs(&mut out);
        changed |= merge_delays(&mut out);
        if !changed {
            return out;
        }
    }
}

fn absorb_z(p: &mut PulseProgram) -> bool {
    let mut pending = vec![0.0; p.spins()];
    let mut changed = false;
    let mut kept = Vec::with_capacity(p.events.len());
    for mut event in p.events.drain(..) {
        match event {
            PulseEvent::Rotation { spin, axis: PulseAxis::Z, angle, .. } => {
                pending[spin - 1] += angle;
                changed = true;
                continue;
            }
            PulseEvent::Rotation { spin, axis: PulseAxis::Transverse(ref mut phase), .. } => {
                *phase = (*phase - pending[spin - 1]).rem_euclid(TAU);
            }
            _ => {}
        }
        kept.push(event);
    }
    p.events = kept;
    for (f, d) in p.phase_frame.iter_mut().zip(pending) {
        *f += d;
    }
    changed
}

fn drop_null(p: &mut PulseProgram) -> bool {
    let before = p.events.len();
    p.events.retain(|e| match e {
        PulseEvent::Rotation { angle, .. } => wrap_angle(*angle).abs() >= ANGLE_EPS,
        PulseEvent::Delay { duration, .. } => *duration > 0.0,
        PulseEvent::Barrier { .. } => true,
    });
    p.events.len() != before
}

/// `+1` if the transverse axes coincide, `-1` if antiparallel, else `None`.
fn axis_relation(a: f64, b: f64) -> Option<f64> {
    let d = (b - a).rem_euclid(TAU);
    if d < PHASE_TOL || TAU - d < PHASE_TOL {
        Some(1.0)
    } else if (d - PI).abs() < PHASE_TOL {
        Some(-1.0)
    } else {
        None
    }
}

fn is_pi(angle: f64) -> bool {
    (wrap_angle(angle).abs() - PI).abs() < PHASE_TOL
}

/// Index of a parallel `pi` pulse on `spin` reachable from `i` through
/// events that either leave `spin` alone or are transverse rotations of it.
fn pi_partner(events: &[PulseEvent], removed: &[bool], i: usize, spin: usize, phase: f64) -> Option<usize> {
    for (j, event) in events.iter().enumerate().skip(i + 1) {
        if removed[j] || !event.touches(spin) {
            continue;
        }
        match *event {
            PulseEvent::Rotation { axis: PulseAxis::Transverse(ph), angle, .. } => {
                if is_pi(angle) && axis_relation(phase, ph).is_some() {
                    return Some(j);
                }
            }
            _ => return None,
        }
    }
    None
}

fn cancel_inverse_pairs(p: &mut PulseProgram) -> bool {
    let n = p.events.len();
    let mut removed = vec![false; n];
    let mut changed = false;
    for i in 0..n {
        if removed[i] {
            continue;
        }
        let PulseEvent::Rotation { spin, axis: PulseAxis::Transverse(phase), angle, .. } = p.events[i] else {
            continue;
        };
        let Some(j) = (i + 1..n).find(|&j| !removed[j] && p.events[j].touches(spin)) else {
            continue;
        };
        if let PulseEvent::Rotation { spin: s2, axis: PulseAxis::Transverse(phase2), angle: angle2, .. } = p.events[j] {
            if s2 != spin {
                continue;
            }
            if let Some(sign) = axis_relation(phase, phase2) {
                if wrap_angle(angle + sign * angle2).abs() < PHASE_TOL {
                    removed[i] = true;
                    removed[j] = true;
                    changed = true;
                    continue;
                }
            }
        }
        if is_pi(angle) {
            if let Some(end) = pi_partner(&p.events, &removed, i, spin, phase) {
                // P R_phi(a) P = -R_{2 phi0 - phi}(a) for a pi pulse P at phi0.
                for k in i + 1..end {
                    if removed[k] {
                        continue;
                    }
                    if let PulseEvent::Rotation { spin: s, axis: PulseAxis::Transverse(ref mut ph), .. } = p.events[k] {
                        if s == spin {
                            *ph = (2.0 * phase - *ph).rem_euclid(TAU);
                        }
                    }
                }
                removed[i] = true;
                removed[end] = true;
                changed = true;
            }
        }
    }
    if changed {
        let mut idx = 0;
        p.events.retain(|_| {
            let keep = !removed[idx];
            idx += 1;
            keep
        });
    }
    changed
}

fn merge_delays(p: &mut PulseProgram) -> bool {
    let mut changed = false;
    let mut kept: Vec<PulseEvent> = Vec::with_capacity(p.events.len());
    for event in p.events.drain(..) {
        if let (
            Some(PulseEvent::Delay { duration: d1, active_couplings: a1, decoupled_spins: s1 }),
            PulseEvent::Delay { duration: d2, active_couplings: a2, decoupled_spins: s2 },
        ) = (kept.last_mut(), &event)
        {
            if a1 == a2 && s1 == s2 {
                *d1 += d2;
                changed = true;
                continue;
            }
        }
        kept.push(event);
    }
    p.events = kept;
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{program_unitary, Coupling, PulseKind};
    use std::f64::consts::FRAC_PI_2;

    fn rot(spin: usize, phase: f64, angle: f64) -> PulseEvent {
        PulseEvent::Rotation { spin, axis: PulseAxis::Transverse(phase), angle, kind: PulseKind::Hard, duration: 0.0 }
    }

    fn delay(k: usize, l: usize, t: f64) -> PulseEvent {
        PulseEvent::Delay { duration: t, active_couplings: vec![Coupling { k, l, j_hz: 50.0 }], decoupled_spins: vec![] }
    }

    fn same_unitary(a: &PulseProgram, b: &PulseProgram) -> bool {
        let (d, _) = program_unitary(a).unwrap().phase_aligned_distance(&program_unitary(b).unwrap()).unwrap();
        d < 1e-9
    }

    #[test]
    fn pi_pair_cancels() {
        let mut p = PulseProgram::empty(2);
        p.events = vec![rot(2, 0.0, PI), rot(2, 0.0, PI)];
        assert!(streamline(&p).events.is_empty());
    }

    #[test]
    fn cancels_across_untouched_events() {
        let mut p = PulseProgram::empty(3);
        p.events = vec![
            rot(2, 0.0, PI),
            PulseEvent::Barrier { annotation: "A".into() },
            rot(1, 0.3, 1.0),
            delay(1, 3, 1e-3),
            rot(2, PI, PI),
        ];
        let s = streamline(&p);
        assert_eq!(s.event_count(), 2);
        assert!(same_unitary(&p, &s));
    }

    #[test]
    fn pi_pair_across_rotations() {
        let mut p = PulseProgram::empty(2);
        p.events = vec![
            rot(2, FRAC_PI_2 / 2.0, PI),
            rot(1, 0.0, FRAC_PI_2),
            rot(2, 1.2, FRAC_PI_2),
            rot(2, 0.3, 0.7),
            rot(2, FRAC_PI_2 / 2.0 + PI, PI),
        ];
        let s = streamline(&p);
        assert_eq!(s.event_count(), 3);
        assert!(same_unitary(&p, &s));
    }

    #[test]
    fn blocked_by_coupling_delay() {
        let mut p = PulseProgram::empty(2);
        p.events = vec![rot(2, 0.0, PI), delay(1, 2, 1e-3), rot(2, 0.0, PI)];
        assert_eq!(streamline(&p).event_count(), 3);
    }

    #[test]
    fn different_phases_do_not_cancel() {
        let mut p = PulseProgram::empty(1);
        p.events = vec![rot(1, 0.0, PI), rot(1, FRAC_PI_2, PI)];
        assert_eq!(streamline(&p).event_count(), 2);
    }

    #[test]
    fn z_rotations_move_to_frame() {
        let mut p = PulseProgram::empty(2);
        p.events = vec![
            rot(1, 0.0, FRAC_PI_2),
            PulseEvent::Rotation { spin: 1, axis: PulseAxis::Z, angle: 0.4, kind: PulseKind::Hard, duration: 0.0 },
            delay(1, 2, 2e-3),
            rot(1, 0.0, FRAC_PI_2),
        ];
        let s = streamline(&p);
        assert!(s.events.iter().all(|e| !matches!(e, PulseEvent::Rotation { axis: PulseAxis::Z, .. })));
        assert!((s.phase_frame[0] - 0.4).abs() < 1e-15);
        assert!(same_unitary(&p, &s));
    }

    #[test]
    fn merges_and_drops() {
        let mut p = PulseProgram::empty(2);
        p.events = vec![delay(1, 2, 1e-3), delay(1, 2, 2e-3), delay(1, 2, 0.0), rot(1, 0.0, TAU)];
        let s = streamline(&p);
        assert_eq!(s.events, vec![delay(1, 2, 3e-3)]);
        assert!(same_unitary(&p, &s));
    }
}
