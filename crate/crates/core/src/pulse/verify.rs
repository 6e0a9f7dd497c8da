//! Ideal simulation of pulse programs against a dense target.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{PulseAxis, PulseEvent, PulseProgram};
use crate::error::Result;
use crate::spin_algebra::{
    exp_commuting_zsum, rotation, z_rotation, zz_rotation, Axis, DenseOperator, OperatorSum, ProductOperatorTerm,
};

pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Frobenius distance after global-phase alignment.
    pub distance: f64,
    /// Aligning global phase, radians.
    pub phase: f64,
    pub pass: bool,
}

fn event_unitary(m: usize, event: &PulseEvent) -> Result<Option<DenseOperator>> {
    Ok(match event {
        PulseEvent::Rotation { spin, axis: PulseAxis::Transverse(phase), angle, .. } => {
            Some(rotation(m, *spin, *phase, *angle)?)
        }
        PulseEvent::Rotation { spin, axis: PulseAxis::Z, angle, .. } => Some(z_rotation(m, *spin, *angle)?),
        PulseEvent::Delay { duration, active_couplings, .. } => {
            // exp(-i 2 pi J t I_kz I_lz) per active pair
            let terms = active_couplings.iter().map(|c| {
                ProductOperatorTerm::from_factors(m, 2.0 * std::f64::consts::PI * c.j_hz, &[(c.k, Axis::Z), (c.l, Axis::Z)])
            });
            Some(exp_commuting_zsum(&OperatorSum::from_terms(m, terms)?, *duration)?)
        }
        PulseEvent::Barrier { .. } => None,
    })
}

/// `Z(frame) E_n ... E_1`.
pub fn program_unitary(p: &PulseProgram) -> Result<DenseOperator> {
    let m = p.spins();
    let mut u = DenseOperator::identity_spins(m)?;
    for event in &p.events {
        if let Some(e) = event_unitary(m, event)? {
            u = e.matmul(&u)?;
        }
    }
    for (i, &angle) in p.phase_frame.iter().enumerate() {
        if angle != 0.0 {
            u = z_rotation(m, i + 1, angle)?.matmul(&u)?;
        }
    }
    Ok(u)
}

pub fn verify(p: &PulseProgram, target: &DenseOperator) -> Result<FidelityReport> {
    let (distance, phase) = program_unitary(p)?.phase_aligned_distance(target)?;
    Ok(FidelityReport { distance, phase, pass: distance < VERIFY_TOL })
}

fn product(factors: &[DenseOperator]) -> Result<DenseOperator> {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = acc.matmul(f)?;
    }
    Ok(acc)
}

/// `V = Rx_k(pi/2) ZZ_kr(pi/2) Ry_k(pi/2) Rx_r(pi/2) ZZ_kr(pi/2) Ry_r(pi/2)`
/// as a matrix product, so `V I_rz I_lz V^-1 = I_kz I_lz` for any `l`.
pub fn relay_conjugator(m: usize, k: usize, r: usize) -> Result<DenseOperator> {
    let q = FRAC_PI_2;
    product(&[
        rotation(m, k, 0.0, q)?,
        zz_rotation(m, k, r, q)?,
        rotation(m, k, q, q)?,
        rotation(m, r, 0.0, q)?,
        zz_rotation(m, k, r, q)?,
        rotation(m, r, q, q)?,
    ])
}

/// `W = Rx_p(pi/2) ZZ_pw(pi/2) Ry_p(pi/2)`, so
/// `W I_pz I_iz W^-1 = 2 I_pz I_iz I_wz`.
pub fn trilinear_conjugator(m: usize, p: usize, w: usize) -> Result<DenseOperator> {
    let q = FRAC_PI_2;
    product(&[rotation(m, p, 0.0, q)?, zz_rotation(m, p, w, q)?, rotation(m, p, q, q)?])
}
