//! Effective Hamiltonians `H = (i/tau) log cU` for diagonal unitaries, and
//! their expansion over `Z`-string product operators.
//!
//! The logarithm is multivalued: any diagonal phase may move by `2 pi`. The
//! canonical choice is the principal branch `phi_j = -arg(u_j)` in `(-pi, pi]`.
//! Explicit integer shifts select other branches.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_algebra::{
    check_spins, z_diagonal, Axis, DenseOperator, OperatorSum, ProductOperatorTerm, CHECK_TOL,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalHamiltonian {
    pub tau: f64,
    /// Diagonal of `H tau` (dimensionless angles).
    pub phases: Vec<f64>,
}

impl DiagonalHamiltonian {
    /// Diagonal entries of `H` itself.
    pub fn energies(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p / self.tau).collect()
    }

    /// Adds `2 pi shifts[j]` to each phase.
    pub fn with_shifts(&self, shifts: &[i64]) -> Result<Self> {
        if shifts.len() != self.phases.len() {
            return Err(Error::DimensionMismatch { left: self.phases.len(), right: shifts.len() });
        }
        let phases = self.phases.iter().zip(shifts).map(|(p, &s)| p + 2.0 * PI * s as f64).collect();
        Ok(Self { tau: self.tau, phases })
    }

    pub fn unitary(&self) -> Result<DenseOperator> {
        let d: Vec<Complex64> = self.phases.iter().map(|&p| Complex64::from_polar(1.0, -p)).collect();
        DenseOperator::from_diagonal(&d)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time must be positive, got {tau}")));
    }
    Ok(())
}

/// Principal-branch effective Hamiltonian of a diagonal unitary. `-1`
/// entries get phase `+pi`.
pub fn effective_hamiltonian(cu: &DenseOperator, tau: f64) -> Result<DiagonalHamiltonian> {
    check_tau(tau)?;
    let off = cu.max_off_diagonal();
    if off > CHECK_TOL {
        return Err(Error::NotDiagonal(off));
    }
    let dev = cu.unitarity_deviation();
    if dev > CHECK_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let phases = cu
        .diagonal()
        .iter()
        .map(|u| {
            let phi = -u.arg();
            // arg is in (-pi, pi], so -arg is in [-pi, pi); fold -pi onto +pi.
            if phi <= -PI + 1e-15 { phi + 2.0 * PI } else { phi }
        })
        .collect();
    Ok(DiagonalHamiltonian { tau, phases })
}

/// Effective Hamiltonian on a user-selected branch.
pub fn effective_hamiltonian_shifted(cu: &DenseOperator, tau: f64, shifts: &[i64]) -> Result<DiagonalHamiltonian> {
    effective_hamiltonian(cu, tau)?.with_shifts(shifts)
}

fn walsh_hadamard(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn mask_axes(mask: usize, m: usize) -> Vec<Axis> {
    (0..m).map(|i| if mask >> (m - 1 - i) & 1 == 1 { Axis::Z } else { Axis::E }).collect()
}

/// Expands `H` over `Z`-strings: `c_S = Tr(B_S H) / Tr(B_S^2)` with
/// `B_S = prod_{k in S} I_kz`.
pub fn decompose_diagonal(h: &DiagonalHamiltonian, m: usize) -> Result<OperatorSum> {
    check_spins(m)?;
    let n = 1usize << m;
    if h.phases.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: h.phases.len() });
    }
    let mut w = h.energies();
    walsh_hadamard(&mut w);
    let terms = w.iter().enumerate().map(|(mask, &v)| {
        let weight = mask.count_ones() as i32;
        // Tr(B_S H) = 2^-w WHT[S], Tr(B_S^2) = N 4^-w.
        ProductOperatorTerm::new(v * 2f64.powi(weight) / n as f64, mask_axes(mask, m))
    });
    OperatorSum::from_terms(m, terms)
}

/// A Hamiltonian with its identity term split off.
#[derive(Clone, Debug, PartialEq)]
pub struct StrippedHamiltonian {
    pub terms: OperatorSum,
    /// Coefficient of the removed identity; over time `tau` it contributes
    /// the global phase `exp(-i c tau)`.
    pub identity_coefficient: f64,
}

impl StrippedHamiltonian {
    pub fn global_phase(&self, tau: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.identity_coefficient * tau)
    }
}

pub fn drop_identity(terms: &OperatorSum) -> StrippedHamiltonian {
    StrippedHamiltonian { terms: terms.traceless_part(), identity_coefficient: terms.identity_coefficient().re }
}

/// Moves the phases by multiples of `2 pi` so the weight-`m` `Z` string
/// vanishes, when that is possible. Shifts go to the highest basis indices
/// first. Only applied for `m >= 4`; below that the full-weight term is
/// compilable anyway. Returns the shift vector used.
pub fn cancel_top_weight(h: &DiagonalHamiltonian) -> Result<(DiagonalHamiltonian, Vec<i64>)> {
    let n = h.phases.len();
    let m = n.trailing_zeros() as usize;
    let mut shifts = vec![0i64; n];
    if m < 4 {
        return Ok((h.clone(), shifts));
    }
    let parity = |j: usize| if j.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    let top: f64 = h.phases.iter().enumerate().map(|(j, p)| parity(j) * p).sum();
    let needed = -top / (2.0 * PI);
    let rounded = needed.round();
    if (needed - rounded).abs() > 1e-9 || rounded == 0.0 {
        return Ok((h.clone(), shifts));
    }
    let count = rounded.abs() as usize;
    let dir = rounded.signum() as i64;
    for j in (0..n).rev().take(count) {
        shifts[j] = dir * parity(j) as i64;
    }
    Ok((h.with_shifts(&shifts)?, shifts))
}

/// Fixture: the effective Hamiltonian chosen for `cU_{f_b}`,
/// `(pi/4tau){3/2 - 3I1z - I2z - I3z - 2I4z + 2I1zI2z + 2I1zI3z + 2I2zI3z
/// + 4I1zI4z - 4I1zI2zI3z}`.
pub fn reference_heff_b(tau: f64) -> OperatorSum {
    let s = PI / (4.0 * tau);
    let t = |c: f64, spins: &[usize]| {
        let f: Vec<(usize, Axis)> = spins.iter().map(|&k| (k, Axis::Z)).collect();
        ProductOperatorTerm::from_factors(4, c * s, &f)
    };
    OperatorSum::from_terms(
        4,
        [
            t(1.5, &[]),
            t(-3.0, &[1]),
            t(-1.0, &[2]),
            t(-1.0, &[3]),
            t(-2.0, &[4]),
            t(2.0, &[1, 2]),
            t(2.0, &[1, 3]),
            t(2.0, &[2, 3]),
            t(4.0, &[1, 4]),
            t(-4.0, &[1, 2, 3]),
        ],
    )
    .expect("four spins")
}

/// Rebuilds the diagonal of a `Z`-only sum (real part).
pub fn reconstruct_diagonal(terms: &OperatorSum) -> Result<Vec<f64>> {
    Ok(z_diagonal(terms)?.iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{BooleanOracle, PhaseOracle};
    use crate::spin_algebra::exp_commuting_zsum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cu_fb() -> DenseOperator {
        BooleanOracle::parse("x2 x3 ^ x4", 3).unwrap().controlled_unitary().unwrap()
    }

    #[test]
    fn identity_has_zero_phases() {
        let h = effective_hamiltonian(&DenseOperator::identity(8).unwrap(), 1.0).unwrap();
        assert!(h.phases.iter().all(|&p| p == 0.0));
        assert!(decompose_diagonal(&h, 3).unwrap().is_empty());
    }

    #[test]
    fn f_b_principal_phases() {
        let h = effective_hamiltonian(&cu_fb(), 2.0).unwrap();
        let mut expected = vec![0.0; 16];
        for j in [9, 11, 13, 14] {
            expected[j] = PI;
        }
        assert_eq!(h.phases, expected);
    }

    #[test]
    fn rejects_non_diagonal() {
        let u = crate::spin_algebra::rotation(2, 1, 0.0, 0.5).unwrap();
        assert!(matches!(effective_hamiltonian(&u, 1.0), Err(Error::NotDiagonal(_))));
        assert!(matches!(effective_hamiltonian(&DenseOperator::identity(2).unwrap(), 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn principal_round_trip() {
        let tau = 0.013;
        let h = effective_hamiltonian(&cu_fb(), tau).unwrap();
        let terms = decompose_diagonal(&h, 4).unwrap();
        let u = exp_commuting_zsum(&terms, tau).unwrap();
        let (d, _) = u.phase_aligned_distance(&cu_fb()).unwrap();
        assert!(d < 1e-10);
    }

    #[test]
    fn random_diagonal_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let phases: Vec<f64> = (0..8).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let h = DiagonalHamiltonian { tau: 0.5, phases };
            let terms = decompose_diagonal(&h, 3).unwrap();
            let rebuilt = reconstruct_diagonal(&terms).unwrap();
            for (a, b) in rebuilt.iter().zip(h.energies()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_fixture_is_shifted_branch() {
        // The fixture's diagonal equals the principal branch plus 2 pi on the
        // last entry, and the top-weight cancellation finds that shift.
        let tau = 1.0;
        let h = effective_hamiltonian(&cu_fb(), tau).unwrap();
        let (auto, shifts) = cancel_top_weight(&h).unwrap();
        let mut expected = vec![0i64; 16];
        expected[15] = 1;
        assert_eq!(shifts, expected);
        let terms = decompose_diagonal(&auto, 4).unwrap();
        assert!(terms.max_coefficient_diff(&reference_heff_b(tau)) < 1e-12);
    }

    #[test]
    fn drop_identity_counts_and_idempotence() {
        let s = drop_identity(&reference_heff_b(1.0));
        assert_eq!(s.terms.len(), 9);
        assert!((s.identity_coefficient - 1.5 * PI / 4.0).abs() < 1e-15);
        let again = drop_identity(&s.terms);
        assert_eq!(again.terms, s.terms);
        assert_eq!(again.identity_coefficient, 0.0);

        let only_id = OperatorSum::from_terms(2, [ProductOperatorTerm::identity(2, 0.7)]).unwrap();
        let s = drop_identity(&only_id);
        assert!(s.terms.is_empty());
        assert!((s.global_phase(2.0) - Complex64::from_polar(1.0, -1.4)).norm() < 1e-15);
    }

    #[test]
    fn decomposed_terms_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=4 {
            let phases: Vec<f64> = (0..1 << m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let terms = decompose_diagonal(&DiagonalHamiltonian { tau: 1.0, phases }, m).unwrap();
            let mats: Vec<_> = terms
                .terms()
                .iter()
                .map(|t| OperatorSum::from_terms(m, [t.clone()]).unwrap().to_matrix().unwrap())
                .collect();
            for a in &mats {
                for b in &mats {
                    assert!(a.commutator(b).unwrap().frobenius_norm() < 1e-12);
                }
            }
        }
    }
}
