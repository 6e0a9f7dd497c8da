//! High-temperature thermal density operator and the algorithm's initial
//! states.
//!
//! Everything here is first order in `alpha_l = hbar omega_l / kT`: the
//! Boltzmann factor `exp(-H/kT)` is replaced by `1 - H/kT`. `|alpha_l| << 1`
//! is assumed and not enforced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_algebra::{conjugate, matrix_to_terms, y90, Axis, OperatorSum, ProductOperatorTerm, SpinSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    /// Per-spin polarization factors, spin 1 first.
    pub alphas: Vec<f64>,
    /// Drop the `1/N` identity term from produced states.
    pub reduced_mode: bool,
}

impl ThermalParams {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidSystem(format!("non-finite alpha {a}")));
        }
        Ok(Self { alphas, reduced_mode: false })
    }

    /// `alpha_l = 1` on every spin.
    pub fn unit(m: usize) -> Self {
        Self { alphas: vec![1.0; m], reduced_mode: false }
    }

    pub fn reduced(mut self) -> Self {
        self.reduced_mode = true;
        self
    }

    pub fn alpha1(&self) -> f64 {
        self.alphas.first().copied().unwrap_or(1.0)
    }

    fn check(&self, sys: &SpinSystem) -> Result<()> {
        if self.alphas.len() != sys.spins() {
            return Err(Error::SpinCount { expected: sys.spins(), got: self.alphas.len() });
        }
        Ok(())
    }
}

/// `F_z = sum_l I_lz`.
pub fn total_z(m: usize) -> OperatorSum {
    OperatorSum::from_terms(m, (1..=m).map(|l| ProductOperatorTerm::from_factors(m, 1.0, &[(l, Axis::Z)])))
        .expect("consistent spin count")
}

/// `I_{spin,axis}` as a one-term sum.
pub fn single_spin(m: usize, spin: usize, axis: Axis) -> OperatorSum {
    OperatorSum::from_terms(m, [ProductOperatorTerm::from_factors(m, 1.0, &[(spin, axis)])])
        .expect("consistent spin count")
}

/// `(1/N)(1 - sum_l alpha_l I_lz)`; the identity term is omitted in reduced mode.
pub fn thermal_state(sys: &SpinSystem, p: &ThermalParams) -> Result<OperatorSum> {
    p.check(sys)?;
    let m = sys.spins();
    let inv_n = 1.0 / (1u64 << m) as f64;
    let identity = (!p.reduced_mode).then(|| ProductOperatorTerm::identity(m, inv_n));
    let zs = p
        .alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| ProductOperatorTerm::from_factors(m, -a * inv_n, &[(i + 1, Axis::Z)]));
    OperatorSum::from_terms(m, identity.into_iter().chain(zs))
}

/// `(1/N)(1 + alpha_1 I_1z)`.
///
/// Idealized preparation: a non-unitary filter keeping only spin 1's
/// polarization, written with the `+alpha_1` sign of the initial state
/// rather than the `-alpha_l` of the equilibrium expansion.
pub fn prepare_rho0(sys: &SpinSystem, p: &ThermalParams) -> Result<OperatorSum> {
    p.check(sys)?;
    let m = sys.spins();
    let inv_n = 1.0 / (1u64 << m) as f64;
    let identity = (!p.reduced_mode).then(|| ProductOperatorTerm::identity(m, inv_n));
    let z1 = ProductOperatorTerm::from_factors(m, p.alpha1() * inv_n, &[(1, Axis::Z)]);
    OperatorSum::from_terms(m, identity.into_iter().chain([z1]))
}

/// Applies a `90 deg` y pulse to spin 1, turning `I_1z` into `I_1x`.
pub fn prepare_rho1(rho0: &OperatorSum) -> Result<OperatorSum> {
    let m = rho0.spins();
    let u = y90(m, 1)?;
    matrix_to_terms(&conjugate(&u, &rho0.to_matrix()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::{expectation, DenseOperator};

    #[test]
    fn single_spin_thermal_diagonal() {
        let sys = SpinSystem::uncoupled(1);
        let rho = thermal_state(&sys, &ThermalParams::unit(1)).unwrap().to_matrix().unwrap();
        // (1 - 1/2)/2 and (1 + 1/2)/2
        assert!(rho.approx_eq(&DenseOperator::from_real_diagonal(&[0.25, 0.75]).unwrap(), 1e-15));
    }

    #[test]
    fn thermal_unit_trace() {
        for m in 1..=6 {
            let sys = SpinSystem::uncoupled(m);
            let rho = thermal_state(&sys, &ThermalParams::unit(m)).unwrap().to_matrix().unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rho0_ignores_other_alphas() {
        let sys = SpinSystem::uncoupled(3);
        let a = prepare_rho0(&sys, &ThermalParams::new(vec![0.4, 1.0, 2.0]).unwrap()).unwrap();
        let b = prepare_rho0(&sys, &ThermalParams::new(vec![0.4, -7.0, 0.1]).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rho0_four_spins_traceless_part() {
        let sys = SpinSystem::uncoupled(4);
        let rho0 = prepare_rho0(&sys, &ThermalParams::unit(4)).unwrap();
        let expected = single_spin(4, 1, Axis::Z).scale(1.0 / 16.0);
        assert!(rho0.traceless_part().max_coefficient_diff(&expected) < 1e-15);
    }

    #[test]
    fn rho0_fz_expectation() {
        for m in 1..=5 {
            let sys = SpinSystem::uncoupled(m);
            let p = ThermalParams::new(vec![0.7; m]).unwrap();
            let rho0 = prepare_rho0(&sys, &p).unwrap().to_matrix().unwrap();
            let fz = total_z(m).to_matrix().unwrap();
            assert!((expectation(&fz, &rho0).unwrap() - 0.7 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rho1_is_i1x_and_rotation_round_trips() {
        let sys = SpinSystem::uncoupled(3);
        let rho0 = prepare_rho0(&sys, &ThermalParams::unit(3)).unwrap();
        let rho1 = prepare_rho1(&rho0).unwrap();
        let expected = single_spin(3, 1, Axis::X).scale(1.0 / 8.0);
        assert!(rho1.traceless_part().max_coefficient_diff(&expected) < 1e-12);

        let u = y90(3, 1).unwrap();
        let mut m = rho0.to_matrix().unwrap();
        for _ in 0..2 {
            m = conjugate(&u, &m).unwrap();
        }
        for _ in 0..2 {
            m = conjugate(&u.adjoint(), &m).unwrap();
        }
        assert!(m.approx_eq(&rho0.to_matrix().unwrap(), 1e-12));
    }

    #[test]
    fn alpha_count_must_match() {
        let sys = SpinSystem::uncoupled(3);
        assert!(matches!(
            thermal_state(&sys, &ThermalParams::unit(2)),
            Err(Error::SpinCount { expected: 3, got: 2 })
        ));
    }
}
