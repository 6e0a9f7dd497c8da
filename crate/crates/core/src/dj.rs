//! Thermal-state Deutsch-Jozsa: apply `cU_f` to `rho_1 = (1/N)(1 + alpha_1 I_1x)`
//! and read the decision off `<I_1x>`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{BooleanOracle, PhaseOracle};
use crate::spin_algebra::{
    conjugate, expectation, matrix_to_terms, Axis, DenseOperator, OperatorSum, SpinSystem,
};
use crate::thermal::{single_spin, ThermalParams};

/// Relative decision tolerance, scaled by `|alpha_1|`.
pub const DECISION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DjDecision {
    Constant0,
    Constant1,
    Balanced,
    Indeterminate,
}

impl fmt::Display for DjDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DjDecision::Constant0 => "constant-0",
            DjDecision::Constant1 => "constant-1",
            DjDecision::Balanced => "balanced",
            DjDecision::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DjOutcome {
    /// `Tr(I_1x rho_2)`.
    pub expectation: f64,
    pub decision: DjDecision,
    /// Traceless part of `rho_2` without the `1/N` prefactor, i.e.
    /// `alpha_1 cU_f I_1x cU_f^dagger` in product operators.
    pub rho2_terms: OperatorSum,
}

/// Maps `<I_1x>` onto `{alpha_1/4, -alpha_1/4, 0}` or `Indeterminate`.
pub fn decide(expectation: f64, alpha1: f64) -> DjDecision {
    let tol = DECISION_TOL * alpha1.abs();
    if alpha1 == 0.0 {
        DjDecision::Indeterminate
    } else if (expectation - alpha1 / 4.0).abs() < tol {
        DjDecision::Constant0
    } else if (expectation + alpha1 / 4.0).abs() < tol {
        DjDecision::Constant1
    } else if expectation.abs() < tol {
        DjDecision::Balanced
    } else {
        DjDecision::Indeterminate
    }
}

pub fn run_dj(sys: &SpinSystem, f: &BooleanOracle, p: &ThermalParams) -> Result<DjOutcome> {
    run_dj_with(sys, f, p)
}

/// Runs the algorithm against a black-box oracle; `controlled_unitary` is
/// queried exactly once.
pub fn run_dj_with<O: PhaseOracle + ?Sized>(sys: &SpinSystem, oracle: &O, p: &ThermalParams) -> Result<DjOutcome> {
    let m = oracle.input_bits() + 1;
    if sys.spins() != m {
        return Err(Error::SpinCount { expected: m, got: sys.spins() });
    }
    if p.alphas.len() != m {
        return Err(Error::SpinCount { expected: m, got: p.alphas.len() });
    }
    let alpha1 = p.alpha1();
    let n_dim = 1usize << m;
    let i1x = single_spin(m, 1, Axis::X).to_matrix()?;
    let cu = oracle.controlled_unitary()?;
    let evolved = conjugate(&cu, &i1x)?;
    let rho2 = DenseOperator::identity(n_dim)?
        .add(&evolved.scale(alpha1.into()))?
        .scale((1.0 / n_dim as f64).into());
    let value = expectation(&i1x, &rho2)?;
    Ok(DjOutcome {
        expectation: value,
        decision: decide(value, alpha1),
        rho2_terms: matrix_to_terms(&evolved)?.scale(alpha1),
    })
}

/// `(alpha_1/4) (2^n - 2 ones(f)) / 2^n`.
pub fn closed_form_expectation(f: &BooleanOracle, alpha1: f64) -> f64 {
    let len = f.table().len() as f64;
    alpha1 / 4.0 * (len - 2.0 * f.ones() as f64) / len
}

/// `cU_f I_1x cU_f^dagger` as product operators.
pub fn rho2_product_operators(f: &BooleanOracle) -> Result<OperatorSum> {
    let m = f.n() + 1;
    let cu = f.controlled_unitary()?;
    let evolved = conjugate(&cu, &single_spin(m, 1, Axis::X).to_matrix()?)?;
    Ok(matrix_to_terms(&evolved)?.traceless_part())
}

/// One `|0,j><1,j|` / `|1,j><0,j|` pair of the `I_1x` expansion, as basis indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OuterPair {
    pub j: usize,
    pub control_zero: usize,
    pub control_one: usize,
}

/// The `2^(m-1)` pairs with `I_1x = 1/2 sum_j (|0,j><1,j| + |1,j><0,j|)`.
pub fn outer_product_expansion(m: usize) -> Vec<OuterPair> {
    let half = 1usize << (m - 1);
    (0..half).map(|j| OuterPair { j, control_zero: j, control_one: half + j }).collect()
}

/// Sums the outer products back into a dense matrix.
pub fn outer_product_matrix(m: usize, pairs: &[OuterPair]) -> Result<DenseOperator> {
    let mut out = DenseOperator::zeros(1 << m)?;
    for p in pairs {
        out.set(p.control_zero, p.control_one, 0.5.into());
        out.set(p.control_one, p.control_zero, 0.5.into());
    }
    Ok(out)
}
