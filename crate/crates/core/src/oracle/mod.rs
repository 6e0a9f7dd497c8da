//! Boolean functions under the Deutsch-Jozsa promise and their phase
//! oracles `U_f |j> = (-1)^f(j) |j>`.
//!
//! Input `j` packs the variables with `x2` as the most significant bit:
//! `j = sum_k x_k 2^(n+1-k)`, mirroring spins 2..n+1 of the register.

mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse_expr, Expr};

use crate::error::{Error, Result};
use crate::spin_algebra::{DenseOperator, CHECK_TOL, MAX_DENSE_SPINS};

/// Input bits allowed so that the controlled oracle fits the dense backend.
pub const MAX_INPUT_BITS: usize = MAX_DENSE_SPINS - 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BooleanOracle {
    n: usize,
    table: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionClass {
    Constant0,
    Constant1,
    Balanced,
    Neither,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionClass::Constant0 => "constant-0",
            FunctionClass::Constant1 => "constant-1",
            FunctionClass::Balanced => "balanced",
            FunctionClass::Neither => "neither",
        })
    }
}

impl BooleanOracle {
    pub fn from_table(n: usize, table: Vec<bool>) -> Result<Self> {
        if n > MAX_INPUT_BITS {
            return Err(Error::InvalidTable(format!("{n} input bits exceeds the limit of {MAX_INPUT_BITS}")));
        }
        if table.len() != 1 << n {
            return Err(Error::InvalidTable(format!("expected {} entries for n = {n}, got {}", 1 << n, table.len())));
        }
        Ok(Self { n, table })
    }

    /// Parses a bit string such as `"01010110"`; `n` is inferred from its length.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let table = bits
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidTable(format!("invalid character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if table.is_empty() || !table.len().is_power_of_two() {
            return Err(Error::InvalidTable(format!("length {} is not a power of two", table.len())));
        }
        Self::from_table(table.len().trailing_zeros() as usize, table)
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        Self::from_table(n, vec![value; 1 << n])
    }

    /// Truth table of an expression over `x2 .. x{n+1}`.
    pub fn parse(expr: &str, n: usize) -> Result<Self> {
        if n > MAX_INPUT_BITS {
            return Err(Error::InvalidTable(format!("{n} input bits exceeds the limit of {MAX_INPUT_BITS}")));
        }
        let e = parse_expr(expr, n)?;
        let table = (0..1usize << n).map(|j| e.eval(&input_bits(j, n))).collect();
        Self::from_table(n, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, j: usize) -> bool {
        self.table[j]
    }

    pub fn ones(&self) -> usize {
        self.table.iter().filter(|&&b| b).count()
    }

    pub fn to_bits(&self) -> String {
        self.table.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// `[x2, x3, ..., x{n+1}]` for input index `j`.
pub fn input_bits(j: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (j >> (n - 1 - i)) & 1 == 1).collect()
}

/// Alias for [`BooleanOracle::parse`].
pub fn parse_function(expr: &str, n: usize) -> Result<BooleanOracle> {
    BooleanOracle::parse(expr, n)
}

pub fn classify(f: &BooleanOracle) -> FunctionClass {
    let ones = f.ones();
    let len = f.table.len();
    if ones == 0 {
        FunctionClass::Constant0
    } else if ones == len {
        FunctionClass::Constant1
    } else if 2 * ones == len {
        FunctionClass::Balanced
    } else {
        FunctionClass::Neither
    }
}

/// Diagonal `2^n` unitary with entries `(-1)^f(j)`.
pub fn u_f(f: &BooleanOracle) -> Result<DenseOperator> {
    let diag: Vec<f64> = f.table.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
    DenseOperator::from_real_diagonal(&diag)
}

/// `|0><0| x 1 + |1><1| x U` with the control on spin 1.
pub fn controlled_u(u: &DenseOperator) -> Result<DenseOperator> {
    let dev = u.unitarity_deviation();
    if dev > CHECK_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let d = u.dim();
    let mut out = DenseOperator::identity(2 * d)?;
    for r in 0..d {
        for c in 0..d {
            out.set(d + r, d + c, u.get(r, c));
        }
    }
    Ok(out)
}

/// A black-box controlled phase oracle. The algorithm only ever sees this
/// interface, never a truth table.
pub trait PhaseOracle {
    fn input_bits(&self) -> usize;
    fn controlled_unitary(&self) -> Result<DenseOperator>;
}

impl PhaseOracle for BooleanOracle {
    fn input_bits(&self) -> usize {
        self.n
    }

    fn controlled_unitary(&self) -> Result<DenseOperator> {
        controlled_u(&u_f(self)?)
    }
}

#[cfg(test)]
pub(crate) fn real_diagonal(u: &DenseOperator) -> Vec<f64> {
    u.diagonal().iter().map(|c| c.re).collect()
}
