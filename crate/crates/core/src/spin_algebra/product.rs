//! Product operators: tensor products of `E` (identity) and `I_x`, `I_y`,
//! `I_z = sigma/2` factors, and canonical sums of them.
//!
//! Coefficients are always explicit. The operator written `2 I1z I2z` is the
//! term with coefficient `2` and axes `[Z, Z]`; no power of two is implied by
//! the axes. An all-`E` term with coefficient `c` is `c` times the identity.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{check_spins, spins_for_dim, DenseOperator};
use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped from sums.
pub const PRUNE_TOL: f64 = 1e-12;

/// Single-spin factor of a product operator. Ordering `E < X < Y < Z` is
/// the canonical ordering of terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    E,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn symbol(self) -> char {
        match self {
            Axis::E => 'E',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    /// Entry `<row|factor|col>` for single-spin basis bits.
    fn entry(self, row: usize, col: usize) -> Complex64 {
        match (self, row, col) {
            (Axis::E, a, b) if a == b => Complex64::new(1.0, 0.0),
            (Axis::X, a, b) if a != b => Complex64::new(0.5, 0.0),
            (Axis::Y, 0, 1) => Complex64::new(0.0, -0.5),
            (Axis::Y, 1, 0) => Complex64::new(0.0, 0.5),
            (Axis::Z, 0, 0) => Complex64::new(0.5, 0.0),
            (Axis::Z, 1, 1) => Complex64::new(-0.5, 0.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    fn flips(self) -> bool {
        matches!(self, Axis::X | Axis::Y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductOperatorTerm {
    pub coefficient: Complex64,
    pub axes: Vec<Axis>,
}

impl ProductOperatorTerm {
    pub fn new(coefficient: impl Into<Complex64>, axes: Vec<Axis>) -> Self {
        Self { coefficient: coefficient.into(), axes }
    }

    /// Term built from `(spin, axis)` factors, spins 1-indexed; unlisted
    /// spins get `E`.
    pub fn from_factors(m: usize, coefficient: impl Into<Complex64>, factors: &[(usize, Axis)]) -> Self {
        let mut axes = vec![Axis::E; m];
        for &(spin, axis) in factors {
            axes[spin - 1] = axis;
        }
        Self::new(coefficient, axes)
    }

    pub fn identity(m: usize, coefficient: impl Into<Complex64>) -> Self {
        Self::new(coefficient, vec![Axis::E; m])
    }

    pub fn spins(&self) -> usize {
        self.axes.len()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.axes.iter().filter(|&&a| a != Axis::E).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn is_z_string(&self) -> bool {
        self.axes.iter().all(|&a| matches!(a, Axis::E | Axis::Z))
    }

    /// 1-indexed spins carrying `axis`.
    pub fn spins_with(&self, axis: Axis) -> Vec<usize> {
        self.axes.iter().enumerate().filter(|(_, &a)| a == axis).map(|(i, _)| i + 1).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        self.axes.iter().enumerate().filter(|(_, &a)| a != Axis::E).map(|(i, _)| i + 1).collect()
    }

    /// Mask of Z factors with spin 1 as the most significant bit.
    pub fn z_mask(&self) -> usize {
        let m = self.axes.len();
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == Axis::Z)
            .fold(0, |acc, (i, _)| acc | (1 << (m - 1 - i)))
    }

    fn flip_mask(&self) -> usize {
        let m = self.axes.len();
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.flips())
            .fold(0, |acc, (i, _)| acc | (1 << (m - 1 - i)))
    }

    /// The single nonzero entry in `row`: `(column, value)`. Every product
    /// operator has exactly one nonzero entry per row.
    pub(crate) fn row_entry(&self, row: usize) -> (usize, Complex64) {
        let m = self.axes.len();
        let col = row ^ self.flip_mask();
        let mut value = self.coefficient;
        for (i, axis) in self.axes.iter().enumerate() {
            let shift = m - 1 - i;
            value *= axis.entry((row >> shift) & 1, (col >> shift) & 1);
        }
        (col, value)
    }

    /// Formats the axes as `I1x*I4z` (or `1` for the identity).
    pub fn operator_string(&self) -> String {
        let parts: Vec<String> = self
            .axes
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != Axis::E)
            .map(|(i, a)| format!("I{}{}", i + 1, a.symbol().to_ascii_lowercase()))
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

pub(crate) fn format_coefficient(c: Complex64) -> String {
    if c.im.abs() <= PRUNE_TOL {
        format_real(c.re)
    } else if c.re.abs() <= PRUNE_TOL {
        format!("{}i", format_real(c.im))
    } else {
        format!("({}{:+}i)", format_real(c.re), c.im)
    }
}

pub(crate) fn format_real(x: f64) -> String {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        format!("{}", r as i64)
    } else {
        let s = format!("{:.10}", x);
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl fmt::Display for ProductOperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", format_coefficient(self.coefficient), self.operator_string())
    }
}

/// Canonical sum of product operators over a fixed number of spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSum {
    spins: usize,
    terms: Vec<ProductOperatorTerm>,
}

impl OperatorSum {
    pub fn zero(spins: usize) -> Self {
        Self { spins, terms: Vec::new() }
    }

    /// Canonicalizes: merges equal axes, prunes near-zero coefficients and
    /// sorts terms lexicographically by axes.
    pub fn from_terms(spins: usize, terms: impl IntoIterator<Item = ProductOperatorTerm>) -> Result<Self> {
        let mut acc: BTreeMap<Vec<Axis>, Complex64> = BTreeMap::new();
        for term in terms {
            if term.axes.len() != spins {
                return Err(Error::AxesLength { expected: spins, got: term.axes.len() });
            }
            *acc.entry(term.axes).or_insert(Complex64::new(0.0, 0.0)) += term.coefficient;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .map(|(axes, coefficient)| ProductOperatorTerm { coefficient, axes })
            .collect();
        Ok(Self { spins, terms })
    }

    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn terms(&self) -> &[ProductOperatorTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, axes: &[Axis]) -> Complex64 {
        self.terms
            .binary_search_by(|t| t.axes.as_slice().cmp(axes))
            .map(|i| self.terms[i].coefficient)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&vec![Axis::E; self.spins])
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.spins != self.spins {
            return Err(Error::SpinCount { expected: self.spins, got: other.spins });
        }
        Self::from_terms(self.spins, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let factor = factor.into();
        Self::from_terms(
            self.spins,
            self.terms.iter().map(|t| ProductOperatorTerm { coefficient: t.coefficient * factor, axes: t.axes.clone() }),
        )
        .expect("same spin count")
    }

    /// Same sum with the all-`E` term removed.
    pub fn traceless_part(&self) -> Self {
        Self { spins: self.spins, terms: self.terms.iter().filter(|t| !t.is_identity()).cloned().collect() }
    }

    pub fn is_z_only(&self) -> bool {
        self.terms.iter().all(ProductOperatorTerm::is_z_string)
    }

    /// Largest coefficient difference against `other` over the union of terms.
    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        let a = self.terms.iter().map(|t| (t.coefficient - other.coefficient(&t.axes)).norm());
        let b = other.terms.iter().map(|t| (t.coefficient - self.coefficient(&t.axes)).norm());
        a.chain(b).fold(0.0, f64::max)
    }

    pub fn to_matrix(&self) -> Result<DenseOperator> {
        check_spins(self.spins)?;
        let n = 1usize << self.spins;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for term in &self.terms {
            for row in 0..n {
                let (col, v) = term.row_entry(row);
                data[row * n + col] += v;
            }
        }
        DenseOperator::from_rows(n, data)
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let c = t.coefficient;
            let real = c.im.abs() <= PRUNE_TOL;
            let body = if t.is_identity() { "1".to_string() } else { t.operator_string() };
            let mag = if real { format_real(c.re.abs()) } else { format_coefficient(c) };
            let neg = real && c.re < 0.0;
            let sep = match (i, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            if mag == "1" && !t.is_identity() {
                write!(f, "{sep}{body}")?;
            } else if t.is_identity() {
                write!(f, "{sep}{mag}")?;
            } else {
                write!(f, "{sep}{mag}*{body}")?;
            }
        }
        Ok(())
    }
}

/// Dense matrix of a single product operator.
pub fn term_to_matrix(term: &ProductOperatorTerm, m: usize) -> Result<DenseOperator> {
    if term.axes.len() != m {
        return Err(Error::AxesLength { expected: m, got: term.axes.len() });
    }
    OperatorSum::from_terms(m, [term.clone()])?.to_matrix()
}

fn walsh_hadamard(v: &mut [Complex64]) {
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

/// Expansion of an arbitrary matrix in the product-operator basis, using
/// `c_B = Tr(B^dagger A) / Tr(B^dagger B)` for every basis string `B`.
pub fn matrix_to_terms(a: &DenseOperator) -> Result<OperatorSum> {
    let m = spins_for_dim(a.dim())?;
    let n = a.dim();
    let mut terms = Vec::new();
    // A basis string is fixed by its flip mask (X or Y factors) and its
    // sign mask (Y or Z factors): B[r, r ^ flip] = k * (-1)^{popcount(r & sign)}
    // with k = 2^-weight * (-i)^{#Y}. A Walsh-Hadamard transform over rows
    // gives all sign masks for one flip mask at once.
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for flip in 0..n {
        for (r, slot) in buf.iter_mut().enumerate() {
            *slot = a.get(r, r ^ flip);
        }
        walsh_hadamard(&mut buf);
        for (sign, &w) in buf.iter().enumerate() {
            if w.norm() < PRUNE_TOL {
                continue;
            }
            let mut axes = Vec::with_capacity(m);
            let mut k = Complex64::new(1.0, 0.0);
            for i in 0..m {
                let bit = 1 << (m - 1 - i);
                let axis = match (flip & bit != 0, sign & bit != 0) {
                    (false, false) => Axis::E,
                    (true, false) => Axis::X,
                    (true, true) => Axis::Y,
                    (false, true) => Axis::Z,
                };
                match axis {
                    Axis::E => {}
                    Axis::Y => k *= Complex64::new(0.0, -0.5),
                    _ => k *= 0.5,
                }
                axes.push(axis);
            }
            // Tr(B^dagger B) = n |k|^2, Tr(B^dagger A) = conj(k) w.
            let coefficient = w / (k * n as f64);
            terms.push(ProductOperatorTerm { coefficient, axes });
        }
    }
    OperatorSum::from_terms(m, terms)
}

/// `exp(-i H tau)` for a sum of `Z`-strings, evaluated on the diagonal.
pub fn exp_commuting_zsum(h: &OperatorSum, tau: f64) -> Result<DenseOperator> {
    if let Some(t) = h.terms().iter().find(|t| !t.is_z_string()) {
        return Err(Error::NonZTerm(t.to_string()));
    }
    let diag = z_diagonal(h)?;
    let entries: Vec<Complex64> =
        diag.iter().map(|&e| (Complex64::new(0.0, -tau) * e).exp()).collect();
    DenseOperator::from_diagonal(&entries)
}

/// Diagonal of a `Z`-only sum.
pub(crate) fn z_diagonal(h: &OperatorSum) -> Result<Vec<Complex64>> {
    check_spins(h.spins())?;
    let n = 1usize << h.spins();
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    for term in h.terms() {
        let mask = term.z_mask();
        let scale = 0.5f64.powi(term.weight() as i32);
        for (r, d) in diag.iter_mut().enumerate() {
            let sign = if (r & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *d += term.coefficient * (sign * scale);
        }
    }
    Ok(diag)
}
