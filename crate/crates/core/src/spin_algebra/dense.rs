use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest spin count the dense backend accepts (matrix dimension 4096).
pub const MAX_DENSE_SPINS: usize = 12;

/// Tolerance used for unitarity, Hermiticity and trace checks.
pub const CHECK_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Explicit `2^m x 2^m` complex matrix in the computational basis
/// `|0...0>, ..., |1...1>`, spin 1 being the most significant bit.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<Complex64>,
}

pub(crate) fn spins_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let m = dim.trailing_zeros() as usize;
    if m > MAX_DENSE_SPINS {
        return Err(Error::TooManySpins { max: MAX_DENSE_SPINS, got: m });
    }
    Ok(m)
}

pub(crate) fn check_spins(m: usize) -> Result<()> {
    if m > MAX_DENSE_SPINS {
        return Err(Error::TooManySpins { max: MAX_DENSE_SPINS, got: m });
    }
    Ok(())
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Result<Self> {
        spins_for_dim(dim)?;
        Ok(Self { dim, data: vec![ZERO; dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut out = Self::zeros(dim)?;
        for i in 0..dim {
            out.data[i * dim + i] = ONE;
        }
        Ok(out)
    }

    pub fn identity_spins(m: usize) -> Result<Self> {
        check_spins(m)?;
        Self::identity(1 << m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        spins_for_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        let mut out = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            out.data[i * diag.len() + i] = d;
        }
        Ok(out)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let diag: Vec<Complex64> = diag.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spins(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        if other.is_diagonal(0.0) {
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] = self.data[r * n + c] * other.data[c * n + c];
                }
            }
        } else if self.is_diagonal(0.0) {
            for r in 0..n {
                let d = self.data[r * n + r];
                for c in 0..n {
                    out[r * n + c] = d * other.data[r * n + c];
                }
            }
        } else {
            for r in 0..n {
                let row = &mut out[r * n..(r + 1) * n];
                for k in 0..n {
                    let a = self.data[r * n + k];
                    if a == ZERO {
                        continue;
                    }
                    let brow = &other.data[k * n..(k + 1) * n];
                    for (o, b) in row.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * factor).collect() }
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let n = self.dim * other.dim;
        spins_for_dim(n)?;
        let mut data = vec![ZERO; n * n];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        data[(r1 * other.dim + r2) * n + c1 * other.dim + c2] = a * other.get(r2, c2);
                    }
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut acc = ZERO;
        for r in 0..n {
            for k in 0..n {
                acc += self.data[r * n + k] * other.data[k * n + r];
            }
        }
        Ok(acc)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    worst = worst.max(self.data[r * n + c].norm());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.max_off_diagonal() <= tol
    }

    /// Largest entry of `|U^dagger U - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        if self.is_diagonal(0.0) {
            return self.diagonal().iter().map(|d| (d.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
        }
        let prod = self.adjoint().matmul(self).expect("same dimension");
        let id = Self::identity(self.dim).expect("valid dimension");
        prod.max_abs_diff(&id).expect("same dimension")
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[r * n + c] - self.data[c * n + r].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Frobenius distance `min_phi ||self - e^{i phi} target||` and the
    /// minimizing phase `phi`.
    pub fn phase_aligned_distance(&self, target: &Self) -> Result<(f64, f64)> {
        self.check_same_dim(target)?;
        let overlap: Complex64 =
            target.data.iter().zip(&self.data).map(|(t, s)| t.conj() * s).sum();
        let phase = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
        let rot = Complex64::from_polar(1.0, phase);
        let dist = self
            .data
            .iter()
            .zip(&target.data)
            .map(|(s, t)| (s - rot * t).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok((dist, phase))
    }
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseOperator({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let v = self.get(r, c);
                write!(f, " {:+.4}{:+.4}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `U A U^dagger`, requiring `U` unitary to [`CHECK_TOL`].
pub fn conjugate(u: &DenseOperator, a: &DenseOperator) -> Result<DenseOperator> {
    u.check_same_dim(a)?;
    let dev = u.unitarity_deviation();
    if dev > CHECK_TOL {
        return Err(Error::NotUnitary(dev));
    }
    if u.is_diagonal(0.0) {
        let n = u.dim;
        let d = u.diagonal();
        let mut out = a.clone();
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = d[r] * a.data[r * n + c] * d[c].conj();
            }
        }
        return Ok(out);
    }
    u.matmul(a)?.matmul(&u.adjoint())
}

/// `Tr(A rho)` for Hermitian `A` and a unit-trace Hermitian `rho`.
pub fn expectation(a: &DenseOperator, rho: &DenseOperator) -> Result<f64> {
    a.check_same_dim(rho)?;
    let dev = a.hermiticity_deviation().max(rho.hermiticity_deviation());
    if dev > CHECK_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > CHECK_TOL {
        return Err(Error::TraceNotUnit(tr.re));
    }
    let value = a.trace_product(rho)?;
    if value.im.abs() > CHECK_TOL {
        return Err(Error::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

/// Single-spin 2x2 operator embedded at position `spin` (1-indexed) of `m`.
pub fn embed_single(m: usize, spin: usize, op: [[Complex64; 2]; 2]) -> Result<DenseOperator> {
    check_spins(m)?;
    if spin == 0 || spin > m {
        return Err(Error::UnknownSpin(spin.to_string()));
    }
    let n = 1usize << m;
    let shift = m - spin;
    let mut out = DenseOperator::zeros(n)?;
    for r in 0..n {
        let rb = (r >> shift) & 1;
        for cb in 0..2 {
            let c = (r & !(1 << shift)) | (cb << shift);
            out.data[r * n + c] = op[rb][cb];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(DenseOperator::zeros(3), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(DenseOperator::zeros(1 << 13), Err(Error::TooManySpins { .. })));
    }

    #[test]
    fn conjugate_by_identity_is_noop() {
        let a = DenseOperator::from_rows(2, vec![c(1.0), Complex64::new(0.0, 2.0), c(3.0), c(4.0)])
            .unwrap();
        let id = DenseOperator::identity(2).unwrap();
        assert_eq!(conjugate(&id, &a).unwrap(), a);
    }

    #[test]
    fn conjugate_rejects_non_unitary() {
        let u = DenseOperator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let a = DenseOperator::identity(2).unwrap();
        assert!(matches!(conjugate(&u, &a), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn expectation_rejects_non_unit_trace() {
        let a = DenseOperator::identity(2).unwrap();
        assert!(matches!(expectation(&a, &a), Err(Error::TraceNotUnit(_))));
    }

    #[test]
    fn phase_alignment_removes_global_phase() {
        let a = DenseOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        let b = a.scale(Complex64::from_polar(1.0, 0.7));
        let (d, phase) = b.phase_aligned_distance(&a).unwrap();
        assert!(d < 1e-12);
        assert!((phase - 0.7).abs() < 1e-12);
    }

    #[test]
    fn embed_matches_kron() {
        let x = [[c(0.0), c(0.5)], [c(0.5), c(0.0)]];
        let e = embed_single(2, 1, x).unwrap();
        let x2 = DenseOperator::from_rows(2, vec![c(0.0), c(0.5), c(0.5), c(0.0)]).unwrap();
        let k = x2.kron(&DenseOperator::identity(2).unwrap()).unwrap();
        assert_eq!(e, k);
    }
}
