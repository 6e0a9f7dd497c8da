//! Multi-spin-1/2 operator algebra: product-operator sums, their dense
//! matrices, conjugation, expectation values and the diagonal exponential of
//! commuting `Z`-string Hamiltonians.

mod dense;
mod literal;
mod product;
mod system;

pub use dense::{conjugate, embed_single, expectation, DenseOperator, CHECK_TOL, MAX_DENSE_SPINS};
pub use literal::parse_operator_sum;
pub use product::{
    exp_commuting_zsum, matrix_to_terms, term_to_matrix, Axis, OperatorSum, ProductOperatorTerm, PRUNE_TOL,
};
pub(crate) use dense::check_spins;
pub(crate) use product::{format_real, z_diagonal};
pub use system::SpinSystem;

use num_complex::Complex64;

use crate::error::Result;

/// `exp(-i angle I_{spin,axis})` for a transverse axis at `phase` radians
/// from x (0 = x, pi/2 = y).
pub fn rotation(m: usize, spin: usize, phase: f64, angle: f64) -> Result<DenseOperator> {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let (cp, sp) = (phase.cos(), phase.sin());
    // cos(a/2) 1 - i sin(a/2) (cos p sigma_x + sin p sigma_y)
    let op = [
        [Complex64::new(c, 0.0), Complex64::new(-s * sp, -s * cp)],
        [Complex64::new(s * sp, -s * cp), Complex64::new(c, 0.0)],
    ];
    embed_single(m, spin, op)
}

/// `exp(-i angle I_{spin,z})`.
pub fn z_rotation(m: usize, spin: usize, angle: f64) -> Result<DenseOperator> {
    let op = [
        [Complex64::from_polar(1.0, -angle / 2.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, angle / 2.0)],
    ];
    embed_single(m, spin, op)
}

/// `exp(-i angle 2 I_kz I_lz)`.
pub fn zz_rotation(m: usize, k: usize, l: usize, angle: f64) -> Result<DenseOperator> {
    let h = OperatorSum::from_terms(m, [ProductOperatorTerm::from_factors(m, 2.0, &[(k, Axis::Z), (l, Axis::Z)])])?;
    exp_commuting_zsum(&h, angle)
}

/// Hadamard-like `90 deg` pulse about y on `spin`.
pub fn y90(m: usize, spin: usize) -> Result<DenseOperator> {
    rotation(m, spin, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
}
