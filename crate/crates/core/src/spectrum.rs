//! Multiplet prediction for a detected spin.
//!
//! Every partner `k` with `J_dk != 0` splits the detect line in two, one
//! per partner state `s_k = +-1/2`. A line sits at `sum_k J_dk s_k` from the
//! detect resonance, and its intensity is `Tr(rho T_s)` for the
//! single-transition operator
//! `T_s = 2 I_dx (x) |s><s|_partners (x) 1_rest / 2^rest`,
//! which is 1 per line for `rho = I_dx`. In product operators only terms
//! with `x` on the detect spin and `E`/`Z` elsewhere contribute, with `Z`
//! allowed only on split partners: `intensity(s) = sum coeff * prod s_k`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_algebra::{
    conjugate, embed_single, format_real, matrix_to_terms, Axis, DenseOperator, OperatorSum, SpinSystem,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    /// Offset from the detect spin's resonance.
    pub offset_hz: f64,
    /// Absorptive (`I_dx`) intensity.
    pub intensity: f64,
    /// Dispersive (`I_dy`) intensity, reported separately.
    pub dispersive: f64,
    /// One bit per partner, `0` for `s = +1/2`, `1` for `s = -1/2`.
    pub partner_state: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplet {
    pub detect_spin: usize,
    pub detect_label: String,
    pub center_hz: f64,
    pub partners: Vec<usize>,
    /// Ascending in offset.
    pub lines: Vec<Line>,
}

impl Multiplet {
    pub fn intensities(&self) -> Vec<f64> {
        self.lines.iter().map(|l| l.intensity).collect()
    }

    pub fn ratio_string(&self) -> String {
        ratio_string(&self.intensities())
    }
}

fn line_value(rho: &OperatorSum, detect: usize, partners: &[usize], s: &[f64], transverse: Axis) -> f64 {
    let mut total = 0.0;
    'terms: for t in rho.terms() {
        if t.axes[detect - 1] != transverse {
            continue;
        }
        let mut v = t.coefficient.re;
        for (i, &a) in t.axes.iter().enumerate() {
            let spin = i + 1;
            if spin == detect || a == Axis::E {
                continue;
            }
            match (a, partners.iter().position(|&p| p == spin)) {
                (Axis::Z, Some(idx)) => v *= s[idx],
                _ => continue 'terms,
            }
        }
        total += v;
    }
    total
}

fn partner_states(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|bits| (0..n).map(|i| if bits >> (n - 1 - i) & 1 == 0 { 0.5 } else { -0.5 }).collect())
        .collect()
}

pub fn multiplet_of(rho: &OperatorSum, detect: usize, topology: &SpinSystem) -> Result<Multiplet> {
    topology.check_spin(detect)?;
    if rho.spins() != topology.spins() {
        return Err(Error::SpinCount { expected: topology.spins(), got: rho.spins() });
    }
    let partners = topology.partners(detect);
    let mut lines: Vec<Line> = partner_states(partners.len())
        .into_iter()
        .map(|s| {
            let offset_hz = partners.iter().zip(&s).map(|(&k, &sk)| topology.coupling(detect, k) * sk).sum();
            Line {
                offset_hz,
                intensity: line_value(rho, detect, &partners, &s, Axis::X),
                dispersive: line_value(rho, detect, &partners, &s, Axis::Y),
                partner_state: s.iter().map(|&v| u8::from(v < 0.0)).collect(),
            }
        })
        .collect();
    lines.sort_by(|a, b| a.offset_hz.total_cmp(&b.offset_hz));
    Ok(Multiplet {
        detect_spin: detect,
        detect_label: topology.label(detect).to_string(),
        center_hz: topology.offset_hz(detect),
        partners,
        lines,
    })
}

/// Integer-style ratio normalized by the smallest nonzero magnitude,
/// e.g. `"-1:1:0:0"`; all-zero input gives all zeros.
pub fn ratio_string(intensities: &[f64]) -> String {
    let scale = intensities.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = 1e-9 * scale.max(1.0);
    let unit = intensities.iter().map(|v| v.abs()).filter(|&v| v > tol).fold(f64::INFINITY, f64::min);
    intensities
        .iter()
        .map(|&v| if v.abs() <= tol { "0".to_string() } else { format_real(v / unit) })
        .collect::<Vec<_>>()
        .join(":")
}

/// `Tr(I_dx rho)`; only the bare `I_dx` term survives the trace.
pub fn integrated_signal(rho: &OperatorSum, detect: usize) -> Result<f64> {
    let m = rho.spins();
    if detect == 0 || detect > m {
        return Err(Error::UnknownSpin(detect.to_string()));
    }
    let mut axes = vec![Axis::E; m];
    axes[detect - 1] = Axis::X;
    Ok(rho.coefficient(&axes).re * (1u64 << m) as f64 / 4.0)
}

/// `Tr(I_dx rho)` from the multiplet: `N / (4 * 2^partners) * sum(intensities)`.
pub fn signal_from_multiplet(m: &Multiplet, spins: usize) -> f64 {
    let sum: f64 = m.lines.iter().map(|l| l.intensity).sum();
    sum * (1u64 << spins) as f64 / (4.0 * m.lines.len() as f64)
}

/// Controlled-NOT on `m` spins: flips `target` when `control` is `|1>`.
pub fn cnot(control: usize, target: usize, m: usize) -> Result<DenseOperator> {
    for s in [control, target] {
        if s == 0 || s > m {
            return Err(Error::UnknownSpin(s.to_string()));
        }
    }
    if control == target {
        return Err(Error::SameSpin(control));
    }
    let n = 1usize << m;
    let cbit = 1usize << (m - control);
    let tbit = 1usize << (m - target);
    let mut u = DenseOperator::zeros(n)?;
    for col in 0..n {
        let row = if col & cbit != 0 { col ^ tbit } else { col };
        u.set(row, col, Complex64::new(1.0, 0.0));
    }
    Ok(u)
}

/// `U rho U^dagger` in product operators.
pub fn apply_unitary(u: &DenseOperator, rho: &OperatorSum) -> Result<OperatorSum> {
    if u.spins() != rho.spins() {
        return Err(Error::SpinCount { expected: rho.spins(), got: u.spins() });
    }
    matrix_to_terms(&conjugate(u, &rho.to_matrix()?)?)
}

/// Dense single-transition operator for line `state` (bits as in [`Line`]).
pub fn transition_operator(m: usize, detect: usize, partners: &[usize], state: &[u8]) -> Result<DenseOperator> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let z = c(0.0);
    let mut op = embed_single(m, detect, [[z, c(1.0)], [c(1.0), z]])?;
    for (&k, &bit) in partners.iter().zip(state) {
        let proj = if bit == 0 { [[c(1.0), z], [z, z]] } else { [[z, z], [z, c(1.0)]] };
        op = op.matmul(&embed_single(m, k, proj)?)?;
    }
    let rest = m - 1 - partners.len();
    Ok(op.scale(c(1.0 / (1u64 << rest) as f64)))
}

/// Sum of Lorentzians with half width `linewidth_hz / 2`; each line peaks
/// at its intensity. Samples span the multiplet plus five linewidths.
pub fn render_spectrum(m: &Multiplet, linewidth_hz: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if !(linewidth_hz.is_finite() && linewidth_hz > 0.0) {
        return Err(Error::InvalidArgument(format!("linewidth must be positive, got {linewidth_hz}")));
    }
    if points < 2 {
        return Err(Error::InvalidArgument("need at least two sample points".into()));
    }
    let lo = m.lines.iter().map(|l| l.offset_hz).fold(0.0f64, f64::min) - 5.0 * linewidth_hz;
    let hi = m.lines.iter().map(|l| l.offset_hz).fold(0.0f64, f64::max) + 5.0 * linewidth_hz;
    let g2 = (linewidth_hz / 2.0).powi(2);
    Ok((0..points)
        .map(|i| {
            let f = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let a = m.lines.iter().map(|l| l.intensity * g2 / ((f - l.offset_hz).powi(2) + g2)).sum();
            (f, a)
        })
        .collect())
}

/// Two-column `frequency_hz amplitude` text.
pub fn plot_table(samples: &[(f64, f64)]) -> String {
    let mut s = String::from("# frequency_hz\tamplitude\n");
    for &(f, a) in samples {
        let _ = writeln!(s, "{f:.4}\t{a:.8}");
    }
    s
}
