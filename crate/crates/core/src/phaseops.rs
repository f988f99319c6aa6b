//! Self-adjoint phase operators
//! `cos = ½(K₃⁻¹K₁ + K₁K₃⁻¹)`, `sin = −½(K₃⁻¹K₂ + K₂K₃⁻¹)`
//! and their number-basis identities.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repalg::{build_k1, build_k2, interior_max_norm, RepLabel, TruncatedOperator};
use crate::tridiag::symmetric_tridiagonal_eigenvalues;

/// Margin used for identities involving products of two phase operators.
pub const IDENTITY_MARGIN: usize = 4;

/// Below this distance of `K₃²` from 1 the closed forms lose digits to
/// cancellation; the direct matrix-element forms are used instead.
const SINGULAR_WINDOW: f64 = 1e-3;

const ROUTE_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct PhaseOperatorPair {
    pub cos_op: TruncatedOperator,
    pub sin_op: TruncatedOperator,
    pub k: f64,
    pub dim: usize,
}

/// `f⁽ᵏ⁾ₙ = √(n(2k+n−1))·(1/(k+n) + 1/(k+n−1))`, with `f₀ = 0`.
pub fn f_coeff(k: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    (n * (2.0 * k + n - 1.0)).sqrt() * (1.0 / (k + n) + 1.0 / (k + n - 1.0))
}

/// Builds cos and sin from the generator products and cross-checks every
/// band entry against the direct `f⁽ᵏ⁾` formulas.
pub fn build_phase_ops(label: &RepLabel, dim: usize) -> Result<PhaseOperatorPair> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "phase operators need dim >= 2, got {dim}"
        )));
    }
    let k = label.k();
    // K₃⁻¹X + XK₃⁻¹ scales entry (i, j) by 1/(k+i) + 1/(k+j).
    let scale = |op: &mut TruncatedOperator, sign: f64| {
        for j in 0..dim {
            for i in j.saturating_sub(1)..dim.min(j + 2) {
                op.entries[(i, j)] *= sign * 0.5 * (1.0 / (k + i as f64) + 1.0 / (k + j as f64));
            }
        }
    };
    let mut cos_op = build_k1(label, dim)?.renamed("cos");
    scale(&mut cos_op, 1.0);
    let mut sin_op = build_k2(label, dim)?.renamed("sin");
    scale(&mut sin_op, -1.0);

    let omega = label.omega();
    let i4 = Complex64::new(0.0, 4.0);
    let mut worst: f64 = 0.0;
    for n in 0..dim - 1 {
        let f = f_coeff(k, n + 1);
        let cos_lo = omega * f / 4.0;
        let sin_lo = -omega * f / i4;
        worst = worst
            .max((cos_op.get(n + 1, n) - cos_lo).norm())
            .max((cos_op.get(n, n + 1) - cos_lo.conj()).norm())
            .max((sin_op.get(n + 1, n) - sin_lo).norm())
            .max((sin_op.get(n, n + 1) - sin_lo.conj()).norm());
    }
    for n in 0..dim {
        worst = worst.max(cos_op.get(n, n).norm()).max(sin_op.get(n, n).norm());
    }
    if worst > ROUTE_TOL {
        return Err(Error::Inconsistent(format!(
            "product and direct constructions of the phase operators differ by {worst:e}"
        )));
    }
    Ok(PhaseOperatorPair { cos_op, sin_op, k, dim })
}

/// The same pair assembled only from `f⁽ᵏ⁾`.
pub fn build_phase_ops_direct(label: &RepLabel, dim: usize) -> Result<PhaseOperatorPair> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "phase operators need dim >= 2, got {dim}"
        )));
    }
    let k = label.k();
    let omega = label.omega();
    let zero = Complex64::new(0.0, 0.0);
    let mut cos = DMatrix::from_element(dim, dim, zero);
    let mut sin = DMatrix::from_element(dim, dim, zero);
    for n in 0..dim - 1 {
        let f = f_coeff(k, n + 1);
        let c = omega * f / 4.0;
        let s = -omega * f / Complex64::new(0.0, 4.0);
        cos[(n + 1, n)] = c;
        cos[(n, n + 1)] = c.conj();
        sin[(n + 1, n)] = s;
        sin[(n, n + 1)] = s.conj();
    }
    Ok(PhaseOperatorPair {
        cos_op: TruncatedOperator::from_parts("cos", label, cos, 1),
        sin_op: TruncatedOperator::from_parts("sin", label, sin, 1),
        k,
        dim,
    })
}

/// `⟨k,0|cos²|k,0⟩ = (2k+1)²/(8k(k+1)²)`.
pub fn ground_state_variance(k: f64) -> f64 {
    (2.0 * k + 1.0).powi(2) / (8.0 * k * (k + 1.0).powi(2))
}

/// Positive root of `ground_state_variance(k) = 1`; below it the ground
/// state would have `⟨cos²⟩ > 1`.
pub fn k1_bound() -> f64 {
    // With k = (t−1)/2 the condition becomes t³ − t − 1 = 0.
    let d = 0.5 * (23.0f64 / 27.0).sqrt();
    ((0.5 + d).cbrt() + (0.5 - d).cbrt() - 1.0) / 2.0
}

/// `i·⟨k,n|[cos,sin]|k,n⟩` written through `K₃ = n+k` and `q`.
pub fn commutator_closed_form(k3: f64, q: f64) -> f64 {
    let s = k3 * k3;
    (s - 1.0 + 2.0 * q * (2.0 * s - 1.0)) / (4.0 * k3 * (s - 1.0).powi(2))
}

/// `⟨k,n|cos²+sin²|k,n⟩` written through `K₃` and `q`.
pub fn sum_squares_closed_form(k3: f64, q: f64) -> f64 {
    let s = k3 * k3;
    let d = (s - 1.0).powi(2);
    0.25 * ((4.0 * s * s - 7.0 * s + 3.0) / d + q * (4.0 * s * s - 3.0 * s + 1.0) / (s * d))
}

/// `i·⟨[cos,sin]⟩ = −(f²ₙ₊₁ − f²ₙ)/8` from the matrix elements.
pub fn commutator_direct(k: f64, n: usize) -> f64 {
    -(f_coeff(k, n + 1).powi(2) - f_coeff(k, n).powi(2)) / 8.0
}

/// `⟨cos²+sin²⟩ = (f²ₙ + f²ₙ₊₁)/8` from the matrix elements.
pub fn sum_squares_direct(k: f64, n: usize) -> f64 {
    (f_coeff(k, n).powi(2) + f_coeff(k, n + 1).powi(2)) / 8.0
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalIdentities {
    /// `i·⟨k,n|[cos,sin]|k,n⟩` (real).
    pub commutator_diag: Vec<f64>,
    pub sum_squares_diag: Vec<f64>,
    /// Largest interior deviation of the matrix products from the diagonal
    /// closed forms.
    pub residual: f64,
}

pub fn diagonal_identities(label: &RepLabel, dim: usize) -> Result<DiagonalIdentities> {
    if dim <= IDENTITY_MARGIN {
        return Err(Error::InvalidArgument(format!(
            "diagonal identities need dim > {IDENTITY_MARGIN}, got {dim}"
        )));
    }
    let k = label.k();
    let q = label.casimir_value();
    let window = dim - IDENTITY_MARGIN;
    let mut commutator_diag = Vec::with_capacity(window);
    let mut sum_squares_diag = Vec::with_capacity(window);
    for n in 0..window {
        let k3 = n as f64 + k;
        if (k3 * k3 - 1.0).abs() < SINGULAR_WINDOW {
            commutator_diag.push(commutator_direct(k, n));
            sum_squares_diag.push(sum_squares_direct(k, n));
        } else {
            commutator_diag.push(commutator_closed_form(k3, q));
            sum_squares_diag.push(sum_squares_closed_form(k3, q));
        }
    }

    let pair = build_phase_ops(label, dim)?;
    let comm = pair.cos_op.commutator(&pair.sin_op)?;
    let cc = pair.cos_op.product(&pair.cos_op)?;
    let ss = pair.sin_op.product(&pair.sin_op)?;
    let i = Complex64::new(0.0, 1.0);
    let mut comm_dev = comm.entries.map(|v| v * i);
    let mut sum_dev = cc.entries + ss.entries;
    for n in 0..window {
        comm_dev[(n, n)] -= commutator_diag[n];
        sum_dev[(n, n)] -= sum_squares_diag[n];
    }
    let residual = interior_max_norm(&comm_dev, window).max(interior_max_norm(&sum_dev, window));
    Ok(DiagonalIdentities {
        commutator_diag,
        sum_squares_diag,
        residual,
    })
}

fn require_real_omega(op: &TruncatedOperator) -> Result<f64> {
    if op.omega.im.abs() > 1e-15 {
        return Err(Error::InvalidArgument(format!(
            "spectrum requires a real phase convention, got ω = {}",
            op.omega
        )));
    }
    Ok(op.omega.re)
}

/// Sorted eigenvalues of `cos_op`. The spectrum of `sin_op` is computed too
/// and must coincide.
pub fn phase_spectrum(pair: &PhaseOperatorPair) -> Result<Vec<f64>> {
    require_real_omega(&pair.cos_op)?;
    let n = pair.dim;
    let diag = vec![0.0; n];
    let cos_off: Vec<f64> = (0..n - 1).map(|i| pair.cos_op.get(i + 1, i).re).collect();
    let sin_off: Vec<f64> = (0..n - 1).map(|i| pair.sin_op.get(i + 1, i).norm()).collect();
    let cos_ev = symmetric_tridiagonal_eigenvalues(&diag, &cos_off)?;
    let sin_ev = symmetric_tridiagonal_eigenvalues(&diag, &sin_off)?;
    let gap = cos_ev
        .iter()
        .zip(&sin_ev)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > 1e-10 {
        return Err(Error::Inconsistent(format!("cos and sin spectra differ by {gap:e}")));
    }
    Ok(cos_ev)
}

/// Eigenvalues of the truncated cos operator for `ω = 1`, without building
/// any matrix.
pub fn cos_spectrum(k: f64, dim: usize) -> Result<Vec<f64>> {
    if !(k > 0.0) || dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "need k > 0 and dim >= 2, got k = {k}, dim = {dim}"
        )));
    }
    let off: Vec<f64> = (1..dim).map(|n| f_coeff(k, n) / 4.0).collect();
    symmetric_tridiagonal_eigenvalues(&vec![0.0; dim], &off)
}

/// Largest cos eigenvalue for every `(k, dim)` pair, in input order.
pub fn max_eigenvalue_grid(ks: &[f64], dims: &[usize]) -> Result<Vec<(f64, usize, f64)>> {
    let grid: Vec<(f64, usize)> = ks.iter().flat_map(|&k| dims.iter().map(move |&d| (k, d))).collect();
    grid.par_iter()
        .map(|&(k, d)| {
            let ev = cos_spectrum(k, d)?;
            Ok((k, d, *ev.last().expect("dim >= 2")))
        })
        .collect()
}

/// Coefficients of an improper cos eigenvector, `aₙ = coefficients[n]·e^{ln_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImproperEigvec {
    pub coefficients: Vec<f64>,
    pub ln_scale: f64,
}

impl ImproperEigvec {
    /// Unscaled values; may overflow for large `|μ|`.
    pub fn values(&self) -> Vec<f64> {
        let s = self.ln_scale.exp();
        self.coefficients.iter().map(|a| a * s).collect()
    }
}

const RENORM_EVERY: usize = 64;

/// Runs `aₙ₊₁ = (4μaₙ − fₙaₙ₋₁)/fₙ₊₁` from `a₀` up to `a_nmax`.
pub fn improper_eigvec(k: f64, mu: f64, a0: f64, nmax: usize) -> Result<ImproperEigvec> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    if nmax < 2 {
        return Err(Error::InvalidArgument(format!("nmax must be at least 2, got {nmax}")));
    }
    let mut a = Vec::with_capacity(nmax + 1);
    a.push(a0);
    a.push(4.0 * mu * a0 / f_coeff(k, 1));
    let mut ln_scale = 0.0;
    for n in 1..nmax {
        let next = (4.0 * mu * a[n] - f_coeff(k, n) * a[n - 1]) / f_coeff(k, n + 1);
        a.push(next);
        if (n + 1) % RENORM_EVERY == 0 {
            let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > 0.0 && peak.is_finite() {
                a.iter_mut().for_each(|v| *v /= peak);
                ln_scale += peak.ln();
            }
        }
    }
    Ok(ImproperEigvec {
        coefficients: a,
        ln_scale,
    })
}
