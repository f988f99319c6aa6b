//! Barut–Girardello coherent states `|k,z⟩`, eigenstates of `K₋` with
//! eigenvalue `z = ρe^{iφ}`, in the `ω = 1` convention.
//!
//! Coefficients, normalizations and Bessel factors are carried in log form;
//! `I_{2k−1}(2ρ)` alone overflows `f64` near `ρ ≈ 355`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phaseops::f_coeff;
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::specfun::{
    bessel_i_entire_complex, bessel_i_scaled, bessel_k_scaled, ln_bessel_i, ln_gamma_unchecked, EvalPolicy,
};

pub const DEFAULT_TAIL_TOL: f64 = 1e-14;
const MAX_AUTO_DIM: usize = 20_000;
const SUM_TOL: f64 = 1e-10;

fn policy() -> EvalPolicy {
    EvalPolicy::default()
}

/// `ln |⟨k,n|k,z⟩|²` with `ln I_{2k−1}(2ρ)` supplied.
fn ln_weight(k: f64, rho: f64, n: usize, ln_i: f64) -> f64 {
    let nf = n as f64;
    (2.0 * (nf + k) - 1.0) * rho.ln() - ln_gamma_unchecked(nf + 1.0) - ln_gamma_unchecked(2.0 * k + nf) - ln_i
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BgState {
    pub k: f64,
    pub z: Complex64,
    pub coeffs: Vec<Complex64>,
    /// Upper bound on `Σ_{n ≥ dim} |⟨k,n|k,z⟩|²`.
    pub tail: f64,
    pub tail_tol: f64,
}

impl BgState {
    /// Truncates at `dim`; fails when the tail bound exceeds `tail_tol`.
    pub fn new(k: f64, z: Complex64, dim: usize, tail_tol: f64) -> Result<Self> {
        check_k(k)?;
        if dim == 0 {
            return Err(Error::InvalidArgument("coherent state needs dim >= 1".into()));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_tol must be positive, got {tail_tol}"
            )));
        }
        let rho = z.norm();
        if rho == 0.0 {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
            coeffs[0] = Complex64::new(1.0, 0.0);
            return Ok(Self {
                k,
                z,
                coeffs,
                tail: 0.0,
                tail_tol,
            });
        }
        let ln_i = ln_bessel_i(2.0 * k - 1.0, 2.0 * rho, &policy())?;
        let tail = tail_bound(k, rho, dim, ln_i);
        if !(tail < tail_tol) {
            return Err(Error::Truncation {
                dim,
                tail,
                tol: tail_tol,
            });
        }
        let phi = z.arg();
        let coeffs = (0..dim)
            .map(|n| Complex64::from_polar((0.5 * ln_weight(k, rho, n, ln_i)).exp(), n as f64 * phi))
            .collect();
        Ok(Self {
            k,
            z,
            coeffs,
            tail,
            tail_tol,
        })
    }

    /// Smallest truncation meeting `tail_tol`.
    pub fn with_auto_dim(k: f64, z: Complex64, tail_tol: f64) -> Result<Self> {
        Self::new(k, z, auto_dim(k, z.norm(), tail_tol)?, tail_tol)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn rho(&self) -> f64 {
        self.z.norm()
    }

    pub fn phi(&self) -> f64 {
        self.z.arg()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `‖K₋c − z·c‖` with the truncated lowering operator.
    pub fn eigen_residual(&self) -> f64 {
        lowered(self.k, &self.coeffs)
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| (a - self.z * c).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// What `eigen_residual` may be: the cut removes `√((2k+d−1)d)·c_d`
    /// from the last component, which is `z·c_{d−1}`.
    pub fn eigen_residual_bound(&self) -> f64 {
        let last = self.coeffs.last().map_or(0.0, |c| c.norm());
        self.rho() * last + 1e-13 * self.rho().max(1.0)
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    Ok(())
}

/// `Σ_{n ≥ dim} |c_n|²` bounded by the geometric series of the term ratio
/// `ρ²/((n+1)(2k+n))`, which decreases in `n`.
fn tail_bound(k: f64, rho: f64, dim: usize, ln_i: f64) -> f64 {
    let d = dim as f64;
    let r = rho * rho / ((d + 1.0) * (2.0 * k + d));
    if r >= 1.0 {
        return f64::INFINITY;
    }
    ln_weight(k, rho, dim, ln_i).exp() / (1.0 - r)
}

pub fn auto_dim(k: f64, rho: f64, tail_tol: f64) -> Result<usize> {
    check_k(k)?;
    if rho == 0.0 {
        return Ok(1);
    }
    let ln_i = ln_bessel_i(2.0 * k - 1.0, 2.0 * rho, &policy())?;
    // start past the peak of the weights, n ≈ ρ
    let mut dim = (rho as usize).max(1);
    while tail_bound(k, rho, dim, ln_i) >= tail_tol {
        dim += 1;
        if dim > MAX_AUTO_DIM {
            return Err(Error::Truncation {
                dim,
                tail: tail_bound(k, rho, dim, ln_i),
                tol: tail_tol,
            });
        }
    }
    Ok(dim)
}

/// `(K₋c)_n = √((2k+n)(n+1))·c_{n+1}`, the last component dropped by the cut.
fn lowered(k: f64, c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len();
    (0..d)
        .map(|n| {
            if n + 1 < d {
                c[n + 1] * ((2.0 * k + n as f64) * (n as f64 + 1.0)).sqrt()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// `(K₊c)_{n+1} = √((2k+n)(n+1))·c_n`, one component longer than `c`.
fn raised(k: f64, c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); c.len() + 1];
    for (n, v) in c.iter().enumerate() {
        out[n + 1] = v * ((2.0 * k + n as f64) * (n as f64 + 1.0)).sqrt();
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨k,z₂|k,z₁⟩` as a truncated inner product.
pub fn overlap(s1: &BgState, s2: &BgState) -> Result<Complex64> {
    if (s1.k - s2.k).abs() > 1e-14 {
        return Err(Error::DimensionMismatch(format!(
            "overlap of states with k = {} and k = {}",
            s1.k, s2.k
        )));
    }
    Ok(dot(&s2.coeffs, &s1.coeffs))
}

/// `⟨k,0|k,z⟩`, real and positive.
fn ground_amplitude(k: f64, rho: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(1.0);
    }
    let ln_i = ln_bessel_i(2.0 * k - 1.0, 2.0 * rho, &policy())?;
    Ok((0.5 * ln_weight(k, rho, 0, ln_i)).exp())
}

/// Closed form `|z₁z₂|^{k−½}·Σ wⁿ/(n!Γ(2k+n)) / √(I_{2k−1}(2|z₁|)I_{2k−1}(2|z₂|))`
/// with `w = z̄₂z₁`.
pub fn overlap_closed_form(k: f64, z1: Complex64, z2: Complex64) -> Result<Complex64> {
    check_k(k)?;
    let (r1, r2) = (z1.norm(), z2.norm());
    if r1 == 0.0 {
        return Ok(Complex64::new(ground_amplitude(k, r2)?, 0.0));
    }
    if r2 == 0.0 {
        return Ok(Complex64::new(ground_amplitude(k, r1)?, 0.0));
    }
    let p = policy();
    let nu = 2.0 * k - 1.0;
    let ln_norm = 0.5 * (ln_bessel_i(nu, 2.0 * r1, &p)? + ln_bessel_i(nu, 2.0 * r2, &p)?);
    let ln_scale = ln_norm - (k - 0.5) * (r1 * r2).ln();
    bessel_i_entire_complex(nu, z2.conj() * z1, ln_scale, &p)
}

/// Outcome of the resolution-of-identity check on one number state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletenessCheck {
    /// `(2/π)∫dρ ρK_{2k−1}(2ρ)I_{2k−1}(2ρ)∫dφ |⟨k,n|k,ρe^{iφ}⟩|²`
    pub value: f64,
    pub quad_error: f64,
    /// `∫₀^∞ ρ^{2(n+k)}K_{2k−1}(2ρ) dρ` by quadrature.
    pub moment: f64,
    /// `n!Γ(2k+n)/4`
    pub moment_exact: f64,
}

/// `ρ^{2(n+k)}·K_{2k−1}(2ρ)` from the scaled Bessel value.
fn moment_integrand(k: f64, n: usize, rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let ks = bessel_k_scaled(2.0 * k - 1.0, 2.0 * rho, &policy()).unwrap_or(f64::NAN);
    (2.0 * (n as f64 + k) * rho.ln() + ks.ln() - 2.0 * rho).exp()
}

/// Integrates the number-state diagonal of the coherent-state resolution of
/// identity over `[0, rho_max]` and the exponentially small tail beyond.
pub fn completeness_check(k: f64, n: usize, rho_max: f64, quadrature_tol: f64) -> Result<CompletenessCheck> {
    if !(k >= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "completeness check needs k >= 0.5, got {k}"
        )));
    }
    if n > 20 {
        return Err(Error::InvalidArgument(format!(
            "completeness check supports n <= 20, got {n}"
        )));
    }
    if !(rho_max > 0.0) || !(quadrature_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "rho_max and quadrature_tol must be positive".into(),
        ));
    }
    let norm = (ln_gamma_unchecked(n as f64 + 1.0) + ln_gamma_unchecked(2.0 * k + n as f64)).exp();
    let moment_exact = 0.25 * norm;
    // integrate the normalized moment so the tolerance is relative
    let opts = QuadOptions::with_tolerances(0.01 * quadrature_tol, 0.01 * quadrature_tol);
    let f = |rho: f64| moment_integrand(k, n, rho) / moment_exact;
    let inner = integrate(
        f,
        0.0,
        rho_max,
        QuadOptions {
            max_intervals: 4000,
            ..opts
        },
    )?;
    let tail = integrate_to_infinity(f, rho_max, 2.0, opts)?;
    let moment = (inner.value + tail.value) * moment_exact;
    // |⟨k,n|k,z⟩|²·I_{2k−1}(2ρ) does not depend on φ, so the φ integral is 2π
    let value = (2.0 / PI) * 2.0 * PI * moment / norm;
    Ok(CompletenessCheck {
        value,
        quad_error: (2.0 / PI) * 2.0 * PI * (inner.error + tail.error) * moment_exact / norm,
        moment,
        moment_exact,
    })
}

/// `I_{2k}(2ρ)/I_{2k−1}(2ρ)`.
pub fn bessel_ratio(k: f64, rho: f64) -> Result<f64> {
    check_k(k)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let p = policy();
    Ok((ln_bessel_i(2.0 * k, 2.0 * rho, &p)? - ln_bessel_i(2.0 * k - 1.0, 2.0 * rho, &p)?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct K3Moments {
    pub mean: f64,
    pub second: f64,
    pub variance: f64,
    pub b_k: f64,
}

pub fn k3_moments_closed(k: f64, rho: f64) -> Result<K3Moments> {
    let b = bessel_ratio(k, rho)?;
    Ok(K3Moments {
        mean: k + rho * b,
        second: k * k + rho * rho + rho * b,
        variance: rho * rho * (1.0 - b * b) + (1.0 - 2.0 * k) * rho * b,
        b_k: b,
    })
}

/// `⟨K₃⟩`, `⟨K₃²⟩` summed over the stored coefficients.
pub fn k3_moments_sum(state: &BgState) -> K3Moments {
    let norm = state.norm_sqr();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, c) in state.coeffs.iter().enumerate() {
        let e = n as f64 + state.k;
        let w = c.norm_sqr();
        m1 += e * w;
        m2 += e * e * w;
    }
    let (m1, m2) = (m1 / norm, m2 / norm);
    K3Moments {
        mean: m1,
        second: m2,
        variance: m2 - m1 * m1,
        b_k: (m1 - state.k) / state.rho(),
    }
}

fn agree(what: &str, closed: f64, summed: f64, scale: f64, tol: f64) -> Result<()> {
    if (closed - summed).abs() > tol * scale.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "{what}: closed form {closed} vs truncated sum {summed}"
        )));
    }
    Ok(())
}

fn sum_tol(state: &BgState) -> f64 {
    SUM_TOL.max(state.tail)
}

/// Closed forms, cross-checked against the truncated sums.
pub fn k3_moments(state: &BgState) -> Result<K3Moments> {
    let closed = k3_moments_closed(state.k, state.rho())?;
    if state.rho() == 0.0 {
        return Ok(closed);
    }
    let summed = k3_moments_sum(state);
    let tol = sum_tol(state);
    agree("<K3>", closed.mean, summed.mean, closed.mean, tol)?;
    agree("<K3^2>", closed.second, summed.second, closed.second, tol)?;
    agree("Var K3", closed.variance, summed.variance, closed.second, tol)?;
    Ok(closed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct K12Moments {
    pub mean_k1: f64,
    pub mean_k2: f64,
    pub second_k1: f64,
    pub second_k2: f64,
    pub var_k1: f64,
    pub var_k2: f64,
}

impl K12Moments {
    pub fn uncertainty_product(&self) -> f64 {
        self.var_k1 * self.var_k2
    }
}

pub fn k12_moments_closed(k: f64, z: Complex64) -> Result<K12Moments> {
    let rho = z.norm();
    let mean_k3 = k3_moments_closed(k, rho)?.mean;
    let half = 0.5 * mean_k3;
    Ok(K12Moments {
        mean_k1: z.re,
        mean_k2: -z.im,
        second_k1: z.re * z.re + half,
        second_k2: z.im * z.im + half,
        var_k1: half,
        var_k2: half,
    })
}

/// Moments from `K₋c`, `K₋²c` and `K₊c` applied to the coefficients.
pub fn k12_moments_sum(state: &BgState) -> K12Moments {
    let c = &state.coeffs;
    let norm = state.norm_sqr();
    let a = lowered(state.k, c);
    let b = lowered(state.k, &a);
    let up = raised(state.k, c);
    let km = dot(c, &a) / norm; // ⟨K₋⟩
    let km2 = dot(c, &b) / norm; // ⟨K₋²⟩
    let kpkm = a.iter().map(|v| v.norm_sqr()).sum::<f64>() / norm;
    let kmkp = up.iter().map(|v| v.norm_sqr()).sum::<f64>() / norm;
    let mean_k1 = km.re;
    let mean_k2 = -km.im;
    let cross = kpkm + kmkp;
    let second_k1 = 0.25 * (2.0 * km2.re + cross);
    let second_k2 = 0.25 * (cross - 2.0 * km2.re);
    K12Moments {
        mean_k1,
        mean_k2,
        second_k1,
        second_k2,
        var_k1: second_k1 - mean_k1 * mean_k1,
        var_k2: second_k2 - mean_k2 * mean_k2,
    }
}

pub fn k12_moments(state: &BgState) -> Result<K12Moments> {
    let closed = k12_moments_closed(state.k, state.z)?;
    let summed = k12_moments_sum(state);
    let tol = sum_tol(state);
    let scale = closed.second_k1.max(closed.second_k2);
    agree("<K1>", closed.mean_k1, summed.mean_k1, state.rho(), tol)?;
    agree("<K2>", closed.mean_k2, summed.mean_k2, state.rho(), tol)?;
    agree("<K1^2>", closed.second_k1, summed.second_k1, scale, tol)?;
    agree("<K2^2>", closed.second_k2, summed.second_k2, scale, tol)?;
    agree("Var K1", closed.var_k1, summed.var_k1, scale, tol)?;
    agree("Var K2", closed.var_k2, summed.var_k2, scale, tol)?;
    Ok(closed)
}

/// `g⁽ᵏ⁾(ρ)·e^{−ln_scale}` from its power series. The terms peak near
/// `n ≈ ρ` with width `O(√ρ)`, so the sum runs outward from the peak and
/// stops on each side once a geometric bound on the rest is negligible.
fn g_series_scaled(k: f64, rho: f64, ln_scale: f64) -> Result<f64> {
    let ln_rho = rho.ln();
    let p = policy();
    let term = |n: usize| {
        let nf = n as f64;
        let w = 1.0 / (nf + k) + 1.0 / (nf + k + 1.0);
        0.5 * w
            * (2.0 * (nf + k) * ln_rho - ln_gamma_unchecked(nf + 1.0) - ln_gamma_unchecked(2.0 * k + nf) - ln_scale)
                .exp()
    };
    let peak = (rho - k).max(0.0).round() as usize;
    let budget = p.max_terms * 4 + 40 * (rho.sqrt() as usize);
    let mut sum = 0.0;
    let mut converged = false;
    for n in peak..peak + budget {
        let t = term(n);
        sum += t;
        let r = rho * rho / ((n as f64 + 1.0) * (2.0 * k + n as f64 + 1.0));
        if r < 1.0 && t * r / (1.0 - r) <= p.abs_tol * sum {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            func: "g_k",
            iterations: budget,
        });
    }
    // below the peak, term(n−1)/term(n) ≤ n(2k+n−1)/ρ²·(1 + 1/(n+k−1)) < 1
    // once well away from the peak
    let mut below = 0.0;
    for n in (0..peak).rev() {
        let t = term(n);
        below += t;
        let nf = n as f64;
        let q = nf * (2.0 * k + nf - 1.0) / (rho * rho) * (1.0 + 1.0 / (nf + k - 1.0));
        if n == 0 || (q < 1.0 && t * q / (1.0 - q) <= p.abs_tol * (sum + below)) {
            break;
        }
    }
    Ok(sum + below)
}

/// `g⁽ᵏ⁾(ρ) = ½Σ ρ^{2(n+k)}/(n!Γ(2k+n))·(1/(n+k) + 1/(n+k+1))`.
pub fn g_k(k: f64, rho: f64) -> Result<f64> {
    check_k(k)?;
    if !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be >= 0, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    g_series_scaled(k, rho, 0.0)
}

/// `g⁽ᵏ⁾(ρ) = ½∫₀^{2ρ}I_{2k−1}(u)du + (1/(8ρ²))∫₀^{2ρ}u²I_{2k−1}(u)du`, by
/// quadrature and scaled by `e^{−2ρ}`.
pub fn g_k_integral_scaled(k: f64, rho: f64) -> Result<f64> {
    check_k(k)?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let nu = 2.0 * k - 1.0;
    let top = 2.0 * rho;
    let p = policy();
    let bessel = |u: f64| {
        bessel_i_scaled(nu, u, &p)
            .map(|v| v * (u - top).exp())
            .unwrap_or(f64::NAN)
    };
    let weight = |u: f64| 0.5 + u * u / (8.0 * rho * rho);
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    let q = if nu < 0.0 {
        // u = s^{1/(ν+1)} removes the u^ν endpoint singularity
        let a = 1.0 / (nu + 1.0);
        let upper = top.powf(nu + 1.0);
        integrate(
            |s: f64| {
                if s == 0.0 {
                    return 0.0;
                }
                let u = s.powf(a);
                bessel(u) * weight(u) * a * u / s
            },
            0.0,
            upper,
            opts,
        )?
    } else {
        integrate(
            |u| {
                if u == 0.0 && nu > 0.0 {
                    0.0
                } else {
                    bessel(u) * weight(u)
                }
            },
            0.0,
            top,
            opts,
        )?
    };
    Ok(q.value)
}

/// `g⁽ᵏ⁾(ρ)/I_{2k−1}(2ρ)`, the coherent-state mean of `cos` at `φ = 0`.
pub fn ratio_gi(k: f64, rho: f64) -> Result<f64> {
    check_k(k)?;
    if !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be >= 0, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let ln_i = ln_bessel_i(2.0 * k - 1.0, 2.0 * rho, &policy())?;
    g_series_scaled(k, rho, ln_i)
}

/// The same ratio through the integral form of `g⁽ᵏ⁾`.
pub fn ratio_gi_integral(k: f64, rho: f64) -> Result<f64> {
    Ok(g_k_integral_scaled(k, rho)? / bessel_i_scaled(2.0 * k - 1.0, 2.0 * rho, &policy())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseExpectations {
    pub cos_mean: f64,
    pub sin_mean: f64,
    /// `sin_mean/cos_mean`; `±∞` when `cos φ = 0`.
    pub tan_ratio: f64,
}

fn tan_of(sin_mean: f64, cos_mean: f64, phi: f64) -> f64 {
    if phi.cos().abs() < 1e-15 || cos_mean == 0.0 {
        f64::INFINITY.copysign(sin_mean)
    } else {
        sin_mean / cos_mean
    }
}

pub fn phase_expectations_closed(k: f64, z: Complex64) -> Result<PhaseExpectations> {
    let r = ratio_gi(k, z.norm())?;
    let phi = z.arg();
    let (cos_mean, sin_mean) = (phi.cos() * r, phi.sin() * r);
    Ok(PhaseExpectations {
        cos_mean,
        sin_mean,
        tan_ratio: tan_of(sin_mean, cos_mean, phi),
    })
}

/// `⟨cos⟩`, `⟨sin⟩` from the tridiagonal matrix elements
/// `⟨n+1|cos|n⟩ = f_{n+1}/4`, `⟨n+1|sin|n⟩ = i·f_{n+1}/4`.
pub fn phase_expectations_sum(state: &BgState) -> PhaseExpectations {
    let c = &state.coeffs;
    let mut lower = Complex64::new(0.0, 0.0); // Σ f_{n+1}/4 · c̄_{n+1} c_n
    for n in 0..c.len().saturating_sub(1) {
        lower += c[n + 1].conj() * c[n] * (f_coeff(state.k, n + 1) / 4.0);
    }
    let norm = state.norm_sqr();
    let cos_mean = 2.0 * lower.re / norm;
    let sin_mean = 2.0 * (Complex64::new(0.0, 1.0) * lower).re / norm;
    PhaseExpectations {
        cos_mean,
        sin_mean,
        tan_ratio: tan_of(sin_mean, cos_mean, state.phi()),
    }
}

pub fn phase_expectations(state: &BgState) -> Result<PhaseExpectations> {
    let closed = phase_expectations_closed(state.k, state.z)?;
    let summed = phase_expectations_sum(state);
    let tol = sum_tol(state);
    agree("<cos>", closed.cos_mean, summed.cos_mean, 1.0, tol)?;
    agree("<sin>", closed.sin_mean, summed.sin_mean, 1.0, tol)?;
    Ok(closed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Bounded,
    Exceeds,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "BOUNDED",
            Verdict::Exceeds => "EXCEEDS",
        })
    }
}

pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub k_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    /// One row per `k`.
    pub ratio: Vec<Vec<f64>>,
    pub sup_per_k: Vec<f64>,
    pub argmax_rho: Vec<f64>,
    pub verdicts: Vec<Verdict>,
}

impl ScanResult {
    /// Adjacent grid values `(k_exceeds, k_bounded)` around the last verdict
    /// flip, if the scan contains one.
    pub fn threshold_bracket(&self) -> Option<(f64, f64)> {
        (1..self.k_values.len())
            .rev()
            .find(|&i| self.verdicts[i] == Verdict::Bounded && self.verdicts[i - 1] == Verdict::Exceeds)
            .map(|i| (self.k_values[i - 1], self.k_values[i]))
    }

    /// `ρ²·|ratio − (1 − 1/(4ρ))|` at the largest grid `ρ`, per `k`.
    pub fn asymptotic_deviation(&self) -> Vec<f64> {
        let rho = *self.rho_values.last().expect("nonempty grid");
        self.ratio
            .iter()
            .map(|row| rho * rho * (row.last().expect("nonempty grid") - (1.0 - 0.25 / rho)).abs())
            .collect()
    }
}

/// `k = 0.10, 0.15, …, 2.00`.
pub fn default_k_grid() -> Vec<f64> {
    (0..=38).map(|i| (10 + 5 * i) as f64 / 100.0).collect()
}

/// 200 log-spaced points spanning `[0.01, 100]`.
pub fn default_rho_grid() -> Vec<f64> {
    log_grid(0.01, 100.0, 200)
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn kbound_scan(k_grid: &[f64], rho_grid: &[f64]) -> Result<ScanResult> {
    if k_grid.is_empty() || rho_grid.is_empty() {
        return Err(Error::InvalidArgument("scan grids must be nonempty".into()));
    }
    let rows: Vec<Vec<f64>> = k_grid
        .par_iter()
        .map(|&k| {
            rho_grid
                .iter()
                .map(|&rho| ratio_gi(k, rho))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut sup_per_k = Vec::with_capacity(rows.len());
    let mut argmax_rho = Vec::with_capacity(rows.len());
    let mut verdicts = Vec::with_capacity(rows.len());
    for row in &rows {
        let (idx, sup) =
            row.iter().copied().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, v)| if v > best.1 { (i, v) } else { best },
            );
        sup_per_k.push(sup);
        argmax_rho.push(rho_grid[idx]);
        verdicts.push(if sup <= 1.0 + BOUND_SLACK {
            Verdict::Bounded
        } else {
            Verdict::Exceeds
        });
    }
    Ok(ScanResult {
        k_values: k_grid.to_vec(),
        rho_values: rho_grid.to_vec(),
        ratio: rows,
        sup_per_k,
        argmax_rho,
        verdicts,
    })
}
