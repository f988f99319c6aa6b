//! Interference observables for two superposed waves and their quantum
//! counterparts.
//!
//! Classically, two amplitudes with intensities `I₁`, `I₂` and relative
//! phase `φ` give four readings `w₃..w₆` after phase shifts of `0`, `π`,
//! `π/2`, `−π/2`. From these, `P₁ = p cos φ`, `P₂ = −p sin φ` and
//! `P₃ = p = √(I₁I₂)` close a real Lie algebra under the Poisson bracket.
//! In the quantum version the mean counts `n̄ₐ` give `⟨K₁⟩`, `⟨K₂⟩`, and
//! second moments give `⟨K₃²⟩`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::bgstates::{k12_moments_closed, k3_moments_closed};
use crate::error::{Error, Result};
use crate::repalg::fluctuation_closed_forms;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConfig {
    pub i1: f64,
    pub i2: f64,
    /// `φ₂ − φ₁`
    pub phi: f64,
}

impl ClassicalConfig {
    pub fn new(i1: f64, i2: f64, phi: f64) -> Result<Self> {
        if !(i1 > 0.0 && i2 > 0.0) || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "intensities must be positive, got I1={i1}, I2={i2}"
            )));
        }
        Ok(Self { i1, i2, phi })
    }

    pub fn from_phases(i1: f64, i2: f64, phi1: f64, phi2: f64) -> Result<Self> {
        Self::new(i1, i2, phi2 - phi1)
    }

    pub fn p(&self) -> f64 {
        (self.i1 * self.i2).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReading {
    pub i1: f64,
    pub i2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub w6: f64,
}

impl InterferenceReading {
    /// Largest violation of `w₃+w₄ = w₅+w₆ = 2(I₁+I₂)`.
    pub fn consistency_residual(&self) -> f64 {
        let total = 2.0 * (self.i1 + self.i2);
        (self.w3 + self.w4 - total).abs().max((self.w5 + self.w6 - total).abs())
    }

    fn values(&self) -> [f64; 6] {
        [self.i1, self.i2, self.w3, self.w4, self.w5, self.w6]
    }
}

fn fringe(cfg: &ClassicalConfig, phi: f64) -> f64 {
    cfg.i1 + cfg.i2 + 2.0 * cfg.p() * phi.cos()
}

pub fn classical_readings(cfg: &ClassicalConfig) -> InterferenceReading {
    InterferenceReading {
        i1: cfg.i1,
        i2: cfg.i2,
        w3: fringe(cfg, cfg.phi),
        w4: fringe(cfg, cfg.phi + PI),
        w5: fringe(cfg, cfg.phi + FRAC_PI_2),
        w6: fringe(cfg, cfg.phi - FRAC_PI_2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalObservables {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
}

pub fn classical_observables(r: &InterferenceReading) -> Result<ClassicalObservables> {
    let p1 = (r.w3 - r.w4) / 4.0;
    let p2 = (r.w5 - r.w6) / 4.0;
    let p3 = 0.25 * (r.w4 - r.w3).hypot(r.w6 - r.w5);
    if p3 == 0.0 {
        return Err(Error::Degenerate(
            "w3 = w4 and w5 = w6: no fringes, phase undefined".into(),
        ));
    }
    Ok(ClassicalObservables {
        p1,
        p2,
        p3,
        cos_phi: p1 / p3,
        sin_phi: -p2 / p3,
    })
}

/// `{f,g} = ∂f/∂φ·∂g/∂p − ∂f/∂p·∂g/∂φ` by central differences.
pub fn poisson_bracket(f: impl Fn(f64, f64) -> f64, g: impl Fn(f64, f64) -> f64, phi: f64, p: f64, h: f64) -> f64 {
    let d_phi = |u: &dyn Fn(f64, f64) -> f64| (u(phi + h, p) - u(phi - h, p)) / (2.0 * h);
    let d_p = |u: &dyn Fn(f64, f64) -> f64| (u(phi, p + h) - u(phi, p - h)) / (2.0 * h);
    d_phi(&f) * d_p(&g) - d_p(&f) * d_phi(&g)
}

/// Max over samples of `|{P₃,P₁}+P₂|`, `|{P₃,P₂}−P₁|`, `|{P₁,P₂}−P₃|`.
pub fn poisson_bracket_check(samples: &[(f64, f64)], h: f64) -> Result<f64> {
    let p1 = |phi: f64, p: f64| p * phi.cos();
    let p2 = |phi: f64, p: f64| -p * phi.sin();
    let p3 = |_phi: f64, p: f64| p;
    let mut worst: f64 = 0.0;
    for &(phi, p) in samples {
        if !(p > 0.0) || p <= h {
            return Err(Error::InvalidArgument(format!(
                "sample modulus {p} must exceed the step {h}"
            )));
        }
        worst = worst
            .max((poisson_bracket(p3, p1, phi, p, h) + p2(phi, p)).abs())
            .max((poisson_bracket(p3, p2, phi, p, h) - p1(phi, p)).abs())
            .max((poisson_bracket(p1, p2, phi, p, h) - p3(phi, p)).abs());
    }
    Ok(worst)
}

/// Second moments of the count operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMoments {
    /// `⟨(N₃+N₄)²⟩`
    pub n3n4_sumsq: f64,
    /// `⟨(N₅+N₆)²⟩`
    pub n5n6_sumsq: f64,
    pub n1sq: f64,
    pub n2sq: f64,
    /// `⟨(N₃−N₄)²⟩ = 16⟨K₁²⟩`, when recorded.
    pub n3n4_diffsq: Option<f64>,
    /// `⟨(N₅−N₆)²⟩ = 16⟨K₂²⟩`, when recorded.
    pub n5n6_diffsq: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pattern {
    /// `n̄₃ = n̄₄` and `n̄₅ = n̄₆`
    Flat,
    Fringes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub k1_mean: f64,
    pub k2_mean: f64,
    /// Mean of the two second-moment routes.
    pub k3sq_mean: Option<f64>,
    /// Difference between the `(N₃+N₄)²` and `(N₅+N₆)²` routes.
    pub k3sq_discrepancy: Option<f64>,
    pub var_k1: Option<f64>,
    pub var_k2: Option<f64>,
    /// `⟨K₁²+K₂²⟩ − ⟨K₃²⟩`, the Casimir value `k(1−k)`.
    pub q_estimate: Option<f64>,
    /// `√(⟨K₁⟩² + ⟨K₂⟩²)`
    pub p_estimate: f64,
    pub pattern: Pattern,
    pub cos_phi: Option<f64>,
    pub sin_phi: Option<f64>,
    pub n_estimate: Option<u64>,
    pub k_estimate: Option<f64>,
    pub consistency_residual: f64,
}

impl ReconstructionResult {
    pub fn phi(&self) -> Option<f64> {
        Some(self.sin_phi?.atan2(self.cos_phi?))
    }
}

/// Relative size of `|⟨K₁⟩|, |⟨K₂⟩|` below which the pattern counts as flat.
pub const FLAT_TOL: f64 = 1e-12;

pub fn quantum_reconstruct(nbar: &InterferenceReading, second: Option<&SecondMoments>) -> Result<ReconstructionResult> {
    if nbar.values().iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "mean counts must be nonnegative: {nbar:?}"
        )));
    }
    let k1 = (nbar.w3 - nbar.w4) / 4.0;
    let k2 = (nbar.w5 - nbar.w6) / 4.0;
    let p = k1.hypot(k2);
    let scale = nbar.values().iter().fold(0.0f64, |a, v| a.max(*v));
    let pattern = if p <= FLAT_TOL * scale {
        Pattern::Flat
    } else {
        Pattern::Fringes
    };
    let (cos_phi, sin_phi) = match pattern {
        Pattern::Flat => (None, None),
        Pattern::Fringes => (Some(k1 / p), Some(-k2 / p)),
    };
    let mut out = ReconstructionResult {
        k1_mean: k1,
        k2_mean: k2,
        k3sq_mean: None,
        k3sq_discrepancy: None,
        var_k1: None,
        var_k2: None,
        q_estimate: None,
        p_estimate: p,
        pattern,
        cos_phi,
        sin_phi,
        n_estimate: None,
        k_estimate: None,
        consistency_residual: nbar.consistency_residual(),
    };
    let Some(m) = second else {
        return Ok(out);
    };
    // (w₃+w₄)/2 = I₁+I₂, so 2p² = ¼(w₃+w₄)² − I₁² − I₂²
    let route_a = 0.5 * (0.25 * m.n3n4_sumsq - m.n1sq - m.n2sq);
    let route_b = 0.5 * (0.25 * m.n5n6_sumsq - m.n1sq - m.n2sq);
    let k3sq = 0.5 * (route_a + route_b);
    out.k3sq_mean = Some(k3sq);
    out.k3sq_discrepancy = Some(route_a - route_b);
    if let (Some(d34), Some(d56)) = (m.n3n4_diffsq, m.n5n6_diffsq) {
        let (s1, s2) = (d34 / 16.0, d56 / 16.0);
        out.var_k1 = Some(s1 - k1 * k1);
        out.var_k2 = Some(s2 - k2 * k2);
        out.q_estimate = Some(s1 + s2 - k3sq);
        if pattern == Pattern::Flat && k3sq > 0.0 {
            let var = 0.5 * (s1 - k1 * k1 + s2 - k2 * k2);
            // a number state is a K₃ eigenstate, so ⟨K₃⟩ = √⟨K₃²⟩
            if let Ok(est) = estimate_k_from_number_state(var, var, k3sq.sqrt(), k3sq) {
                out.n_estimate = Some(est.n_estimate);
                out.k_estimate = Some(est.k_estimate);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumberStateEstimate {
    pub n_estimate: u64,
    pub k_estimate: f64,
    pub residual: f64,
}

/// Residual tolerance, relative to `max(1, var)`.
pub const NUMBER_STATE_TOL: f64 = 1e-8;

/// Inverts `½(n² + 2nk + k) = var`, `n + k = ⟨K₃⟩`.
///
/// With `m = ⟨K₃⟩` the two roots are `n = m − k` and `n = m + k − 1`, the
/// second being the `k ↔ 1−k` partner with the same Casimir value. The root
/// that rounds to a nonnegative integer with positive `k` and the smallest
/// residual wins.
pub fn estimate_k_from_number_state(var_k1: f64, var_k2: f64, k3_mean: f64, k3_sq: f64) -> Result<NumberStateEstimate> {
    if !(k3_mean > 0.0) || !(var_k1 >= 0.0 && var_k2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive ⟨K3⟩ and nonnegative variances, got {k3_mean}, {var_k1}, {var_k2}"
        )));
    }
    let var = 0.5 * (var_k1 + var_k2);
    let m = k3_mean;
    let scale = var.max(1.0);
    let mut residual = (var_k1 - var_k2).abs() / scale;
    residual = residual.max((k3_sq - m * m).abs() / (m * m).max(1.0));
    let disc = 4.0 * m * m + 1.0 - 8.0 * var;
    let sq = disc.max(0.0).sqrt();
    let mut best: Option<NumberStateEstimate> = None;
    for root in [0.5 * (2.0 * m - 1.0 - sq), 0.5 * (2.0 * m - 1.0 + sq)] {
        let n = root.round();
        if n < 0.0 {
            continue;
        }
        let k = m - n;
        if !(k > 0.0) {
            continue;
        }
        let r = ((0.5 * (n * n + 2.0 * n * k + k) - var).abs() / scale).max(residual);
        if best.is_none_or(|b| r < b.residual) {
            best = Some(NumberStateEstimate {
                n_estimate: n as u64,
                k_estimate: k,
                residual: r,
            });
        }
    }
    match best {
        Some(b) if b.residual <= NUMBER_STATE_TOL && disc >= -NUMBER_STATE_TOL * scale => Ok(b),
        Some(b) => Err(Error::Inconsistent(format!(
            "data are not number-state-like (best residual {:e})",
            b.residual
        ))),
        None => Err(Error::Inconsistent("no root with integer n ≥ 0 and k > 0".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    Number { k: f64, n: u64 },
    Bg { k: f64, rho: f64, phi: f64 },
}

impl StateSpec {
    pub fn k(&self) -> f64 {
        match *self {
            StateSpec::Number { k, .. } | StateSpec::Bg { k, .. } => k,
        }
    }
}

/// Exact generator moments of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateTruth {
    pub k1_mean: f64,
    pub k2_mean: f64,
    pub k3_mean: f64,
    pub k1_sq: f64,
    pub k2_sq: f64,
    pub k3_sq: f64,
}

pub fn state_truth(spec: &StateSpec) -> Result<StateTruth> {
    let k = spec.k();
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    match *spec {
        StateSpec::Number { k, n } => {
            let f = fluctuation_closed_forms(k, n as usize);
            let m = n as f64 + k;
            Ok(StateTruth {
                k1_mean: 0.0,
                k2_mean: 0.0,
                k3_mean: m,
                k1_sq: f.var_k1,
                k2_sq: f.var_k2,
                k3_sq: m * m,
            })
        }
        StateSpec::Bg { k, rho, phi } => {
            if !(rho >= 0.0) || !phi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "invalid coherent-state label ρ={rho}, φ={phi}"
                )));
            }
            let z = Complex64::from_polar(rho, phi);
            let m12 = k12_moments_closed(k, z)?;
            let m3 = k3_moments_closed(k, rho)?;
            Ok(StateTruth {
                k1_mean: m12.mean_k1,
                k2_mean: m12.mean_k2,
                k3_mean: m3.mean,
                k1_sq: m12.second_k1,
                k2_sq: m12.second_k2,
                k3_sq: m3.second,
            })
        }
    }
}

/// Mean counts and second moments that reproduce the state's moments.
///
/// Both inputs carry `⟨K₃⟩` (the analogue of `I₁ = I₂ = p`), so
/// `n̄₃,₄ = 2⟨K₃⟩ ± 2⟨K₁⟩`, `n̄₅,₆ = 2⟨K₃⟩ ± 2⟨K₂⟩`, and
/// `⟨N₁²⟩ = ⟨N₂²⟩ = ⟨K₃²⟩`, `⟨(N₃+N₄)²⟩ = ⟨(N₅+N₆)²⟩ = 16⟨K₃²⟩`.
pub fn ideal_readings(t: &StateTruth) -> (InterferenceReading, SecondMoments) {
    let reading = InterferenceReading {
        i1: t.k3_mean,
        i2: t.k3_mean,
        w3: 2.0 * (t.k3_mean + t.k1_mean),
        w4: 2.0 * (t.k3_mean - t.k1_mean),
        w5: 2.0 * (t.k3_mean + t.k2_mean),
        w6: 2.0 * (t.k3_mean - t.k2_mean),
    };
    let moments = SecondMoments {
        n3n4_sumsq: 16.0 * t.k3_sq,
        n5n6_sumsq: 16.0 * t.k3_sq,
        n1sq: t.k3_sq,
        n2sq: t.k3_sq,
        n3n4_diffsq: Some(16.0 * t.k1_sq),
        n5n6_diffsq: Some(16.0 * t.k2_sq),
    };
    (reading, moments)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationErrors {
    pub k1: f64,
    pub k2: f64,
    /// Recovered minus true `ρ` and wrapped `φ` (coherent states only).
    pub rho: Option<f64>,
    pub phi: Option<f64>,
    /// `ΔK₁ΔK₂ − ½⟨K₃⟩` from the reconstructed variances.
    pub uncertainty_excess: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Simulation {
    pub readings: InterferenceReading,
    pub second_moments: SecondMoments,
    pub reconstruction: ReconstructionResult,
    pub truth: StateTruth,
    pub errors: SimulationErrors,
}

fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn jitter(reading: &mut InterferenceReading, sigma: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("noise level {sigma}: {e}")))?;
    for w in [
        &mut reading.i1,
        &mut reading.i2,
        &mut reading.w3,
        &mut reading.w4,
        &mut reading.w5,
        &mut reading.w6,
    ] {
        *w = (*w * (1.0 + rng.sample(normal))).max(0.0);
    }
    Ok(())
}

fn simulate_with(spec: &StateSpec, noise: Option<(f64, &mut ChaCha8Rng)>) -> Result<Simulation> {
    let truth = state_truth(spec)?;
    let (mut readings, second_moments) = ideal_readings(&truth);
    if let Some((sigma, rng)) = noise {
        if !(sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise must be nonnegative, got {sigma}"
            )));
        }
        if sigma > 0.0 {
            jitter(&mut readings, sigma, rng)?;
        }
    }
    let rec = quantum_reconstruct(&readings, Some(&second_moments))?;
    let (rho, phi, k3_for_bound) = match *spec {
        StateSpec::Bg { rho, phi, .. } => (
            Some(rec.p_estimate - rho),
            rec.phi().map(|p| wrap_angle(p - phi)),
            // ΔK₁² = ΔK₂² = ½⟨K₃⟩ in these states
            rec.var_k1.zip(rec.var_k2).map(|(a, b)| a + b),
        ),
        StateSpec::Number { .. } => (None, None, rec.k3sq_mean.map(f64::sqrt)),
    };
    let uncertainty_excess = match (rec.var_k1, rec.var_k2, k3_for_bound) {
        (Some(a), Some(b), Some(m)) => Some((a * b).max(0.0).sqrt() - 0.5 * m),
        _ => None,
    };
    Ok(Simulation {
        readings,
        second_moments,
        reconstruction: rec,
        truth,
        errors: SimulationErrors {
            k1: rec.k1_mean - truth.k1_mean,
            k2: rec.k2_mean - truth.k2_mean,
            rho,
            phi,
            uncertainty_excess,
        },
    })
}

/// One noisy (or noiseless, when `noise` is `None`) round trip; the noise
/// stream is seeded by `seed`.
pub fn simulate_and_reconstruct(spec: &StateSpec, noise: Option<f64>, seed: u64) -> Result<Simulation> {
    match noise {
        None => simulate_with(spec, None),
        Some(sigma) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            simulate_with(spec, Some((sigma, &mut rng)))
        }
    }
}

/// Run configuration read from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NfmRunConfig {
    pub state: StateSpec,
    #[serde(default)]
    pub noise: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub recovered_rho: f64,
    pub recovered_phi: Option<f64>,
    pub err_k1: f64,
    pub err_k2: f64,
    pub err_rho: Option<f64>,
    pub err_phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub config: NfmRunConfig,
    pub truth: StateTruth,
    pub trials: Vec<TrialRecord>,
    /// Standard deviation of the `φ` error over trials.
    pub phi_spread: Option<f64>,
    pub rho_spread: Option<f64>,
    pub k1_spread: f64,
    pub k2_spread: f64,
}

fn spread(xs: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let n = xs.clone().count();
    if n == 0 {
        return None;
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    Some((xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt())
}

/// Independent trials, trial `t` drawing from ChaCha stream `t` of `seed`;
/// the result does not depend on the thread count.
pub fn monte_carlo(config: &NfmRunConfig) -> Result<MonteCarloSummary> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let truth = state_truth(&config.state)?;
    let trials: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let sim = match config.noise {
                None => simulate_with(&config.state, None)?,
                Some(sigma) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(t as u64);
                    simulate_with(&config.state, Some((sigma, &mut rng)))?
                }
            };
            Ok(TrialRecord {
                trial: t,
                recovered_rho: sim.reconstruction.p_estimate,
                recovered_phi: sim.reconstruction.phi(),
                err_k1: sim.errors.k1,
                err_k2: sim.errors.k2,
                err_rho: sim.errors.rho,
                err_phi: sim.errors.phi,
            })
        })
        .collect::<Result<_>>()?;
    let phi_spread = spread(trials.iter().filter_map(|t| t.err_phi));
    let rho_spread = spread(trials.iter().filter_map(|t| t.err_rho));
    Ok(MonteCarloSummary {
        config: *config,
        truth,
        phi_spread,
        rho_spread,
        k1_spread: spread(trials.iter().map(|t| t.err_k1)).unwrap_or(0.0),
        k2_spread: spread(trials.iter().map(|t| t.err_k2)).unwrap_or(0.0),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgstates::{k12_moments, k3_moments, BgState, DEFAULT_TAIL_TOL};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn cfg(i1: f64, i2: f64, phi: f64) -> ClassicalConfig {
        ClassicalConfig::new(i1, i2, phi).unwrap()
    }

    #[test]
    fn reading_examples() {
        let r = classical_readings(&cfg(1.0, 1.0, 0.0));
        assert_eq!([r.w3, r.w4, r.w5, r.w6], [4.0, 0.0, 2.0, 2.0]);
        let r = classical_readings(&cfg(1.0, 1.0, FRAC_PI_2));
        for (got, want) in [r.w3, r.w4, r.w5, r.w6].iter().zip([2.0, 2.0, 0.0, 4.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((classical_readings(&cfg(4.0, 1.0, PI / 3.0)).w3 - 7.0).abs() < 1e-14);
        assert!(ClassicalConfig::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn observable_examples() {
        let o = classical_observables(&classical_readings(&cfg(1.0, 1.0, 0.0))).unwrap();
        assert_eq!((o.p1, o.p2, o.p3, o.cos_phi, o.sin_phi), (1.0, 0.0, 1.0, 1.0, -0.0));
        let r = classical_readings(&cfg(4.0, 1.0, PI / 3.0));
        let o = classical_observables(&r).unwrap();
        assert!((o.p3 - 2.0).abs() < 1e-14);
        // 2p² = (I₁+I₂)² − I₁² − I₂² with I₁+I₂ = (w₃+w₄)/2
        let half_sum = 0.5 * (r.w3 + r.w4);
        assert!((2.0 * o.p3 * o.p3 - (half_sum * half_sum - 16.0 - 1.0)).abs() < 1e-13);
        let flat = InterferenceReading {
            i1: 1.0,
            i2: 1.0,
            w3: 2.0,
            w4: 2.0,
            w5: 2.0,
            w6: 2.0,
        };
        assert!(matches!(classical_observables(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn poisson_examples() {
        let p1 = |phi: f64, p: f64| p * phi.cos();
        let p3 = |_: f64, p: f64| p;
        let b = poisson_bracket(p3, p1, PI / 3.0, 2.0, 1e-5);
        assert!((b - 3f64.sqrt()).abs() < 1e-9);
        let p2 = |phi: f64, p: f64| -p * phi.sin();
        assert!((poisson_bracket(p1, p2, 0.0, 1.0, 1e-5) - 1.0).abs() < 1e-9);
        assert!(poisson_bracket_check(&[(0.3, 0.0)], 1e-5).is_err());
    }

    #[test]
    fn poisson_residual_is_second_order() {
        // P₁, P₂ are linear in p, so only the φ differences contribute error;
        // use a large step to get above rounding
        let samples = [(0.7, 2.0), (2.1, 1.3), (-1.2, 0.8)];
        let r1 = poisson_bracket_check(&samples, 0.02).unwrap();
        let r2 = poisson_bracket_check(&samples, 0.01).unwrap();
        assert!((r1 / r2 - 4.0).abs() < 0.05, "{}", r1 / r2);
    }

    #[test]
    fn k_estimation_examples() {
        let e = estimate_k_from_number_state(0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(e.n_estimate, 0);
        assert!((e.k_estimate - 1.0).abs() < 1e-12);
        let e = estimate_k_from_number_state(1.25, 1.25, 1.5, 2.25).unwrap();
        assert_eq!(e.n_estimate, 1);
        assert!((e.k_estimate - 0.5).abs() < 1e-12);
        let e = estimate_k_from_number_state(0.25, 0.25, 0.5, 0.25).unwrap();
        assert_eq!((e.n_estimate, e.k_estimate), (0, 0.5));
        assert!(matches!(
            estimate_k_from_number_state(3.0, 3.0, 1.0, 1.0),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn number_state_pipeline() {
        let sim = simulate_and_reconstruct(&StateSpec::Number { k: 1.0, n: 5 }, None, 0).unwrap();
        let r = sim.reconstruction;
        assert_eq!((r.k1_mean, r.k2_mean), (0.0, 0.0));
        assert_eq!(r.pattern, Pattern::Flat);
        assert_eq!((sim.readings.w3, sim.readings.w5), (sim.readings.w4, sim.readings.w6));
        assert_eq!(r.n_estimate, Some(5));
        assert!((r.k_estimate.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.q_estimate.unwrap().abs() < 1e-12);
        assert!(r.phi().is_none());
    }

    #[test]
    fn coherent_state_pipeline() {
        let sim = simulate_and_reconstruct(
            &StateSpec::Bg {
                k: 1.0,
                rho: 2.0,
                phi: 0.0,
            },
            None,
            0,
        )
        .unwrap();
        assert!((sim.reconstruction.k1_mean - 2.0).abs() < 1e-12);
        let sim = simulate_and_reconstruct(
            &StateSpec::Bg {
                k: 1.0,
                rho: 3.0,
                phi: FRAC_PI_4,
            },
            None,
            0,
        )
        .unwrap();
        assert!(sim.errors.rho.unwrap().abs() < 1e-12);
        assert!(sim.errors.phi.unwrap().abs() < 1e-12);
        assert!(sim.errors.uncertainty_excess.unwrap().abs() < 1e-12);
        assert!(sim.reconstruction.k3sq_discrepancy.unwrap().abs() < 1e-12);
        let q = sim.reconstruction.q_estimate.unwrap();
        assert!(q.abs() < 1e-10, "{q}");
    }

    #[test]
    fn truth_matches_state_sums() {
        let s = BgState::with_auto_dim(1.5, Complex64::from_polar(2.0, 1.1), DEFAULT_TAIL_TOL).unwrap();
        let t = state_truth(&StateSpec::Bg {
            k: 1.5,
            rho: 2.0,
            phi: 1.1,
        })
        .unwrap();
        let m12 = k12_moments(&s).unwrap();
        let m3 = k3_moments(&s).unwrap();
        for (a, b) in [(t.k1_sq, m12.second_k1), (t.k2_sq, m12.second_k2), (t.k3_sq, m3.second)] {
            assert!((a - b).abs() < 1e-10 * b.max(1.0));
        }
        // ⟨K₁²+K₂²⟩ − ⟨K₃²⟩ = k(1−k)
        assert!((t.k1_sq + t.k2_sq - t.k3_sq - 1.5 * (1.0 - 1.5)).abs() < 1e-10);
    }

    #[test]
    fn noisy_runs_are_reproducible() {
        let config = NfmRunConfig {
            state: StateSpec::Bg {
                k: 1.0,
                rho: 3.0,
                phi: 0.4,
            },
            noise: Some(0.01),
            trials: 1000,
            seed: 42,
        };
        let a = monte_carlo(&config).unwrap();
        let b = monte_carlo(&config).unwrap();
        assert_eq!(a, b);
        let spread = a.phi_spread.unwrap();
        assert!(spread > 1e-4 && spread < 0.05, "{spread}");
        let one = simulate_and_reconstruct(&config.state, config.noise, 7).unwrap();
        assert_eq!(one, simulate_and_reconstruct(&config.state, config.noise, 7).unwrap());
    }

    #[test]
    fn run_config_json() {
        let c: NfmRunConfig = serde_json::from_str(
            r#"{"state": {"kind": "bg", "k": 1, "rho": 3, "phi": 0.5}, "noise": 0.01, "trials": 10, "seed": 42}"#,
        )
        .unwrap();
        assert_eq!(
            c.state,
            StateSpec::Bg {
                k: 1.0,
                rho: 3.0,
                phi: 0.5
            }
        );
        let c: NfmRunConfig = serde_json::from_str(r#"{"state": {"kind": "number", "k": 0.5, "n": 2}}"#).unwrap();
        assert_eq!((c.trials, c.noise, c.seed), (1, None, 0));
    }

    proptest! {
        #[test]
        fn classical_round_trip(i1 in 1e-3f64..1e3, i2 in 1e-3f64..1e3, phi in -PI..PI) {
            let c = cfg(i1, i2, phi);
            let r = classical_readings(&c);
            prop_assert!(r.consistency_residual() <= 1e-12 * (i1 + i2));
            let o = classical_observables(&r).unwrap();
            prop_assert!((o.p3 - c.p()).abs() <= 1e-12 * (i1 + i2));
            prop_assert!((o.p1 * o.p1 + o.p2 * o.p2 - o.p3 * o.p3).abs() <= 1e-12 * (i1 + i2).powi(2));
            prop_assert!((o.cos_phi - phi.cos()).abs() <= 1e-12 * (i1 + i2) / c.p());
            prop_assert!((o.sin_phi - phi.sin()).abs() <= 1e-12 * (i1 + i2) / c.p());
        }

        #[test]
        fn gauge_invariance(i1 in 0.1f64..10.0, i2 in 0.1f64..10.0, a in -3.0f64..3.0, b in -3.0f64..3.0, shift in -5.0f64..5.0) {
            let r1 = classical_readings(&ClassicalConfig::from_phases(i1, i2, a, b).unwrap());
            let r2 = classical_readings(&ClassicalConfig::from_phases(i1, i2, a + shift, b + shift).unwrap());
            for (x, y) in r1.values().iter().zip(r2.values()) {
                prop_assert!((x - y).abs() < 1e-12 * (i1 + i2));
            }
        }

        #[test]
        fn number_state_recovery(k in 0.05f64..4.0, n in 0u64..40) {
            let sim = simulate_and_reconstruct(&StateSpec::Number { k, n }, None, 0).unwrap();
            prop_assert_eq!(sim.reconstruction.n_estimate, Some(n));
            prop_assert!((sim.reconstruction.k_estimate.unwrap() - k).abs() < 1e-9);
        }

        #[test]
        fn poisson_bounded(phi in -PI..PI, p in 0.1f64..10.0) {
            prop_assert!(poisson_bracket_check(&[(phi, p)], 1e-5).unwrap() < 1e-8);
        }
    }
}
