use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::ln_gamma_unchecked;
use super::EvalPolicy;
use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadOptions};

fn check_order(func: &'static str, nu: f64) -> Result<()> {
    if !nu.is_finite() || nu <= -1.0 {
        return Err(domain(func, format!("order must be finite and > -1, got {nu}")));
    }
    Ok(())
}

/// `I_ν(x)`.
///
/// Orders in `(−1, 0)` are accepted for `x > 0`; they are needed for
/// `I_{2k−1}` with `k < 1/2`. The result overflows to `+∞` beyond `x ≈ 709`;
/// use [`bessel_i_scaled`] or [`ln_bessel_i`] there.
pub fn bessel_i(nu: f64, x: f64, policy: &EvalPolicy) -> Result<f64> {
    if x == 0.0 {
        return bessel_i_scaled(nu, x, policy);
    }
    if x <= policy.series_cutoff {
        check_order("bessel_i", nu)?;
        return power_series(nu, x, 0.0, policy);
    }
    Ok(bessel_i_scaled(nu, x, policy)? * x.exp())
}

/// `e^{−x}·I_ν(x)`, finite for every admissible argument.
pub fn bessel_i_scaled(nu: f64, x: f64, policy: &EvalPolicy) -> Result<f64> {
    check_order("bessel_i", nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain("bessel_i", format!("argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(domain("bessel_i", "I_ν(0) diverges for negative order"))
        };
    }
    if x <= policy.series_cutoff {
        return Ok(power_series(nu, x, 0.0, policy)? * (-x).exp());
    }
    if x >= policy.asymptotic_threshold && nu * nu <= 0.25 * x {
        return hankel_scaled(nu, x, policy);
    }
    power_series(nu, x, x, policy)
}

/// `ln I_ν(x)` for `x > 0`.
pub fn ln_bessel_i(nu: f64, x: f64, policy: &EvalPolicy) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("ln_bessel_i", format!("argument must be positive, got {x}")));
    }
    Ok(bessel_i_scaled(nu, x, policy)?.ln() + x)
}

/// `(x/2)^{ν+2n}/(n!Γ(ν+n+1))` summed, each term multiplied by `e^{−shift}`.
/// The terms are positive, so the sum stops once the geometric bound on the
/// remaining tail drops below `abs_tol` relative to the partial sum.
fn power_series(nu: f64, x: f64, shift: f64, policy: &EvalPolicy) -> Result<f64> {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = (nu * half.ln() - ln_gamma_unchecked(nu + 1.0) - shift).exp();
    let mut sum = term;
    for n in 0..policy.max_terms {
        let m = n as f64 + 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        let next_ratio = q / ((m + 1.0) * (m + 1.0 + nu));
        if next_ratio < 1.0 {
            let tail = term * next_ratio / (1.0 - next_ratio);
            if tail <= policy.abs_tol * sum {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence {
        func: "bessel_i",
        iterations: policy.max_terms,
    })
}

/// Large-argument expansion of `e^{−x}I_ν(x)` summed to its smallest term.
fn hankel_scaled(nu: f64, x: f64, policy: &EvalPolicy) -> Result<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=policy.max_terms {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= policy.abs_tol * sum.abs() {
            break;
        }
    }
    Ok(sum / (2.0 * PI * x).sqrt())
}

/// The three-term large-argument form
/// `e^x/√(2πx)·[1 − (4ν²−1)/(8x) + 2(4ν²−1)(4ν²−9)/(16²x²)]`.
pub fn bessel_i_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let bracket = 1.0 - (mu - 1.0) / (8.0 * x) + 2.0 * (mu - 1.0) * (mu - 9.0) / (256.0 * x * x);
    x.exp() / (2.0 * PI * x).sqrt() * bracket
}

/// `K_ν(x)` from `∫₀^∞ e^{−x cosh t} cosh(νt) dt`.
pub fn bessel_k(nu: f64, x: f64, policy: &EvalPolicy) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x, policy)? * (-x).exp())
}

/// `e^{x}·K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64, _policy: &EvalPolicy) -> Result<f64> {
    if !nu.is_finite() {
        return Err(domain("bessel_k", format!("order must be finite, got {nu}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(
            "bessel_k",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    // K_{−ν} = K_ν
    let nu = nu.abs();
    // log of the two exponentials in e^{x}·e^{−x cosh t}·cosh(νt)
    let decay = |t: f64| {
        let s = (0.5 * t).sinh();
        2.0 * x * s * s
    };
    let exponent = |t: f64| nu * t - decay(t);
    let peak_t = (nu / x).asinh();
    let peak = exponent(peak_t);
    let mut upper = peak_t + 1.0;
    while exponent(upper) > peak - 50.0 {
        upper = 1.5 * upper + 1.0;
    }
    let integrand = |t: f64| {
        let d = decay(t);
        0.5 * ((nu * t - d - peak).exp() + (-nu * t - d - peak).exp())
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 800,
    };
    let mut total = integrate(integrand, peak_t, upper, opts)?.value;
    if peak_t > 0.0 {
        total += integrate(integrand, 0.0, peak_t, opts)?.value;
    }
    Ok(total * peak.exp())
}

/// Entire part of `I_ν` at a complex argument: `Σ wⁿ/(n!Γ(ν+n+1))`, which
/// equals `(x/2)^{−ν} I_ν(x)` for `w = (x/2)²`.
///
/// Each term is multiplied by `e^{−ln_scale}` to keep large sums finite.
pub fn bessel_i_entire_complex(nu: f64, w: Complex64, ln_scale: f64, policy: &EvalPolicy) -> Result<Complex64> {
    check_order("bessel_i_entire_complex", nu)?;
    let mut sum = Complex64::new(0.0, 0.0);
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new((-ln_gamma_unchecked(nu + 1.0) - ln_scale).exp(), 0.0));
    }
    let ln_abs = w.norm().ln();
    let arg = w.arg();
    let mut max_mag: f64 = 0.0;
    for n in 0..policy.max_terms {
        let nf = n as f64;
        let ln_mag = nf * ln_abs - ln_gamma_unchecked(nf + 1.0) - ln_gamma_unchecked(nu + nf + 1.0) - ln_scale;
        let mag = ln_mag.exp();
        sum += Complex64::from_polar(mag, nf * arg);
        max_mag = max_mag.max(mag);
        // Cancellation limits the attainable accuracy to abs_tol relative to
        // the largest term, so the tail is measured against that.
        let ratio = w.norm() / ((nf + 1.0) * (nu + nf + 1.0));
        if ratio < 1.0 && mag * ratio / (1.0 - ratio) <= policy.abs_tol * max_mag {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        func: "bessel_i_entire_complex",
        iterations: policy.max_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> EvalPolicy {
        EvalPolicy::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_first_kind() {
        let v = bessel_i(0.5, 2.0, &pol()).unwrap();
        let closed = (2.0 / (PI * 2.0)).sqrt() * 2f64.sinh();
        assert!(rel(v, closed) < 1e-14);
        assert!((v - 2.046_236_863_089_055).abs() < 1e-12);
        for &x in &[0.01, 0.7, 5.0, 29.0, 31.0, 120.0, 500.0] {
            let scaled = bessel_i_scaled(0.5, x, &pol()).unwrap();
            let closed = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 - (-2.0 * x).exp());
            assert!(rel(scaled, closed) < 1e-12, "x={x}");
        }
        // I_{−1/2}(x) = √(2/(πx))·cosh x
        for &x in &[0.05, 1.0, 12.0, 60.0] {
            let scaled = bessel_i_scaled(-0.5, x, &pol()).unwrap();
            let closed = (2.0 / (PI * x)).sqrt() * 0.5 * (1.0 + (-2.0 * x).exp());
            assert!(rel(scaled, closed) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(1.0, 0.0, &pol()).unwrap(), 0.0);
        assert_eq!(bessel_i(0.0, 0.0, &pol()).unwrap(), 1.0);
        assert!(bessel_i(-0.5, 0.0, &pol()).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_i(0.5, -1.0, &pol()).is_err());
        assert!(bessel_i(-1.5, 1.0, &pol()).is_err());
        assert!(bessel_k(0.5, 0.0, &pol()).is_err());
        assert!(bessel_k(0.5, -2.0, &pol()).is_err());
    }

    #[test]
    fn nonconvergence_is_reported() {
        let tight = EvalPolicy {
            max_terms: 3,
            ..EvalPolicy::default()
        };
        let err = bessel_i(0.0, 20.0, &tight).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn half_integer_third_kind() {
        let k1 = bessel_k(0.5, 1.0, &pol()).unwrap();
        assert!(rel(k1, (PI / 2.0).sqrt() * (-1f64).exp()) < 1e-12);
        assert!((k1 - 0.461_068_504_447_895).abs() < 1e-12);
        let k2 = bessel_k(0.5, 2.0, &pol()).unwrap();
        assert!(rel(k2, (PI / 4.0).sqrt() * (-2f64).exp()) < 1e-12);
        // K_{3/2}(x) = √(π/(2x)) e^{−x} (1 + 1/x)
        for &x in &[0.1, 1.5, 9.0, 45.0] {
            let v = bessel_k_scaled(1.5, x, &pol()).unwrap();
            let closed = (PI / (2.0 * x)).sqrt() * (1.0 + 1.0 / x);
            assert!(rel(v, closed) < 1e-12, "x={x}");
        }
        assert!(bessel_k(0.0, 50.0, &pol()).unwrap() < 1e-20);
    }

    #[test]
    fn third_kind_decreases() {
        let mut prev = f64::INFINITY;
        for i in 1..60 {
            let x = 0.25 * i as f64;
            let v = bessel_k(1.3, x, &pol()).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn three_term_asymptotic_form() {
        let x: f64 = 20.0;
        let want = x.exp() / (2.0 * PI * x).sqrt();
        assert!(rel(bessel_i_asymptotic(0.5, x), want) < 1e-15);
        let i15 = bessel_i(1.5, 30.0, &pol()).unwrap();
        assert!(rel(bessel_i_asymptotic(1.5, 30.0), i15) < 1e-3);
        let i0 = bessel_i(0.0, 25.0, &pol()).unwrap();
        assert!(rel(bessel_i_asymptotic(0.0, 25.0), i0) < 1e-3);
    }

    #[test]
    fn asymptotic_remainder_is_third_order() {
        // The relative remainder of the three-term form behaves like −a₃/x³
        // with a₃ the next Hankel coefficient.
        for &nu in &[0.0, 1.0, 2.5] {
            let mu: f64 = 4.0 * nu * nu;
            let a1 = (mu - 1.0) / 8.0;
            let a3 = (mu - 1.0) * (mu - 9.0) * (mu - 25.0) / 3072.0;
            let a4 = a3 * (mu - 49.0) / 32.0;
            for &x in &[20.0, 40.0, 80.0, 160.0] {
                let exact = bessel_i(nu, x, &pol()).unwrap();
                let scaled = (exact - bessel_i_asymptotic(nu, x)) / exact * x * x * x;
                let bound = 2.0 * (a4.abs() + (a3 * a1).abs()) / x + 1e-6;
                assert!((scaled + a3).abs() <= bound, "nu={nu} x={x} scaled={scaled} a3={a3}");
            }
        }
    }

    #[test]
    fn regimes_join_continuously() {
        let p = pol();
        for &nu in &[0.0, 0.7, 3.0] {
            for &edge in &[p.series_cutoff, p.asymptotic_threshold] {
                let lo = bessel_i_scaled(nu, edge * (1.0 - 1e-15), &p).unwrap();
                let hi = bessel_i_scaled(nu, edge * (1.0 + 1e-15), &p).unwrap();
                assert!(rel(lo, hi) < 1e-12, "nu={nu} edge={edge} {lo} {hi}");
            }
        }
    }

    #[test]
    fn complex_entire_part_matches_real_route() {
        // w = (x/2)² real positive ⇒ Σ = (x/2)^{−ν} I_ν(x)
        let nu = 1.0;
        let x = 7.0;
        let w = Complex64::new(0.25 * x * x, 0.0);
        let s = bessel_i_entire_complex(nu, w, 0.0, &pol()).unwrap();
        let want = bessel_i(nu, x, &pol()).unwrap() / (0.5 * x).powf(nu);
        assert!(rel(s.re, want) < 1e-13 && s.im.abs() < 1e-13 * want);
        // w = −(x/2)² gives the ordinary Bessel function: J₀(2) from its series.
        let j = bessel_i_entire_complex(0.0, Complex64::new(-1.0, 0.0), 0.0, &pol()).unwrap();
        assert!((j.re - 0.223_890_779_141_235_67).abs() < 1e-14);
    }
}
