// coefficients are kept as published, beyond f64 precision
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128, n = 15.
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

/// Natural logarithm of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(
            "ln_gamma",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling series shifted upward with Γ(x+1) = xΓ(x); independent of
    /// the Lanczos route.
    fn stirling_oracle(x: f64) -> f64 {
        let shift = 40usize;
        let y = x + shift as f64;
        let y2 = y * y;
        let series = 1.0 / (12.0 * y) - 1.0 / (360.0 * y * y2) + 1.0 / (1260.0 * y * y2 * y2)
            - 1.0 / (1680.0 * y * y2 * y2 * y2);
        let ln_gamma_y = (y - 0.5) * y.ln() - y + LN_SQRT_2PI + series;
        let ln_product: f64 = (0..shift).map(|i| (x + i as f64).ln()).sum();
        ln_gamma_y - ln_product
    }

    #[test]
    fn integer_and_half_integer_values() {
        assert!((ln_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14);
        assert!((ln_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-14);
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(ln_gamma(2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_and_a_half_matches_recurrence_oracle() {
        let oracle = stirling_oracle(2.5);
        // Γ(2.5) = 1.5 · 0.5 · √π
        let exact = (0.75 * PI.sqrt()).ln();
        assert!((oracle - exact).abs() < 5e-14);
        assert!((ln_gamma(2.5).unwrap() - oracle).abs() < 5e-14);
        assert!((ln_gamma(2.5).unwrap() - exact).abs() < 1e-15);
        assert!((ln_gamma(2.5).unwrap().exp() - 1.329_340_388_179_137).abs() < 1e-13);
    }

    #[test]
    fn relative_accuracy_over_range() {
        let mut x = 1e-3;
        while x < 1e6 {
            let got = ln_gamma(x).unwrap();
            let want = stirling_oracle(x);
            // lnΓ vanishes at 1 and 2; compare absolutely there.
            let scale = want.abs().max(1.0);
            assert!((got - want).abs() <= 1e-13 * scale, "x={x}: {got} vs {want}");
            x *= 1.37;
        }
    }

    #[test]
    fn nonpositive_argument_is_domain_error() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }
}
