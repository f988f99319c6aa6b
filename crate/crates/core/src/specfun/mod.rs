//! Special functions: `ln Γ`, and the modified Bessel functions `I_ν`, `K_ν`
//! for real order, together with the evaluation policy that selects between
//! the power series, its exponentially scaled form and the large-argument
//! expansion.

mod bessel;
mod gamma;

pub use bessel::{
    bessel_i, bessel_i_asymptotic, bessel_i_entire_complex, bessel_i_scaled, bessel_k, bessel_k_scaled, ln_bessel_i,
};
pub use gamma::ln_gamma;
pub(crate) use gamma::ln_gamma_unchecked;

use crate::error::{Error, Result};

/// Controls how [`bessel_i`] is evaluated.
///
/// Below `series_cutoff` the power series is summed directly; between the
/// cutoff and `asymptotic_threshold` the same series is summed with every
/// term scaled by `e^{−x}`; above the threshold the large-argument expansion
/// is used when the order is moderate (`ν² ≤ x/4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPolicy {
    pub series_cutoff: f64,
    pub asymptotic_threshold: f64,
    /// Series truncation: stop once the bound on the remaining tail is below
    /// this fraction of the partial sum.
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for EvalPolicy {
    fn default() -> Self {
        Self {
            series_cutoff: 30.0,
            asymptotic_threshold: 400.0,
            abs_tol: 1e-15,
            max_terms: 500,
        }
    }
}

impl EvalPolicy {
    pub fn new(series_cutoff: f64, asymptotic_threshold: f64, abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(series_cutoff > 0.0 && series_cutoff < asymptotic_threshold) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < series_cutoff < asymptotic_threshold, got {series_cutoff} and {asymptotic_threshold}"
            )));
        }
        if !(abs_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidArgument("max_terms must be at least 1".into()));
        }
        Ok(Self {
            series_cutoff,
            asymptotic_threshold,
            abs_tol,
            max_terms,
        })
    }
}
